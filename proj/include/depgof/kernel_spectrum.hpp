#pragma once

#include "depgof/copula_estimation.hpp"
#include "depgof/lognormal_model.hpp"
#include "depgof/quantile_grid.hpp"
#include "depgof/sampling_models.hpp"

#include <Eigen/Dense>

#include <string>

namespace depgof {

/// Covariance kernel H(u_i, u_j) of the limiting empirical-CDF bridge.
struct KernelMatrix {
    QuantileGrid grid;
    Eigen::MatrixXd values;
};

/// Eigenpairs of a kernel, eigenvalues descending. Eigenvectors are columns
/// in continuum normalization: sum_i U_j(u_i)^2 * weight = 1.
struct Spectrum {
    QuantileGrid grid;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;

    std::size_t modes() const { return static_cast<std::size_t>(eigenvalues.size()); }
    /// sum_j lambda_j U_j(u_i) U_j(u_k).
    Eigen::MatrixXd reconstruct() const;
    /// Stable hex fingerprint of the eigenvalues and eigenvectors.
    std::string digest() const;
};

/// Brownian bridge kernel min(u, v) - uv.
KernelMatrix brownian_bridge_kernel(const QuantileGrid& grid);

/// H = I (1 + Psi).
KernelMatrix build_kernel_from_psi(const PsiSurface& psi);

/// 2 g sigma2 / ((1 - g)^2 (1 + g)), i.e. twice the summed AR(1) log-vol
/// autocovariance.
double ar1_kernel_coefficient(const Ar1LogVolParams& params);

/// H = I + ar1_kernel_coefficient * A~ A~^T.
KernelMatrix build_kernel_ar1(const Ar1LogVolParams& params, const QuantileGrid& grid,
                              const LognormalVolModel& model = reference_model());

/// sum_{t=1}^{n} (1 - t/n) alpha_t for the FGN autocovariance.
double fgn_weighted_alpha_sum(const FgnLogVolParams& params, std::size_t n);

/// H = I + 2 * fgn_weighted_alpha_sum * A~ A~^T (finite n, no infinite-horizon
/// limit since FGN is long-ranged).
KernelMatrix build_kernel_fgn(const FgnLogVolParams& params, std::size_t n, const QuantileGrid& grid,
                              const LognormalVolModel& model = reference_model());

/// Lag-weighted sums S_x = sum_t (1 - t/N) x_t of the expansion coefficients.
struct ExpansionSums {
    double alpha = 0.0;
    double beta = 0.0;
    double rho = 0.0;
};

ExpansionSums weighted_sums(const std::vector<LagCoefficients>& coeffs, std::size_t n);

/// H = I + 2 S_a A + 2 S_r R - S_b (B + B^T), with B(u,v) = R~(u) A~(v).
KernelMatrix build_kernel_expansion(const ExpansionSums& sums, const QuantileGrid& grid,
                                    const LognormalVolModel& model = reference_model());

struct EigenOptions {
    /// Eigenvalues in [-clamp_tolerance, 0) are set to zero; anything more
    /// negative is reported as an indefinite kernel.
    double clamp_tolerance = 1e-9;
};

/// Symmetric eigendecomposition of [H(u_i,u_j) * weight], rescaled to
/// continuum normalization.
Spectrum eigendecompose(const KernelMatrix& kernel, const EigenOptions& options = {});

struct CmMoments {
    double mean = 0.0;      // Tr H
    double variance = 0.0;  // 2 Tr H^2
};

CmMoments cm_moments(const KernelMatrix& kernel);

/// Quadrature traces of the rank-one operators on the grid.
struct OperatorTraces {
    double tr_i = 0.0;
    double tr_a = 0.0;
    double tr_r = 0.0;
    double tr_i2 = 0.0;
    double tr_ia = 0.0;  // <A~| I |A~>
    double tr_ir = 0.0;  // <R~| I |R~>
    double tr_b_plus_bt = 0.0;
};

OperatorTraces operator_traces(const QuantileGrid& grid, const LognormalVolModel& model = reference_model());

}  // namespace depgof
