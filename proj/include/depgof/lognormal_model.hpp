#pragma once

#include "depgof/copula_estimation.hpp"
#include "depgof/gauss_hermite.hpp"
#include "depgof/quantile_grid.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace depgof {

/// Basis functions tabulated on a grid: F^{-1}(u_i), A~(u_i), R~(u_i).
struct BasisTable {
    std::vector<double> quantile;
    std::vector<double> a;
    std::vector<double> r;
};

/// Log-normal volatility marginal X = xi * exp(sqrt(v) * omega + shift) with
/// xi, omega iid N(0, 1). The default (v = 1, shift = 0) is the reference
/// model whose basis functions A~ and R~ span the weak-dependence copula
/// expansion; other values describe e.g. the AR(1) generator's marginal
/// (v = V[omega], shift = -V[omega]). Shift does not affect the copula.
class LognormalVolModel {
public:
    static constexpr std::size_t kDefaultNodes = 64;

    explicit LognormalVolModel(double logvol_variance = 1.0, double log_shift = 0.0,
                               std::size_t nodes = kDefaultNodes);

    double logvol_variance() const { return variance_; }
    double log_shift() const { return shift_; }
    std::size_t nodes() const { return rule_.nodes.size(); }

    /// F(x) = int phi(w) Phi(x / e^{sw + shift}) dw.
    double cdf(double x) const;
    double pdf(double x) const;
    /// Bracketed root of F(x) = u; throws DomainError outside (0, 1).
    double quantile(double u) const;

    /// A~(u) = int phi(w) phi'(F^{-1}(u) / e^{sw + shift}) dw (odd about 1/2).
    double a_tilde(double u) const;
    /// R~(u) = int phi(w) phi(F^{-1}(u) / e^{sw + shift}) dw (even about 1/2).
    double r_tilde(double u) const;

    /// Tabulated on `grid`; computed once per grid size and cached.
    const BasisTable& basis(const QuantileGrid& grid) const;

private:
    double a_tilde_at(double q) const;
    double r_tilde_at(double q) const;

    double variance_;
    double sd_;
    double shift_;
    GaussHermiteRule rule_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::size_t, std::unique_ptr<BasisTable>> cache_;
};

/// Shared instance of the reference model (unit log-vol variance).
const LognormalVolModel& reference_model();

double marginal_cdf(double x);
double marginal_quantile(double u);
double a_tilde(double u);
double r_tilde(double u);

/// Per-lag weak-dependence coefficients.
struct LagCoefficients {
    std::size_t t = 0;
    double alpha = 0.0;  // log-vol covariance
    double beta = 0.0;   // leverage
    double rho = 0.0;    // residual correlation
    double residual_rms = 0.0;

    /// True when any coefficient exceeds 0.3 in magnitude, beyond which the
    /// linear expansion is not trustworthy.
    bool outside_linear_regime() const;
};

/// C_t(u,v) - uv ~= alpha A~(u)A~(v) - beta R~(u)A~(v) + rho R~(u)R~(v).
double copula_expansion(double u, double v, const LagCoefficients& c,
                        const LognormalVolModel& model = reference_model());

/// Surface uv + expansion on the grid, lag taken from c.t.
CopulaSurface copula_expansion_surface(const QuantileGrid& grid, const LagCoefficients& c,
                                       const LognormalVolModel& model = reference_model());

/// Least-squares fit of (alpha, beta, rho) on the diagonal and anti-diagonal
/// of the surface jointly, uniform weights.
LagCoefficients fit_lag_coefficients(const CopulaSurface& surface,
                                     const LognormalVolModel& model = reference_model());

/// alpha_t = -Sigma^2 log(t / T).
struct MultifractalFit {
    double sigma2 = 0.0;
    double horizon_T = 0.0;
    double residual = 0.0;
    /// Fitted amplitude <= 0: horizon is meaningless.
    bool non_positive = false;
    /// Horizon lies beyond the largest fitted lag.
    bool extrapolated = false;
};

MultifractalFit fit_multifractal(const std::vector<LagCoefficients>& coeffs);

}  // namespace depgof
