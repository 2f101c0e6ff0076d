#pragma once

#include "depgof/quantile_grid.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace depgof {

/// Copula values C_t(u_i, u_j) on a quantile grid. Row index follows the
/// earlier observation, column index the later one.
struct CopulaSurface {
    QuantileGrid grid;
    std::size_t lag = 0;  // 0 for a plain (non-lagged) pair
    Eigen::MatrixXd values;

    /// C - uv on the grid.
    Eigen::MatrixXd excess() const;
};

/// Psi_N(u_i, u_j): lag-weighted relative excess over the product copula.
struct PsiSurface {
    QuantileGrid grid;
    Eigen::MatrixXd values;
    std::size_t n = 0;
    std::size_t t_max = 0;
};

struct EmpiricalCopulaOptions {
    /// Apply the (n u / floor(n u)) (n v / floor(n v)) bias correction.
    bool bias_correction = true;
    /// Clip to the Frechet-Hoeffding bounds after correction.
    bool clip = true;
};

/// Rank-based empirical copula of the pairs (x_i, y_i). Ties are broken by
/// original index order.
CopulaSurface empirical_copula(std::span<const double> x, std::span<const double> y, const QuantileGrid& grid,
                               const EmpiricalCopulaOptions& options = {});

/// Empirical copula of (x_{1..N-t}, x_{1+t..N}).
CopulaSurface self_copula_at_lag(std::span<const double> series, std::size_t lag, const QuantileGrid& grid);

/// Entrywise mean of the per-series self-copulas.
CopulaSurface average_self_copula(const std::vector<std::vector<double>>& panel, std::size_t lag,
                                  const QuantileGrid& grid);

/// Self-copulas for lags 1..t_max averaged across the panel. Lags are
/// estimated concurrently when `threads > 1`; the output is identical for any
/// worker count.
std::vector<CopulaSurface> average_self_copulas(const std::vector<std::vector<double>>& panel, std::size_t t_max,
                                                const QuantileGrid& grid, unsigned threads = 1);

/// Default lag horizon min(512, N/2).
std::size_t default_t_max(std::size_t n);

/// Delta_t(u, v) = (C_t - uv) / (min(u, v) - uv) on the grid.
Eigen::MatrixXd relative_excess(const CopulaSurface& surface);

/// Psi_N = sum_t (1 - t/N) (Delta_t + Delta_t^T), summed by ascending lag.
PsiSurface psi_accumulate(const std::vector<CopulaSurface>& copulas, std::size_t n);

/// Blomqvist beta C(1/2, 1/2) - 1/4 (bilinear interpolation when 1/2 is not
/// a grid point).
double blomqvist_beta(const CopulaSurface& surface);

/// rho = sin(2 pi beta), exact for pseudo-elliptical copulas.
double blomqvist_rho(const CopulaSurface& surface);

/// (C(u,u) - u^2) / (u (1 - u)) at the grid point nearest u, clipped to [-1, 1].
double delta_diagonal(const CopulaSurface& surface, double u);

}  // namespace depgof
