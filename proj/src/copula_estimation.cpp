#include "depgof/copula_estimation.hpp"

#include "depgof/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>

namespace depgof {

QuantileGrid::QuantileGrid(std::size_t m) {
    if (m < 1) throw DomainError("quantile grid needs at least one point");
    points_.resize(m);
    for (std::size_t i = 0; i < m; ++i) points_[i] = static_cast<double>(i + 1) / static_cast<double>(m + 1);
}

std::size_t QuantileGrid::nearest(double u) const {
    const double pos = u * static_cast<double>(size() + 1) - 1.0;
    const double clamped = std::clamp(std::round(pos), 0.0, static_cast<double>(size() - 1));
    return static_cast<std::size_t>(clamped);
}

Eigen::MatrixXd CopulaSurface::excess() const {
    const auto m = static_cast<Eigen::Index>(grid.size());
    const Eigen::Map<const Eigen::VectorXd> u(grid.points().data(), m);
    return values - u * u.transpose();
}

namespace {

// 1-based ranks, ties broken by index order.
std::vector<std::size_t> ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<std::size_t> r(x.size());
    for (std::size_t k = 0; k < order.size(); ++k) r[order[k]] = k + 1;
    return r;
}

void clip_frechet(CopulaSurface& s) {
    const auto& u = s.grid.points();
    const auto m = static_cast<Eigen::Index>(u.size());
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const double lo = std::max(u[i] + u[j] - 1.0, 0.0);
            const double hi = std::min(u[i], u[j]);
            s.values(i, j) = std::clamp(s.values(i, j), lo, hi);
        }
    }
}

}  // namespace

CopulaSurface empirical_copula(std::span<const double> x, std::span<const double> y, const QuantileGrid& grid,
                               const EmpiricalCopulaOptions& options) {
    if (x.size() != y.size()) {
        throw DataError("copula pair length mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
    }
    const std::size_t n = x.size();
    const std::size_t m = grid.size();
    if (n < m + 1) {
        throw DataError("grid of " + std::to_string(m) + " points is finer than the " + std::to_string(n) +
                        " observations allow (need n >= m + 1)");
    }

    // floor(n u_i) with u_i = (i+1)/(m+1); strictly positive because n >= m+1.
    std::vector<std::size_t> cut(m);
    for (std::size_t i = 0; i < m; ++i) cut[i] = (n * (i + 1)) / (m + 1);

    // bucket[r] = first grid index whose threshold admits rank r; m if none.
    std::vector<std::size_t> bucket(n + 1, m);
    {
        std::size_t i = 0;
        for (std::size_t r = 1; r <= n; ++r) {
            while (i < m && cut[i] < r) ++i;
            bucket[r] = i;
        }
    }

    const auto rx = ranks(x);
    const auto ry = ranks(y);
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m + 1), static_cast<Eigen::Index>(m + 1));
    for (std::size_t k = 0; k < n; ++k) {
        counts(static_cast<Eigen::Index>(bucket[rx[k]]), static_cast<Eigen::Index>(bucket[ry[k]])) += 1.0;
    }
    // 2-D prefix sums turn bucket counts into joint threshold counts.
    for (Eigen::Index i = 0; i <= static_cast<Eigen::Index>(m); ++i) {
        for (Eigen::Index j = 0; j <= static_cast<Eigen::Index>(m); ++j) {
            if (i > 0) counts(i, j) += counts(i - 1, j);
            if (j > 0) counts(i, j) += counts(i, j - 1);
            if (i > 0 && j > 0) counts(i, j) -= counts(i - 1, j - 1);
        }
    }

    CopulaSurface out{grid, 0, Eigen::MatrixXd(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m))};
    const auto nd = static_cast<double>(n);
    std::vector<double> factor(m, 1.0);
    if (options.bias_correction) {
        for (std::size_t i = 0; i < m; ++i) factor[i] = nd * grid[i] / static_cast<double>(cut[i]);
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            out.values(ii, jj) = counts(ii, jj) / nd * factor[i] * factor[j];
        }
    }
    if (options.clip) clip_frechet(out);
    return out;
}

CopulaSurface self_copula_at_lag(std::span<const double> series, std::size_t lag, const QuantileGrid& grid) {
    if (lag < 1) throw DomainError("self-copula lag must be at least 1");
    if (series.size() <= lag + grid.size()) {
        throw DataError("lag " + std::to_string(lag) + " too large for a series of length " +
                        std::to_string(series.size()) + " on a grid of " + std::to_string(grid.size()) + " points");
    }
    const std::size_t n = series.size() - lag;
    auto out = empirical_copula(series.subspan(0, n), series.subspan(lag, n), grid);
    out.lag = lag;
    return out;
}

CopulaSurface average_self_copula(const std::vector<std::vector<double>>& panel, std::size_t lag,
                                  const QuantileGrid& grid) {
    if (panel.empty()) throw DataError("cannot average self-copulas over an empty panel");
    CopulaSurface acc = self_copula_at_lag(panel.front(), lag, grid);
    for (std::size_t k = 1; k < panel.size(); ++k) acc.values += self_copula_at_lag(panel[k], lag, grid).values;
    acc.values /= static_cast<double>(panel.size());
    return acc;
}

std::vector<CopulaSurface> average_self_copulas(const std::vector<std::vector<double>>& panel, std::size_t t_max,
                                                const QuantileGrid& grid, unsigned threads) {
    if (panel.empty()) throw DataError("cannot average self-copulas over an empty panel");
    std::vector<CopulaSurface> out(t_max);
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(t_max)));
    if (threads == 1) {
        for (std::size_t t = 1; t <= t_max; ++t) out[t - 1] = average_self_copula(panel, t, grid);
        return out;
    }
    // Each worker owns a strided set of lags; no shared writes.
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t t = 1 + w; t <= t_max; t += threads) out[t - 1] = average_self_copula(panel, t, grid);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

std::size_t default_t_max(std::size_t n) { return std::min<std::size_t>(512, n / 2); }

Eigen::MatrixXd relative_excess(const CopulaSurface& surface) {
    const auto& u = surface.grid.points();
    const auto m = static_cast<Eigen::Index>(u.size());
    Eigen::MatrixXd delta(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const double denom = std::min(u[i], u[j]) - u[i] * u[j];
            // Only reachable off-grid or for absurdly fine grids.
            if (denom < 1e-9) throw NumericalError("relative copula excess denominator vanishes on the grid");
            delta(i, j) = (surface.values(i, j) - u[i] * u[j]) / denom;
        }
    }
    return delta;
}

PsiSurface psi_accumulate(const std::vector<CopulaSurface>& copulas, std::size_t n) {
    if (copulas.empty()) throw DataError("psi accumulation needs at least one lag");
    const QuantileGrid& grid = copulas.front().grid;
    const auto m = static_cast<Eigen::Index>(grid.size());

    std::vector<const CopulaSurface*> order;
    for (const auto& c : copulas) {
        if (!(c.grid == grid) || c.values.rows() != m || c.values.cols() != m) {
            throw DataError("copula surfaces for psi accumulation use different grids");
        }
        if (c.lag < 1 || c.lag >= n) {
            throw DataError("lag " + std::to_string(c.lag) + " outside [1, N-1] for N = " + std::to_string(n));
        }
        order.push_back(&c);
    }
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->lag < b->lag; });

    PsiSurface psi{grid, Eigen::MatrixXd::Zero(m, m), n, order.back()->lag};
    for (const auto* c : order) {
        const double w = 1.0 - static_cast<double>(c->lag) / static_cast<double>(n);
        const Eigen::MatrixXd delta = relative_excess(*c);
        psi.values += w * (delta + delta.transpose());
    }
    return psi;
}

double blomqvist_beta(const CopulaSurface& surface) {
    const std::size_t m = surface.grid.size();
    const auto& v = surface.values;
    if (m % 2 == 1) {
        const auto c = static_cast<Eigen::Index>(m / 2);
        return v(c, c) - 0.25;
    }
    if (m < 2) throw DomainError("grid too small to bracket the median");
    // 1/2 sits exactly midway between u_{m/2} and u_{m/2+1}.
    const auto lo = static_cast<Eigen::Index>(m / 2 - 1);
    const auto hi = lo + 1;
    return 0.25 * (v(lo, lo) + v(lo, hi) + v(hi, lo) + v(hi, hi)) - 0.25;
}

double blomqvist_rho(const CopulaSurface& surface) {
    return std::sin(2.0 * std::numbers::pi * blomqvist_beta(surface));
}

double delta_diagonal(const CopulaSurface& surface, double u) {
    const std::size_t i = surface.grid.nearest(u);
    const double ui = surface.grid[i];
    const auto ii = static_cast<Eigen::Index>(i);
    const double d = (surface.values(ii, ii) - ui * ui) / (ui * (1.0 - ui));
    return std::clamp(d, -1.0, 1.0);
}

}  // namespace depgof
