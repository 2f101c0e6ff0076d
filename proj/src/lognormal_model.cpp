#include "depgof/lognormal_model.hpp"

#include "depgof/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

namespace depgof {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double normal_pdf(double y) { return kInvSqrt2Pi * std::exp(-0.5 * y * y); }
double normal_cdf(double y) { return 0.5 * std::erfc(-y / std::numbers::sqrt2); }

}  // namespace

LognormalVolModel::LognormalVolModel(double logvol_variance, double log_shift, std::size_t nodes)
    : variance_(logvol_variance), sd_(std::sqrt(logvol_variance)), shift_(log_shift), rule_(gauss_hermite(nodes)) {
    if (!(logvol_variance >= 0.0) || !std::isfinite(logvol_variance)) {
        throw DomainError("log-vol variance must be finite and non-negative");
    }
}

double LognormalVolModel::cdf(double x) const {
    return rule_.integrate([&](double w) { return normal_cdf(x * std::exp(-(sd_ * w + shift_))); });
}

double LognormalVolModel::pdf(double x) const {
    return rule_.integrate([&](double w) {
        const double scale = std::exp(-(sd_ * w + shift_));
        return normal_pdf(x * scale) * scale;
    });
}

double LognormalVolModel::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile level must lie in (0, 1), got " + std::to_string(u));
    if (u == 0.5) return 0.0;

    double lo = -50.0;
    double hi = 50.0;
    while (cdf(lo) > u) lo *= 2.0;
    while (cdf(hi) < u) hi *= 2.0;
    const auto f = [&](double x) { return cdf(x) - u; };
    const auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-13 * std::max(1.0, std::abs(a)); };
    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f(lo), f(hi), tol, max_iter);
    if (max_iter >= 200) throw NumericalError("marginal quantile root finding did not converge");
    return 0.5 * (a + b);
}

double LognormalVolModel::a_tilde_at(double q) const {
    return rule_.integrate([&](double w) {
        const double y = q * std::exp(-(sd_ * w + shift_));
        return -y * normal_pdf(y);
    });
}

double LognormalVolModel::r_tilde_at(double q) const {
    return rule_.integrate([&](double w) { return normal_pdf(q * std::exp(-(sd_ * w + shift_))); });
}

double LognormalVolModel::a_tilde(double u) const { return a_tilde_at(quantile(u)); }
double LognormalVolModel::r_tilde(double u) const { return r_tilde_at(quantile(u)); }

const BasisTable& LognormalVolModel::basis(const QuantileGrid& grid) const {
    std::lock_guard lock(cache_mutex_);
    auto& slot = cache_[grid.size()];
    if (!slot) {
        auto table = std::make_unique<BasisTable>();
        const std::size_t m = grid.size();
        table->quantile.resize(m);
        table->a.resize(m);
        table->r.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double q = quantile(grid[i]);
            table->quantile[i] = q;
            table->a[i] = a_tilde_at(q);
            table->r[i] = r_tilde_at(q);
        }
        slot = std::move(table);
    }
    return *slot;
}

const LognormalVolModel& reference_model() {
    static const LognormalVolModel model;
    return model;
}

double marginal_cdf(double x) { return reference_model().cdf(x); }
double marginal_quantile(double u) { return reference_model().quantile(u); }
double a_tilde(double u) { return reference_model().a_tilde(u); }
double r_tilde(double u) { return reference_model().r_tilde(u); }

bool LagCoefficients::outside_linear_regime() const {
    return std::abs(alpha) > 0.3 || std::abs(beta) > 0.3 || std::abs(rho) > 0.3;
}

double copula_expansion(double u, double v, const LagCoefficients& c, const LognormalVolModel& model) {
    const double au = model.a_tilde(u);
    const double av = model.a_tilde(v);
    const double ru = model.r_tilde(u);
    const double rv = model.r_tilde(v);
    return c.alpha * au * av - c.beta * ru * av + c.rho * ru * rv;
}

CopulaSurface copula_expansion_surface(const QuantileGrid& grid, const LagCoefficients& c,
                                       const LognormalVolModel& model) {
    const auto& b = model.basis(grid);
    const auto m = static_cast<Eigen::Index>(grid.size());
    CopulaSurface s{grid, c.t, Eigen::MatrixXd(m, m)};
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            s.values(i, j) = grid[i] * grid[j] + c.alpha * b.a[i] * b.a[j] - c.beta * b.r[i] * b.a[j] +
                             c.rho * b.r[i] * b.r[j];
        }
    }
    return s;
}

LagCoefficients fit_lag_coefficients(const CopulaSurface& surface, const LognormalVolModel& model) {
    const std::size_t m = surface.grid.size();
    if (m < 10) throw DomainError("coefficient fit needs a grid of at least 10 points");
    const auto& b = model.basis(surface.grid);

    // Rows: diagonal (u_i, u_i) then anti-diagonal (u_i, 1 - u_i).
    const auto rows = static_cast<Eigen::Index>(2 * m);
    Eigen::MatrixXd design(rows, 3);
    Eigen::VectorXd target(rows);
    for (std::size_t i = 0; i < m; ++i) {
        for (int pass = 0; pass < 2; ++pass) {
            const std::size_t j = pass == 0 ? i : m - 1 - i;
            const auto row = static_cast<Eigen::Index>(pass * m + i);
            design(row, 0) = b.a[i] * b.a[j];
            design(row, 1) = -b.r[i] * b.a[j];
            design(row, 2) = b.r[i] * b.r[j];
            target(row) = surface.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                          surface.grid[i] * surface.grid[j];
        }
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) throw NumericalError("coefficient fit design matrix is rank deficient");
    const Eigen::Vector3d coef = qr.solve(target);

    LagCoefficients out;
    out.t = surface.lag;
    out.alpha = coef(0);
    out.beta = coef(1);
    out.rho = coef(2);
    out.residual_rms = std::sqrt((design * coef - target).squaredNorm() / static_cast<double>(rows));
    return out;
}

MultifractalFit fit_multifractal(const std::vector<LagCoefficients>& coeffs) {
    std::size_t count = 0;
    std::size_t max_lag = 0;
    double sx = 0.0, sy = 0.0;
    for (const auto& c : coeffs) {
        if (c.t == 0) continue;
        ++count;
        max_lag = std::max(max_lag, c.t);
        sx += std::log(static_cast<double>(c.t));
        sy += c.alpha;
    }
    if (count < 3) throw DataError("multifractal fit needs at least 3 positive lags");
    const double mx = sx / static_cast<double>(count);
    const double my = sy / static_cast<double>(count);
    double sxx = 0.0, sxy = 0.0;
    for (const auto& c : coeffs) {
        if (c.t == 0) continue;
        const double dx = std::log(static_cast<double>(c.t)) - mx;
        sxx += dx * dx;
        sxy += dx * (c.alpha - my);
    }
    if (!(sxx > 0.0)) throw DataError("multifractal fit needs at least two distinct lags");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;

    MultifractalFit fit;
    fit.sigma2 = -slope;
    double ss = 0.0;
    for (const auto& c : coeffs) {
        if (c.t == 0) continue;
        const double r = c.alpha - (intercept + slope * std::log(static_cast<double>(c.t)));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / static_cast<double>(count));
    // A flat or rising profile has no finite horizon.
    fit.non_positive = !(fit.sigma2 > 1e-12 * std::max(1.0, std::abs(intercept)));
    if (fit.non_positive) {
        fit.horizon_T = std::numeric_limits<double>::quiet_NaN();
    } else {
        fit.horizon_T = std::exp(intercept / fit.sigma2);
        fit.extrapolated = fit.horizon_T > static_cast<double>(max_lag);
    }
    return fit;
}

}  // namespace depgof
