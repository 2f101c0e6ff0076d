#include "depgof/sampling_models.hpp"

#include "depgof/errors.hpp"
#include "depgof/random.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace depgof {

namespace {

// Independent streams for the latent path and the residuals.
constexpr std::uint64_t kLogVolStream = 1;
constexpr std::uint64_t kResidualStream = 2;

std::vector<double> standard_normals(std::size_t n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> out(n);
    for (auto& z : out) z = normal(rng);
    return out;
}

}  // namespace

void validate_series(std::span<const double> series, std::size_t min_length) {
    if (series.size() < min_length) {
        throw DataError("series has " + std::to_string(series.size()) + " observations, need at least " +
                        std::to_string(min_length));
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!std::isfinite(series[i])) {
            throw DataError("series value at position " + std::to_string(i) + " is not finite");
        }
    }
}

void Ar1LogVolParams::validate() const {
    if (!(g >= 0.0 && g < 1.0)) throw DomainError("AR(1) coefficient g must satisfy 0 <= g < 1");
    if (!(sigma2 > 0.0)) throw DomainError("AR(1) innovation variance sigma2 must be positive");
}

void FgnLogVolParams::validate() const {
    // nu = 1 is the iid boundary, accepted so the degenerate case can be tested.
    if (!(nu > 0.0 && nu <= 1.0)) throw DomainError("FGN exponent nu must lie in (0, 1]");
    if (!(sigma2 > 0.0)) throw DomainError("FGN scale sigma2 must be positive");
}

void StochasticVolParams::validate() const {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("vol-of-vol s must be finite and non-negative");
}

GeneratedSeries gen_ar1_logvol(const Ar1LogVolParams& params, std::size_t n, std::uint64_t seed) {
    params.validate();
    if (n < 2) throw DomainError("series length must be at least 2");

    const double var = params.stationary_variance();
    const double sigma = std::sqrt(params.sigma2);
    const auto eta = standard_normals(n, derive_seed(seed, kLogVolStream));
    const auto xi = standard_normals(n, derive_seed(seed, kResidualStream));

    GeneratedSeries out;
    out.log_vol.resize(n);
    out.values.resize(n);
    double omega = std::sqrt(var) * eta[0];
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) omega = params.g * omega + sigma * eta[i];
        out.log_vol[i] = omega;
        out.values[i] = xi[i] * std::exp(omega - var);
    }
    return out;
}

double ar1_alpha(const Ar1LogVolParams& params, std::size_t lag) {
    params.validate();
    return params.stationary_variance() * std::pow(params.g, static_cast<double>(lag));
}

double fgn_alpha(const FgnLogVolParams& params, std::size_t lag) {
    params.validate();
    const double h2 = 2.0 - params.nu;
    const double t = static_cast<double>(lag);
    return 0.5 * params.sigma2 *
           (std::pow(t + 1.0, h2) - 2.0 * std::pow(t, h2) + std::pow(std::abs(t - 1.0), h2));
}

FgnGenerator::FgnGenerator(const FgnLogVolParams& params, std::size_t n) : params_(params), n_(n) {
    params_.validate();
    if (n < 2) throw DomainError("series length must be at least 2");
    if (n > kMaxLength) {
        throw DomainError("exact FGN synthesis is limited to n <= " + std::to_string(kMaxLength));
    }

    std::vector<double> acov(n);
    for (std::size_t t = 0; t < n; ++t) acov[t] = fgn_alpha(params_, t);
    covariance_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            covariance_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acov[i > j ? i - j : j - i];
        }
    }

    Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
    if (llt.info() != Eigen::Success) {
        Eigen::MatrixXd jittered = covariance_;
        jittered.diagonal().array() += 1e-12;
        llt.compute(jittered);
        if (llt.info() != Eigen::Success) {
            throw NumericalError("FGN covariance is not positive definite after regularization");
        }
        regularized_ = true;
    }
    lower_ = llt.matrixL();
}

std::vector<double> FgnGenerator::log_vol(std::uint64_t seed) const {
    const auto z = standard_normals(n_, derive_seed(seed, kLogVolStream));
    const Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(n_));
    const Eigen::VectorXd omega = lower_.triangularView<Eigen::Lower>() * zv;
    return {omega.data(), omega.data() + omega.size()};
}

GeneratedSeries FgnGenerator::generate(std::uint64_t seed) const {
    GeneratedSeries out;
    out.log_vol = log_vol(seed);
    const auto xi = standard_normals(n_, derive_seed(seed, kResidualStream));
    out.values.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) out.values[i] = xi[i] * std::exp(out.log_vol[i] - params_.sigma2);
    return out;
}

GeneratedSeries gen_fgn_logvol(const FgnLogVolParams& params, std::size_t n, std::uint64_t seed) {
    return FgnGenerator(params, n).generate(seed);
}

ReturnSeries gen_iid_lognormal_vol(const StochasticVolParams& params, std::size_t n, std::uint64_t seed) {
    params.validate();
    if (n < 1) throw DomainError("series length must be at least 1");
    const auto omega = standard_normals(n, derive_seed(seed, kLogVolStream));
    const auto xi = standard_normals(n, derive_seed(seed, kResidualStream));
    ReturnSeries out(n);
    const double s = params.s;
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(s * omega[i] - s * s) * xi[i];
    return out;
}

VolVolCalibration calibrate_volvol(std::span<const double> series) {
    validate_series(series, 1);
    double m1 = 0.0;
    double m2 = 0.0;
    for (double x : series) {
        m1 += std::abs(x);
        m2 += x * x;
    }
    const auto n = static_cast<double>(series.size());
    m1 /= n;
    m2 /= n;
    if (!(m1 > 0.0)) throw DataError("vol-of-vol calibration needs a non-zero absolute mean");
    VolVolCalibration out;
    out.s2 = std::log((2.0 / std::numbers::pi) * m2 / (m1 * m1));
    out.negative_warning = out.s2 < 0.0;
    return out;
}

}  // namespace depgof
