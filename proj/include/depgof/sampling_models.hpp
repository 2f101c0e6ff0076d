#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace depgof {

/// Ordered sequence of real observations. The library never stores missing
/// sentinels; ingest rejects them before a series is built.
using ReturnSeries = std::vector<double>;

/// Throws DataError if the series is shorter than `min_length` or contains a
/// non-finite value.
void validate_series(std::span<const double> series, std::size_t min_length = 2);

/// Markovian log-volatility: omega_{n+1} = g omega_n + sqrt(sigma2) eta_n.
struct Ar1LogVolParams {
    double g = 0.0;
    double sigma2 = 0.0;

    void validate() const;
    /// Stationary variance sigma2 / (1 - g^2).
    double stationary_variance() const { return sigma2 / (1.0 - g * g); }
};

/// Fractional Gaussian noise log-volatility with decay exponent nu.
struct FgnLogVolParams {
    double nu = 0.5;
    double sigma2 = 1.0;

    void validate() const;
    double hurst() const { return (2.0 - nu) / 2.0; }
};

/// iid log-normal stochastic volatility X = exp(s omega - s^2) xi.
struct StochasticVolParams {
    double s = 0.0;

    void validate() const;
};

/// A generated series together with the latent log-volatility path that
/// produced it (empty for models without a latent path).
struct GeneratedSeries {
    ReturnSeries values;
    std::vector<double> log_vol;
};

/// X_n = xi_n exp(omega_n - V[omega]) with AR(1) omega started from its
/// stationary law.
GeneratedSeries gen_ar1_logvol(const Ar1LogVolParams& params, std::size_t n, std::uint64_t seed);

/// alpha_t = sigma2 / (1 - g^2) * g^t.
double ar1_alpha(const Ar1LogVolParams& params, std::size_t lag);

/// alpha_t = sigma2/2 ((t+1)^{2-nu} - 2 t^{2-nu} + |t-1|^{2-nu}).
double fgn_alpha(const FgnLogVolParams& params, std::size_t lag);

/// Exact FGN synthesis by Cholesky factorization of the Toeplitz covariance.
/// The factor is computed once and reused, which is what makes replicated
/// experiments affordable.
class FgnGenerator {
public:
    static constexpr std::size_t kMaxLength = 4096;

    FgnGenerator(const FgnLogVolParams& params, std::size_t n);

    std::size_t length() const { return n_; }
    const FgnLogVolParams& params() const { return params_; }
    /// Target covariance, entry (i, j) = fgn_alpha(|i - j|).
    const Eigen::MatrixXd& covariance() const { return covariance_; }
    /// True if the 1e-12 diagonal regularization was needed.
    bool regularized() const { return regularized_; }

    /// Gaussian log-vol path omega_1..omega_n.
    std::vector<double> log_vol(std::uint64_t seed) const;
    /// Returns X_n = xi_n exp(omega_n - sigma2).
    GeneratedSeries generate(std::uint64_t seed) const;

private:
    FgnLogVolParams params_;
    std::size_t n_;
    Eigen::MatrixXd covariance_;
    Eigen::MatrixXd lower_;
    bool regularized_ = false;
};

GeneratedSeries gen_fgn_logvol(const FgnLogVolParams& params, std::size_t n, std::uint64_t seed);

ReturnSeries gen_iid_lognormal_vol(const StochasticVolParams& params, std::size_t n, std::uint64_t seed);

struct VolVolCalibration {
    double s2 = 0.0;
    /// Set when the estimate is negative (thinner tails than Gaussian).
    bool negative_warning = false;
};

/// s^2 = log((2/pi) <x^2> / <|x|>^2).
VolVolCalibration calibrate_volvol(std::span<const double> series);

}  // namespace depgof
