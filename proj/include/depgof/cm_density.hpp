#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace depgof {

/// Tabulated density of the iid Cramer-von Mises limit, sum_j (j pi)^-2 z_j^2,
/// by Monte Carlo plus a Gaussian kernel density estimate.
class IidCmDensity {
public:
    struct Options {
        std::size_t n_trials = 10'000'000;
        std::uint64_t seed = 0x5eed'c0de'0001ULL;
        double bandwidth = 0.005;
        double k_step = 1e-3;
        double k_max = 5.0;
        /// Modes drawn explicitly; the remainder is a moment-matched gamma draw.
        std::size_t explicit_modes = 24;
    };

    IidCmDensity() : IidCmDensity(Options{}) {}
    explicit IidCmDensity(const Options& options);

    double k_step() const { return step_; }
    const std::vector<double>& values() const { return density_; }
    /// Linear interpolation on the tabulated grid, zero outside [0, k_max].
    double density(double k) const;

private:
    double step_;
    std::vector<double> density_;
};

/// Shared default baseline, built on first use.
const IidCmDensity& default_iid_cm_density();

/// Density and CDF of the CM law for H = I + alpha_bar P_A to first order in
/// alpha_bar:
///   P(k) = (1 - w) P_I(k) + c int_0^k P_I(k - z) e^{-2 pi^2 z} I_0(c z) dz,
/// c = 4 pi^4 alpha_bar a2^2, w = c / sqrt((2 pi^2)^2 - c^2).
class CmDensityCorrection {
public:
    CmDensityCorrection(double alpha_bar, double a2, const IidCmDensity& baseline = default_iid_cm_density());

    double density(double k) const;
    double cdf(double k) const;
    double k_step() const { return step_; }
    const std::vector<double>& density_table() const { return density_; }

private:
    double step_;
    std::vector<double> density_;
    std::vector<double> cdf_;
};

/// Corrected density with the default baseline and the reference-model a2.
double cm_density_correction(double k, double alpha_bar);

}  // namespace depgof
