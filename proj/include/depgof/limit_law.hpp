#pragma once

#include "depgof/kernel_spectrum.hpp"
#include "depgof/sampling_models.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace depgof {

enum class StatisticKind { KS, CM };

/// How the sup of the bridge is taken for KS.
///  Grid:   max over the interior grid nodes only.
///  Bridge: between nodes the process is completed by conditionally independent
///          Brownian bridges with the local diffusion of H, and the exact
///          continuous sup of the empirical bridge is used on the data side.
enum class SupMode { Grid, Bridge };

const char* to_string(StatisticKind kind);
const char* to_string(SupMode mode);

struct StatisticDistribution {
    StatisticKind kind = StatisticKind::KS;
    std::vector<double> samples;  // ascending
    std::string spectrum_digest;
    std::size_t grid_m = 0;
    SupMode sup_mode = SupMode::Bridge;

    std::size_t n_trials() const { return samples.size(); }
    /// Empirical u-quantile (order statistic ceil(u n)).
    double quantile(double u) const;
    /// Empirical CDF.
    double cdf(double k) const;
};

struct LawOptions {
    /// 0 means: DEPGOF_THREADS if set, otherwise hardware concurrency.
    unsigned threads = 0;
    SupMode sup_mode = SupMode::Bridge;
    std::size_t block = 512;
};

struct LimitLaws {
    StatisticDistribution ks;
    StatisticDistribution cm;
};

/// Worker count from DEPGOF_THREADS, else hardware concurrency (at least 1).
unsigned default_thread_count();

/// One draw y = U Lambda^{1/2} z of the limit bridge on the grid.
Eigen::VectorXd sample_limit_process(const Spectrum& spectrum, std::uint64_t seed);

/// KS = sup |y|, CM = sum_i y_i^2 / (M + 1), both from the same draws. Trial t
/// uses the stream derive_seed(seed, t), so results do not depend on threads.
LimitLaws simulate_statistic_distribution(const Spectrum& spectrum, std::size_t n_trials, std::uint64_t seed,
                                          const LawOptions& options = {});

/// Upper-tail p-value (#{samples >= stat} + 1) / (n + 1).
double p_value(double stat, const StatisticDistribution& dist);

struct GofStatistics {
    double ks = 0.0;
    double cm = 0.0;
    std::size_t n = 0;
};

/// Statistics of sqrt(N) (F_N - F) after the transform z = F(x). CM is the
/// grid quadrature; KS is the grid max or the exact sup depending on mode.
GofStatistics gof_statistics(std::span<const double> series, const std::function<double(double)>& target_cdf,
                             const QuantileGrid& grid, SupMode mode = SupMode::Bridge);

struct GofResult {
    double ks_stat = 0.0;
    double cm_stat = 0.0;
    double ks_p = 1.0;
    double cm_p = 1.0;
    std::size_t n = 0;
};

GofResult run_gof_test(std::span<const double> series, const std::function<double(double)>& target_cdf,
                       const StatisticDistribution& dist_ks, const StatisticDistribution& dist_cm);

/// Single dominant mode approximation of the CDF:
///  KS: erf(k / (sqrt(2) kappa*)), kappa*^2 = H(u*, u*), u* = argmax |U_0|.
///  CM: erf(sqrt(k / (2 lambda_0))).
double dominant_mode_cdf(StatisticKind kind, const Spectrum& spectrum, double k);

/// kappa* of the KS dominant-mode approximation.
double dominant_mode_width(const Spectrum& spectrum);

/// q_dep(u) / q_iid(u).
double reduction_ratio(const StatisticDistribution& dep, const StatisticDistribution& iid, double u);

/// Kolmogorov survival Q(x) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 x^2).
double kolmogorov_survival(double x);

struct UniformityTest {
    double d = 0.0;
    double p_value = 1.0;
};

/// One-sample KS test of values against U(0,1), with the finite-n scaling
/// (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
UniformityTest uniformity_ks_test(std::vector<double> values);

}  // namespace depgof
