#include "depgof/errors.hpp"
#include "depgof/kernel_spectrum.hpp"
#include "depgof/limit_law.hpp"
#include "depgof/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace depgof;

namespace {

// Kolmogorov CDF by its alternating series, independent of the library.
double kolmogorov_cdf(double k) {
    double s = 0.0;
    for (int j = 1; j <= 200; ++j) s += (j % 2 ? 1.0 : -1.0) * std::exp(-2.0 * j * j * k * k);
    return 1.0 - 2.0 * s;
}

const Spectrum& iid_spectrum() {
    static const Spectrum s = eigendecompose(brownian_bridge_kernel(QuantileGrid(100)));
    return s;
}

const LimitLaws& iid_laws() {
    static const LimitLaws l = simulate_statistic_distribution(iid_spectrum(), 100'000, 2024);
    return l;
}

Spectrum single_mode(double lambda) {
    const QuantileGrid g(50);
    Spectrum s{g, Eigen::VectorXd::Constant(1, lambda), Eigen::MatrixXd(50, 1)};
    for (std::size_t i = 0; i < 50; ++i) s.eigenvectors(static_cast<Eigen::Index>(i), 0) = std::sqrt(2.0) * std::sin(std::numbers::pi * g[i]);
    return s;
}

double sample_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v) {
    const double m = sample_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST(LimitProcess, CovarianceReproducesKernel) {
    const QuantileGrid g(10);
    const KernelMatrix k = build_kernel_expansion({0.5, 0.1, 0.2}, g);
    const Spectrum s = eigendecompose(k);
    const std::size_t draws = 100'000;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(10, 10);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(10);
    for (std::size_t d = 0; d < draws; ++d) {
        const Eigen::VectorXd y = sample_limit_process(s, d);
        cov += y * y.transpose();
        mean += y;
    }
    cov /= static_cast<double>(draws);
    mean /= static_cast<double>(draws);
    for (Eigen::Index i = 0; i < 10; ++i) {
        EXPECT_NEAR(mean(i), 0.0, 4.0 * std::sqrt(k.values(i, i) / draws));
        for (Eigen::Index j = 0; j < 10; ++j) {
            const double se = std::sqrt((k.values(i, i) * k.values(j, j) + k.values(i, j) * k.values(i, j)) / draws);
            EXPECT_NEAR(cov(i, j), k.values(i, j), 4.0 * se) << i << "," << j;
        }
    }
}

TEST(LimitProcess, SingleModeDrawsAreMultiplesOfTheMode) {
    const Spectrum s = single_mode(0.3);
    const Eigen::VectorXd y = sample_limit_process(s, 5);
    const double c = y(10) / s.eigenvectors(10, 0);
    EXPECT_LT((y - c * s.eigenvectors.col(0)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(sample_limit_process(s, 5), y);
}

TEST(LimitLaws, IidKsMatchesKolmogorov) {
    const auto& l = iid_laws();
    EXPECT_EQ(l.ks.n_trials(), 100'000u);
    for (double k : {0.5, 0.8, 1.0, 1.358}) EXPECT_NEAR(l.ks.cdf(k), kolmogorov_cdf(k), 0.01) << k;
    EXPECT_NEAR(l.ks.quantile(0.95), 1.358, 0.015);
}

TEST(LimitLaws, IidCmQuantileAndMoments) {
    const auto& l = iid_laws();
    EXPECT_NEAR(l.cm.quantile(0.95), 0.4614, 0.008);
    const auto mom = cm_moments(brownian_bridge_kernel(QuantileGrid(100)));
    const double n = static_cast<double>(l.cm.n_trials());
    const double mean = sample_mean(l.cm.samples);
    const double var = sample_var(l.cm.samples);
    EXPECT_NEAR(mean, mom.mean, 4.0 * std::sqrt(var / n));
    // Fourth cumulant of a Gaussian quadratic form: 48 Tr H^4.
    const Eigen::VectorXd lam = iid_spectrum().eigenvalues;
    const double k4 = 48.0 * lam.array().pow(4).sum();
    const double se_var = std::sqrt((k4 + 2.0 * var * var) / n);
    EXPECT_NEAR(var, mom.variance, 4.0 * se_var);
}

TEST(LimitLaws, PointwiseBoundsAndOrdering) {
    const auto& l = iid_laws();
    EXPECT_TRUE(std::is_sorted(l.ks.samples.begin(), l.ks.samples.end()));
    EXPECT_TRUE(std::is_sorted(l.cm.samples.begin(), l.cm.samples.end()));
    EXPECT_GE(l.ks.samples.front(), 0.0);
    EXPECT_GE(l.cm.samples.front(), 0.0);
    // CM <= M KS^2 holds per draw and therefore between order statistics.
    for (std::size_t i = 0; i < l.cm.samples.size(); i += 97) EXPECT_LE(l.cm.samples[i], 100.0 * l.ks.samples[i] * l.ks.samples[i]);
    double prev = 0.0;
    for (double u = 0.0; u <= 1.0; u += 0.05) {
        EXPECT_GE(l.ks.quantile(u), prev);
        prev = l.ks.quantile(u);
    }
    EXPECT_EQ(l.ks.spectrum_digest, iid_spectrum().digest());
    EXPECT_EQ(l.ks.grid_m, 100u);
}

TEST(LimitLaws, ThreadCountDoesNotChangeResults) {
    const Spectrum s = eigendecompose(brownian_bridge_kernel(QuantileGrid(30)));
    LawOptions one, four;
    one.threads = 1;
    four.threads = 4;
    one.block = four.block = 100;
    const auto a = simulate_statistic_distribution(s, 5'000, 9, one);
    const auto b = simulate_statistic_distribution(s, 5'000, 9, four);
    EXPECT_EQ(a.ks.samples, b.ks.samples);
    EXPECT_EQ(a.cm.samples, b.cm.samples);
}

TEST(LimitLaws, GridRefinementStability) {
    const auto coarse = simulate_statistic_distribution(eigendecompose(brownian_bridge_kernel(QuantileGrid(50))), 100'000, 77);
    const auto fine = simulate_statistic_distribution(eigendecompose(brownian_bridge_kernel(QuantileGrid(100))), 100'000, 78);
    EXPECT_LT(std::abs(coarse.ks.quantile(0.95) / fine.ks.quantile(0.95) - 1.0), 0.01);
    EXPECT_LT(std::abs(coarse.cm.quantile(0.95) / fine.cm.quantile(0.95) - 1.0), 0.01);
}

TEST(LimitLaws, GridSupIsSmallerThanBridgeSup) {
    LawOptions grid;
    grid.sup_mode = SupMode::Grid;
    const auto g = simulate_statistic_distribution(iid_spectrum(), 20'000, 2024, grid);
    const auto& b = iid_laws();
    EXPECT_EQ(g.ks.sup_mode, SupMode::Grid);
    EXPECT_LT(g.ks.quantile(0.95), b.ks.quantile(0.95) - 0.03);
    // CM is unaffected by the sup mode.
    EXPECT_EQ(g.cm.samples.front(), simulate_statistic_distribution(iid_spectrum(), 20'000, 2024).cm.samples.front());
}

TEST(LimitLaws, DependentKernelStretchesBothLaws) {
    const QuantileGrid g(100);
    const Spectrum dep = eigendecompose(build_kernel_expansion({3.2506 / 2.0, 0.0, 0.0}, g));
    const auto d = simulate_statistic_distribution(dep, 100'000, 5);
    const auto& i = iid_laws();
    for (int q = 1; q <= 9; ++q) {
        EXPECT_GT(d.ks.quantile(q / 10.0), i.ks.quantile(q / 10.0));
        EXPECT_GT(d.cm.quantile(q / 10.0), i.cm.quantile(q / 10.0));
    }
    EXPECT_GT(reduction_ratio(d.ks, i.ks, 0.95), 1.0);
    const auto d2 = simulate_statistic_distribution(dep, 100'000, 6);
    EXPECT_NEAR(reduction_ratio(d2.ks, i.ks, 0.95) / reduction_ratio(d.ks, i.ks, 0.95), 1.0, 0.01);
    EXPECT_NEAR(reduction_ratio(d2.cm, i.cm, 0.95) / reduction_ratio(d.cm, i.cm, 0.95), 1.0, 0.01);
}

TEST(PValue, Convention) {
    StatisticDistribution d;
    d.kind = StatisticKind::KS;
    for (int i = 1; i <= 99; ++i) d.samples.push_back(i);
    EXPECT_DOUBLE_EQ(p_value(0.0, d), 1.0);
    EXPECT_DOUBLE_EQ(p_value(1000.0, d), 1.0 / 100.0);
    EXPECT_DOUBLE_EQ(p_value(50.0, d), 0.51);  // 50 samples >= 50
    double prev = 1.0;
    for (double s = 0.0; s < 110.0; s += 0.5) {
        EXPECT_LE(p_value(s, d), prev);
        prev = p_value(s, d);
    }
    EXPECT_THROW(p_value(1.0, StatisticDistribution{}), DataError);
}

TEST(GofTest, CorrectlySpecifiedNullGivesUniformPValues) {
    const auto& l = iid_laws();
    const auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
    std::vector<double> pk, pc;
    for (std::size_t r = 0; r < 350; ++r) {
        SplitMix64 rng(derive_seed(4242, r));
        std::normal_distribution<double> z;
        std::vector<double> x(500);
        for (auto& v : x) v = z(rng);
        const auto res = run_gof_test(x, cdf, l.ks, l.cm);
        EXPECT_EQ(res.n, 500u);
        EXPECT_GT(res.ks_p, 0.0);
        EXPECT_LE(res.ks_p, 1.0);
        pk.push_back(res.ks_p);
        pc.push_back(res.cm_p);
    }
    EXPECT_GT(uniformity_ks_test(pk).p_value, 0.05);
    EXPECT_GT(uniformity_ks_test(pc).p_value, 0.05);
}

TEST(GofTest, StatisticsOnSmallSample) {
    // z = (0.1, 0.4, 0.8): D_N = max(1/3 - 0.1, 2/3 - 0.4, 1 - 0.8, 0.1, 0.4 - 1/3, 0.8 - 2/3) = 4/15.
    const std::vector<double> x{0.1, 0.8, 0.4};
    const auto id = [](double v) { return v; };
    const auto s = gof_statistics(x, id, QuantileGrid(9), SupMode::Bridge);
    EXPECT_NEAR(s.ks, std::sqrt(3.0) * 4.0 / 15.0, 1e-14);
    const auto sg = gof_statistics(x, id, QuantileGrid(9), SupMode::Grid);
    EXPECT_LE(sg.ks, s.ks + 1e-15);
    double cm = 0.0;
    for (int i = 1; i <= 9; ++i) {
        const double u = i / 10.0;
        const double f = ((0.1 <= u + 1e-15) + (0.4 <= u + 1e-15) + (0.8 <= u + 1e-15)) / 3.0;
        cm += 3.0 * (f - u) * (f - u) / 10.0;
    }
    EXPECT_NEAR(s.cm, cm, 1e-14);
}

TEST(GofTest, ErrorsAndDegenerateInput) {
    const auto& l = iid_laws();
    const std::vector<double> x{0.3, -1.2, 2.0, 0.7};
    const auto decreasing = [](double v) { return 1.0 / (1.0 + std::exp(v)); };
    EXPECT_THROW(run_gof_test(x, decreasing, l.ks, l.cm), DataError);
    EXPECT_THROW(run_gof_test(std::vector<double>{1.0}, [](double) { return 0.5; }, l.ks, l.cm), DataError);
    EXPECT_THROW(run_gof_test(x, [](double) { return 0.5; }, l.cm, l.ks), DomainError);
    // A constant series is a single jump of the empirical CDF.
    const std::vector<double> c(25, 0.0);
    const auto res = run_gof_test(c, [](double v) { return 0.5 * std::erfc(-v / std::numbers::sqrt2); }, l.ks, l.cm);
    EXPECT_NEAR(res.ks_stat, 5.0 * 0.5, 1e-12);
    EXPECT_LT(res.ks_p, 0.01);
}

TEST(DominantMode, SingleModeWidthAndLimits) {
    const Spectrum s = single_mode(0.2);
    EXPECT_NEAR(dominant_mode_width(s), std::sqrt(0.2) * s.eigenvectors.col(0).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(dominant_mode_cdf(StatisticKind::KS, s, 50.0), 1.0, 1e-15);
    EXPECT_NEAR(dominant_mode_cdf(StatisticKind::CM, s, 50.0), 1.0, 1e-15);
    EXPECT_EQ(dominant_mode_cdf(StatisticKind::CM, s, 0.0), 0.0);
    // CM of a single mode is lambda z^2: P = erf(sqrt(k / (2 lambda))).
    EXPECT_NEAR(dominant_mode_cdf(StatisticKind::CM, s, 0.2), std::erf(std::sqrt(0.5)), 1e-15);
}

TEST(DominantMode, StronglyDependentKernel) {
    // KS >= |y(u*)|, so the erf law bounds the CDF from above; the gap closes
    // in the upper tail and as the dominant mode grows.
    const QuantileGrid g(100);
    double median_gap[2];
    int idx = 0;
    for (double strength : {135.0, 1350.0}) {
        const Spectrum s = eigendecompose(build_kernel_expansion({strength / 2.0, 0.0, 0.0}, g));
        const auto l = simulate_statistic_distribution(s, 100'000, 13);
        for (double u = 0.5; u < 0.995; u += 0.05) {
            const double k = l.ks.quantile(u);
            EXPECT_GE(dominant_mode_cdf(StatisticKind::KS, s, k), l.ks.cdf(k) - 0.005) << u;
        }
        for (double u : {0.975, 0.99, 0.999}) {
            const double k = l.ks.quantile(u);
            EXPECT_NEAR(dominant_mode_cdf(StatisticKind::KS, s, k), l.ks.cdf(k), 0.02) << u;
        }
        for (double u : {0.8, 0.9, 0.95, 0.99}) {
            const double k = l.cm.quantile(u);
            EXPECT_NEAR(dominant_mode_cdf(StatisticKind::CM, s, k), l.cm.cdf(k), 0.02) << u;
        }
        const double k50 = l.ks.quantile(0.5);
        median_gap[idx++] = dominant_mode_cdf(StatisticKind::KS, s, k50) - l.ks.cdf(k50);
    }
    EXPECT_LT(median_gap[1], 0.5 * median_gap[0]);
}

TEST(ReductionRatio, IdentityAndErrors) {
    const auto& l = iid_laws();
    for (double u : {0.1, 0.5, 0.95}) EXPECT_DOUBLE_EQ(reduction_ratio(l.ks, l.ks, u), 1.0);
    EXPECT_THROW(reduction_ratio(l.ks, l.cm, 0.5), DomainError);
    StatisticDistribution empty;
    EXPECT_THROW(reduction_ratio(empty, l.ks, 0.5), DataError);
}

TEST(Kolmogorov, SurvivalFunction) {
    for (double k : {0.3, 0.5, 0.8, 0.999, 1.0, 1.358, 2.0}) EXPECT_NEAR(1.0 - kolmogorov_survival(k), kolmogorov_cdf(k), 1e-12) << k;
    EXPECT_NEAR(kolmogorov_cdf(0.5), 0.0361, 1e-4);
    EXPECT_NEAR(kolmogorov_survival(1.358), 0.05, 5e-4);
    EXPECT_EQ(kolmogorov_survival(0.0), 1.0);
}

TEST(Kolmogorov, UniformityTest) {
    std::vector<double> even;
    for (int i = 0; i < 200; ++i) even.push_back((i + 0.5) / 200.0);
    const auto u = uniformity_ks_test(even);
    EXPECT_NEAR(u.d, 0.5 / 200.0, 1e-15);
    EXPECT_GT(u.p_value, 0.999);
    std::vector<double> low(200, 0.01);
    EXPECT_LT(uniformity_ks_test(low).p_value, 1e-10);
    EXPECT_THROW(uniformity_ks_test({1.5}), DomainError);
}
