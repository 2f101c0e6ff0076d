#include "depgof/limit_law.hpp"

#include "depgof/errors.hpp"
#include "depgof/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

namespace depgof {

const char* to_string(StatisticKind kind) { return kind == StatisticKind::KS ? "ks" : "cm"; }
const char* to_string(SupMode mode) { return mode == SupMode::Grid ? "grid" : "bridge"; }

double StatisticDistribution::quantile(double u) const {
    if (samples.empty()) throw DataError("quantile of an empty distribution");
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
    const auto n = samples.size();
    auto idx = static_cast<std::ptrdiff_t>(std::ceil(u * static_cast<double>(n))) - 1;
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(n) - 1);
    return samples[static_cast<std::size_t>(idx)];
}

double StatisticDistribution::cdf(double k) const {
    if (samples.empty()) throw DataError("cdf of an empty distribution");
    const auto it = std::upper_bound(samples.begin(), samples.end(), k);
    return static_cast<double>(it - samples.begin()) / static_cast<double>(samples.size());
}

unsigned default_thread_count() {
    if (const char* env = std::getenv("DEPGOF_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

Eigen::MatrixXd scaled_modes(const Spectrum& s) {
    Eigen::MatrixXd l = s.eigenvectors;
    for (Eigen::Index j = 0; j < l.cols(); ++j) l.col(j) *= std::sqrt(std::max(0.0, s.eigenvalues(j)));
    return l;
}

// Brownian-bridge variance D*h of each of the M+1 intervals between
// 0, u_1, ..., u_M, 1 (the process is pinned to zero at both ends).
std::vector<double> interval_variances(const Spectrum& s) {
    const Eigen::MatrixXd h = s.reconstruct();
    const auto m = h.rows();
    const double scale = 1.0 - s.grid.weight();
    std::vector<double> dh(static_cast<std::size_t>(m) + 1);
    dh[0] = h(0, 0) / scale;
    for (Eigen::Index i = 0; i + 1 < m; ++i) dh[static_cast<std::size_t>(i) + 1] = (h(i, i) + h(i + 1, i + 1) - 2.0 * h(i, i + 1)) / scale;
    dh[static_cast<std::size_t>(m)] = h(m - 1, m - 1) / scale;
    for (double& v : dh) v = std::max(0.0, v);
    return dh;
}

// Largest excursion above `level` of a bridge from a to b with variance dh,
// or `level` itself when exceeding it has probability below e^-50.
double bridge_max_above(double a, double b, double dh, double level, SplitMix64& rng) {
    if (dh <= 0.0) return std::max(a, b);
    const double exponent = 2.0 * (level - a) * (level - b) / dh;
    if (level > std::max(a, b) && exponent > 50.0) return level;
    const double e = -std::log(rng.uniform_open());
    return 0.5 * (a + b + std::sqrt((a - b) * (a - b) + 2.0 * dh * e));
}

}  // namespace

Eigen::VectorXd sample_limit_process(const Spectrum& spectrum, std::uint64_t seed) {
    SplitMix64 rng(derive_seed(seed, 0));
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(static_cast<Eigen::Index>(spectrum.modes()));
    for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = normal(rng);
    return scaled_modes(spectrum) * z;
}

LimitLaws simulate_statistic_distribution(const Spectrum& spectrum, std::size_t n_trials, std::uint64_t seed,
                                          const LawOptions& options) {
    if (n_trials == 0) throw DomainError("n_trials must be positive");
    if (spectrum.modes() == 0) throw DomainError("spectrum has no modes");
    if (n_trials < 10'000) {
        std::clog << "depgof: warning: " << n_trials << " trials is below 10^4; tail quantiles are unreliable\n";
    }
    const Eigen::MatrixXd l = scaled_modes(spectrum);
    const std::vector<double> dh = options.sup_mode == SupMode::Bridge ? interval_variances(spectrum) : std::vector<double>{};
    const double w = spectrum.grid.weight();
    const auto m = l.rows();
    const auto k = l.cols();
    const std::size_t block = std::max<std::size_t>(1, options.block);
    const std::size_t n_blocks = (n_trials + block - 1) / block;

    std::vector<double> ks(n_trials);
    std::vector<double> cm(n_trials);

    auto run_block = [&](std::size_t b, Eigen::MatrixXd& z, Eigen::MatrixXd& y, std::vector<SplitMix64>& rngs) {
        const std::size_t first = b * block;
        const std::size_t count = std::min(block, n_trials - first);
        z.resize(k, static_cast<Eigen::Index>(count));
        rngs.clear();
        for (std::size_t c = 0; c < count; ++c) {
            rngs.emplace_back(derive_seed(seed, first + c));
            std::normal_distribution<double> normal;
            for (Eigen::Index j = 0; j < k; ++j) z(j, static_cast<Eigen::Index>(c)) = normal(rngs.back());
        }
        y.noalias() = l * z;
        for (std::size_t c = 0; c < count; ++c) {
            const auto col = y.col(static_cast<Eigen::Index>(c));
            cm[first + c] = col.squaredNorm() * w;
            double sup = col.cwiseAbs().maxCoeff();
            if (!dh.empty()) {
                const double grid_sup = sup;
                for (Eigen::Index i = 0; i <= m; ++i) {
                    const double a = i == 0 ? 0.0 : col(i - 1);
                    const double e = i == m ? 0.0 : col(i);
                    const double v = dh[static_cast<std::size_t>(i)];
                    sup = std::max(sup, bridge_max_above(a, e, v, grid_sup, rngs[c]));
                    sup = std::max(sup, bridge_max_above(-a, -e, v, grid_sup, rngs[c]));
                }
            }
            ks[first + c] = sup;
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads ? options.threads : default_thread_count(),
                                                              static_cast<unsigned>(n_blocks)));
    if (threads == 1) {
        Eigen::MatrixXd z, y;
        std::vector<SplitMix64> rngs;
        for (std::size_t b = 0; b < n_blocks; ++b) run_block(b, z, y, rngs);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    Eigen::MatrixXd z, y;
                    std::vector<SplitMix64> rngs;
                    for (std::size_t b = t; b < n_blocks; b += threads) run_block(b, z, y, rngs);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    std::sort(ks.begin(), ks.end());
    std::sort(cm.begin(), cm.end());
    const std::string digest = spectrum.digest();
    const std::size_t grid_m = spectrum.grid.size();
    return {StatisticDistribution{StatisticKind::KS, std::move(ks), digest, grid_m, options.sup_mode},
            StatisticDistribution{StatisticKind::CM, std::move(cm), digest, grid_m, options.sup_mode}};
}

double p_value(double stat, const StatisticDistribution& dist) {
    if (dist.samples.empty()) throw DataError("p-value against an empty distribution");
    const auto it = std::lower_bound(dist.samples.begin(), dist.samples.end(), stat);
    const auto above = static_cast<double>(dist.samples.end() - it);
    return (above + 1.0) / (static_cast<double>(dist.samples.size()) + 1.0);
}

GofStatistics gof_statistics(std::span<const double> series, const std::function<double(double)>& target_cdf,
                             const QuantileGrid& grid, SupMode mode) {
    validate_series(series, 2);
    std::vector<double> x(series.begin(), series.end());
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = target_cdf(x[i]);
        if (!std::isfinite(z[i]) || z[i] < 0.0 || z[i] > 1.0) throw DataError("target CDF returned a value outside [0, 1]");
        if (i > 0 && z[i] < z[i - 1] - 1e-12) throw DataError("target CDF is not monotone on the sample range");
        if (i > 0) z[i] = std::max(z[i], z[i - 1]);
    }
    const double nd = static_cast<double>(n);
    const double root_n = std::sqrt(nd);

    GofStatistics out;
    out.n = n;
    double grid_sup = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double u = grid[i];
        const auto count = static_cast<double>(std::upper_bound(z.begin(), z.end(), u) - z.begin());
        const double y = root_n * (count / nd - u);
        out.cm += y * y;
        grid_sup = std::max(grid_sup, std::abs(y));
    }
    out.cm *= grid.weight();
    if (mode == SupMode::Grid) {
        out.ks = grid_sup;
    } else {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d = std::max({d, static_cast<double>(i + 1) / nd - z[i], z[i] - static_cast<double>(i) / nd});
        }
        out.ks = root_n * d;
    }
    return out;
}

GofResult run_gof_test(std::span<const double> series, const std::function<double(double)>& target_cdf,
                       const StatisticDistribution& dist_ks, const StatisticDistribution& dist_cm) {
    if (dist_ks.kind != StatisticKind::KS || dist_cm.kind != StatisticKind::CM) {
        throw DomainError("run_gof_test expects a KS and a CM distribution");
    }
    if (dist_ks.samples.empty() || dist_cm.samples.empty()) throw DataError("empty limit distribution");
    if (dist_ks.grid_m != dist_cm.grid_m) throw DomainError("KS and CM distributions use different grids");
    const GofStatistics s = gof_statistics(series, target_cdf, QuantileGrid(dist_cm.grid_m), dist_ks.sup_mode);
    return {s.ks, s.cm, p_value(s.ks, dist_ks), p_value(s.cm, dist_cm), s.n};
}

double dominant_mode_width(const Spectrum& spectrum) {
    if (spectrum.modes() == 0 || !(spectrum.eigenvalues(0) > 0.0)) throw DomainError("spectrum needs lambda_0 > 0");
    Eigen::Index star = 0;
    spectrum.eigenvectors.col(0).cwiseAbs().maxCoeff(&star);
    double kappa2 = 0.0;
    for (Eigen::Index j = 0; j < spectrum.eigenvalues.size(); ++j) {
        const double u = spectrum.eigenvectors(star, j);
        kappa2 += std::max(0.0, spectrum.eigenvalues(j)) * u * u;
    }
    return std::sqrt(kappa2);
}

double dominant_mode_cdf(StatisticKind kind, const Spectrum& spectrum, double k) {
    if (spectrum.modes() == 0 || !(spectrum.eigenvalues(0) > 0.0)) throw DomainError("spectrum needs lambda_0 > 0");
    if (!(k > 0.0)) return 0.0;
    if (kind == StatisticKind::KS) return std::erf(k / (std::numbers::sqrt2 * dominant_mode_width(spectrum)));
    return std::erf(std::sqrt(k / (2.0 * spectrum.eigenvalues(0))));
}

double reduction_ratio(const StatisticDistribution& dep, const StatisticDistribution& iid, double u) {
    if (dep.kind != iid.kind) throw DomainError("reduction ratio needs distributions of the same statistic");
    if (dep.samples.empty() || iid.samples.empty()) throw DataError("reduction ratio of an empty distribution");
    const double base = iid.quantile(u);
    if (!(base > 0.0)) throw NumericalError("reference quantile is zero");
    return dep.quantile(u) / base;
}

double kolmogorov_survival(double x) {
    if (!(x > 0.0)) return 1.0;
    if (x < 1.0) {
        // Jacobi theta form of the CDF, fast for small x.
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double sum = 0.0;
        for (int j = 1; j <= 20; ++j) {
            const double odd = 2.0 * j - 1.0;
            const double term = std::exp(-odd * odd * pi2 / (8.0 * x * x));
            sum += term;
            if (term < 1e-18 * sum) break;
        }
        return 1.0 - std::sqrt(2.0 * std::numbers::pi) / x * sum;
    }
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * x * x);
        sum += (j % 2 ? term : -term);
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

UniformityTest uniformity_ks_test(std::vector<double> values) {
    if (values.empty()) throw DataError("uniformity test needs at least one value");
    std::sort(values.begin(), values.end());
    if (values.front() < 0.0 || values.back() > 1.0) throw DomainError("uniformity test values must lie in [0, 1]");
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        d = std::max({d, static_cast<double>(i + 1) / n - values[i], values[i] - static_cast<double>(i) / n});
    }
    const double rn = std::sqrt(n);
    return {d, kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d)};
}

}  // namespace depgof
