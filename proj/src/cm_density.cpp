#include "depgof/cm_density.hpp"

#include "depgof/errors.hpp"
#include "depgof/perturbation.hpp"
#include "depgof/random.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

namespace depgof {

namespace {

double interpolate(const std::vector<double>& table, double step, double k) {
    if (!(k >= 0.0)) return 0.0;
    const double x = k / step;
    const auto i = static_cast<std::size_t>(x);
    if (i + 1 >= table.size()) return i + 1 == table.size() ? table.back() : 0.0;
    const double f = x - static_cast<double>(i);
    return (1.0 - f) * table[i] + f * table[i + 1];
}

}  // namespace

IidCmDensity::IidCmDensity(const Options& o) : step_(o.k_step) {
    if (o.n_trials == 0 || !(o.bandwidth > 0.0) || !(o.k_step > 0.0) || !(o.k_max > o.k_step) || o.explicit_modes == 0) {
        throw DomainError("invalid iid CM density options");
    }
    const double pi2 = std::numbers::pi * std::numbers::pi;
    std::vector<double> lambda(o.explicit_modes);
    for (std::size_t j = 0; j < o.explicit_modes; ++j) {
        lambda[j] = 1.0 / (pi2 * static_cast<double>((j + 1) * (j + 1)));
    }
    // Tail sum_{j>J} lambda_j z_j^2: mean and variance from the closed forms.
    double head_mean = 0.0;
    double head_var = 0.0;
    for (double l : lambda) {
        head_mean += l;
        head_var += 2.0 * l * l;
    }
    const double tail_mean = 1.0 / 6.0 - head_mean;
    const double tail_var = 1.0 / 45.0 - head_var;
    std::gamma_distribution<double> tail(tail_mean * tail_mean / tail_var, tail_var / tail_mean);

    const double hist_step = o.bandwidth / 50.0;
    const auto n_bins = static_cast<std::size_t>(std::ceil((o.k_max + 8.0 * o.bandwidth) / hist_step));
    std::vector<double> hist(n_bins, 0.0);
    SplitMix64 rng(o.seed);
    std::normal_distribution<double> normal;
    for (std::size_t t = 0; t < o.n_trials; ++t) {
        double s = tail(rng);
        for (double l : lambda) {
            const double z = normal(rng);
            s += l * z * z;
        }
        const auto b = static_cast<std::size_t>(s / hist_step);
        if (b < n_bins) hist[b] += 1.0;
    }

    const auto n_points = static_cast<std::size_t>(std::llround(o.k_max / o.k_step)) + 1;
    density_.assign(n_points, 0.0);
    const double norm = 1.0 / (static_cast<double>(o.n_trials) * o.bandwidth * std::sqrt(2.0 * std::numbers::pi));
    const auto reach = static_cast<std::ptrdiff_t>(std::ceil(7.0 * o.bandwidth / hist_step));
    for (std::size_t p = 0; p < n_points; ++p) {
        const double k = static_cast<double>(p) * o.k_step;
        const auto centre = static_cast<std::ptrdiff_t>(k / hist_step);
        double acc = 0.0;
        for (std::ptrdiff_t b = std::max<std::ptrdiff_t>(0, centre - reach);
             b <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n_bins) - 1, centre + reach); ++b) {
            const auto ub = static_cast<std::size_t>(b);
            if (hist[ub] == 0.0) continue;
            const double d = (k - (static_cast<double>(b) + 0.5) * hist_step) / o.bandwidth;
            acc += hist[ub] * std::exp(-0.5 * d * d);
        }
        density_[p] = acc * norm;
    }
}

double IidCmDensity::density(double k) const { return interpolate(density_, step_, k); }

const IidCmDensity& default_iid_cm_density() {
    static const IidCmDensity instance;
    return instance;
}

CmDensityCorrection::CmDensityCorrection(double alpha_bar, double a2, const IidCmDensity& baseline)
    : step_(baseline.k_step()) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double c = 4.0 * pi2 * pi2 * alpha_bar * a2 * a2;
    const double decay = 2.0 * pi2;
    if (!(std::abs(c) < decay)) {
        throw DomainError("alpha_bar too large for the first-order CM density correction");
    }
    const double atom = c / std::sqrt(decay * decay - c * c);
    const auto& base = baseline.values();
    const std::size_t n = base.size();

    std::vector<double> kernel(n);
    for (std::size_t l = 0; l < n; ++l) {
        const double z = static_cast<double>(l) * step_;
        kernel[l] = c * std::exp(-decay * z) * std::cyl_bessel_i(0.0, c * z);
    }
    density_.assign(n, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
        double conv = 0.0;
        if (p > 0) {
            conv = 0.5 * (base[p] * kernel[0] + base[0] * kernel[p]);
            for (std::size_t l = 1; l < p; ++l) conv += base[p - l] * kernel[l];
            conv *= step_;
        }
        density_[p] = (1.0 - atom) * base[p] + conv;
    }
    cdf_.assign(n, 0.0);
    for (std::size_t p = 1; p < n; ++p) cdf_[p] = cdf_[p - 1] + 0.5 * step_ * (density_[p - 1] + density_[p]);
}

double CmDensityCorrection::density(double k) const { return interpolate(density_, step_, k); }

double CmDensityCorrection::cdf(double k) const {
    if (!(k > 0.0)) return 0.0;
    const double top = static_cast<double>(cdf_.size() - 1) * step_;
    if (k >= top) return cdf_.back();
    return interpolate(cdf_, step_, k);
}

double cm_density_correction(double k, double alpha_bar) {
    static std::mutex mutex;
    static std::map<double, std::shared_ptr<const CmDensityCorrection>> cache;
    static const double a2 = compute_mode_overlaps().a2();
    std::shared_ptr<const CmDensityCorrection> entry;
    {
        std::lock_guard lock(mutex);
        auto& slot = cache[alpha_bar];
        if (!slot) slot = std::make_shared<const CmDensityCorrection>(alpha_bar, a2);
        entry = slot;
    }
    return entry->density(k);
}

}  // namespace depgof
