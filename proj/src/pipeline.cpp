#include "depgof/pipeline.hpp"

#include "depgof/copula_estimation.hpp"
#include "depgof/errors.hpp"
#include "depgof/random.hpp"
#include "depgof/sampling_models.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <array>

namespace depgof {

namespace {

constexpr std::uint64_t kSeriesStream = 1;
constexpr std::uint64_t kNaiveLawStream = 2;
constexpr std::uint64_t kCorrectedLawStream = 3;

const LognormalVolModel& basis_model(const PipelineConfig& c) {
    static std::mutex mutex;
    static std::map<std::pair<double, double>, std::unique_ptr<LognormalVolModel>> cache;
    if (c.basis == BasisChoice::Reference) return reference_model();
    const LognormalVolModel marginal = model_marginal(c);
    std::lock_guard lock(mutex);
    auto& slot = cache[{marginal.logvol_variance(), marginal.log_shift()}];
    if (!slot) slot = std::make_unique<LognormalVolModel>(marginal.logvol_variance(), marginal.log_shift());
    return *slot;
}

std::string tagged(const char* stage, const std::exception& e) { return std::string(stage) + ": " + e.what(); }

// Re-throws inner errors with the stage name prefixed, keeping the category.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(tagged(name, e));
    } catch (const DataError& e) {
        throw DataError(tagged(name, e));
    } catch (const NumericalError& e) {
        throw NumericalError(tagged(name, e));
    } catch (const DomainError& e) {
        throw DomainError(tagged(name, e));
    }
}

void write_histogram(const std::filesystem::path& path, const ReplicationReport& r, std::size_t bins) {
    std::vector<std::array<std::size_t, 4>> counts(bins, {0, 0, 0, 0});
    auto bin_of = [bins](double p) { return std::min(bins - 1, static_cast<std::size_t>(p * static_cast<double>(bins))); };
    for (std::size_t i = 0; i < r.naive.size(); ++i) {
        ++counts[bin_of(r.naive[i].result.ks_p)][0];
        ++counts[bin_of(r.naive[i].result.cm_p)][1];
        ++counts[bin_of(r.corrected[i].result.ks_p)][2];
        ++counts[bin_of(r.corrected[i].result.cm_p)][3];
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "bin_lo,bin_hi,naive_ks,naive_cm,corrected_ks,corrected_cm\n";
    for (std::size_t b = 0; b < bins; ++b) {
        out << static_cast<double>(b) / static_cast<double>(bins) << "," << static_cast<double>(b + 1) / static_cast<double>(bins);
        for (auto c : counts[b]) out << "," << c;
        out << "\n";
    }
}

nlohmann::ordered_json uniformity_json(const UniformityTest& u) { return {{"d", u.d}, {"p_value", u.p_value}}; }

std::function<double(double)> column_target(std::span<const double> series) {
    double s2 = calibrate_volvol(series).s2;
    s2 = std::max(0.0, s2);
    auto model = std::make_shared<LognormalVolModel>(s2, -s2);
    return [model](double x) { return model->cdf(x); };
}

}  // namespace

LognormalVolModel model_marginal(const PipelineConfig& c) {
    switch (c.model) {
        case ModelKind::Ar1: {
            const double v = Ar1LogVolParams{c.g, c.sigma2}.stationary_variance();
            return LognormalVolModel(v, -v);
        }
        case ModelKind::Fgn: return LognormalVolModel(c.sigma2, -c.sigma2);
        case ModelKind::Iid: return LognormalVolModel(c.s * c.s, -c.s * c.s);
        case ModelKind::Empirical: break;
    }
    throw ConfigError("the empirical model has no parametric marginal");
}

KernelMatrix model_kernel(const PipelineConfig& c) {
    const QuantileGrid grid(c.grid_m);
    switch (c.model) {
        case ModelKind::Ar1: return build_kernel_ar1({c.g, c.sigma2}, grid, basis_model(c));
        case ModelKind::Fgn: return build_kernel_fgn({c.nu, c.sigma2}, c.n, grid, basis_model(c));
        case ModelKind::Iid: return brownian_bridge_kernel(grid);
        case ModelKind::Empirical: break;
    }
    throw ConfigError("the empirical model has no parametric kernel");
}

ReturnSeries generate_replication(const PipelineConfig& c, std::size_t index) {
    const std::uint64_t seed = derive_seed(derive_seed(c.seed.value(), kSeriesStream), index);
    switch (c.model) {
        case ModelKind::Ar1: return gen_ar1_logvol({c.g, c.sigma2}, c.n, seed).values;
        case ModelKind::Fgn: return gen_fgn_logvol({c.nu, c.sigma2}, c.n, seed).values;
        case ModelKind::Iid: return gen_iid_lognormal_vol({c.s}, c.n, seed);
        case ModelKind::Empirical: break;
    }
    throw ConfigError("the empirical model has no generator");
}

ReplicationReport run_replications(const PipelineConfig& c, const LimitLaws& naive, const LimitLaws& corrected) {
    const LognormalVolModel marginal = model_marginal(c);
    const auto cdf = [&marginal](double x) { return marginal.cdf(x); };
    std::unique_ptr<FgnGenerator> fgn;
    if (c.model == ModelKind::Fgn) fgn = std::make_unique<FgnGenerator>(FgnLogVolParams{c.nu, c.sigma2}, c.n);

    ReplicationReport r;
    std::vector<double> p[4];
    for (std::size_t i = 0; i < c.replications; ++i) {
        const ReturnSeries x = fgn ? fgn->generate(derive_seed(derive_seed(c.seed.value(), kSeriesStream), i)).values
                                   : generate_replication(c, i);
        const std::string name = "series_" + std::to_string(i + 1);
        r.naive.push_back({name, run_gof_test(x, cdf, naive.ks, naive.cm)});
        r.corrected.push_back({name, run_gof_test(x, cdf, corrected.ks, corrected.cm)});
        p[0].push_back(r.naive.back().result.ks_p);
        p[1].push_back(r.naive.back().result.cm_p);
        p[2].push_back(r.corrected.back().result.ks_p);
        p[3].push_back(r.corrected.back().result.cm_p);
    }
    r.naive_ks = uniformity_ks_test(p[0]);
    r.naive_cm = uniformity_ks_test(p[1]);
    r.corrected_ks = uniformity_ks_test(p[2]);
    r.corrected_cm = uniformity_ks_test(p[3]);
    return r;
}

PipelineSummary run_pipeline(const PipelineConfig& config) {
    config.validate();
    const auto& dir = config.output_dir;
    std::filesystem::create_directories(dir);
    const QuantileGrid grid(config.grid_m);
    const std::uint64_t seed = config.seed.value();
    LawOptions law_options;
    law_options.sup_mode = config.sup_mode;

    PipelineSummary out{Spectrum{grid, {}, {}}, {}, {}, {}, {}};
    auto record = [&](const std::filesystem::path& p) { out.artifacts.push_back(p.string()); return p; };
    nlohmann::ordered_json summary;
    summary["model"] = to_string(config.model);

    {
        std::ofstream cfg(record(dir / "config.txt"), std::ios::binary);
        cfg << format_config(config);
    }

    KernelMatrix kernel;
    PanelData panel;
    if (config.model == ModelKind::Empirical) {
        panel = stage("ingest", [&] { return standardize(ingest_csv(config.input)); });
        const std::size_t t_max = std::min(config.t_max, default_t_max(panel.length()));
        if (t_max < 1) throw DataError("estimate: series too short for any lag");
        const auto copulas = stage("estimate", [&] {
            return average_self_copulas(panel.columns, t_max, grid, default_thread_count());
        });
        for (std::size_t lag : config.save_lags) {
            if (lag > t_max) continue;
            const auto& c = copulas[lag - 1];
            write_matrix_csv(record(dir / ("copula_lag" + std::to_string(lag) + ".csv")), {"copula", grid.size(), lag, c.values});
        }
        const PsiSurface psi = stage("estimate", [&] { return psi_accumulate(copulas, panel.length()); });
        write_matrix_csv(record(dir / "psi.csv"), {"psi", grid.size(), t_max, psi.values});

        std::vector<LagCoefficients> fits;
        {
            std::ofstream f(record(dir / "fits.csv"), std::ios::binary);
            f << "lag,alpha,beta,rho,residual_rms,outside_linear_regime\n";
            for (const auto& c : copulas) {
                fits.push_back(stage("fit", [&] { return fit_lag_coefficients(c); }));
                const auto& l = fits.back();
                f << l.t << "," << l.alpha << "," << l.beta << "," << l.rho << "," << l.residual_rms << ","
                  << (l.outside_linear_regime() ? 1 : 0) << "\n";
            }
        }
        if (fits.size() >= 3) {
            const MultifractalFit mf = stage("fit", [&] { return fit_multifractal(fits); });
            summary["multifractal"] = {{"sigma2", mf.sigma2},
                                       {"horizon_T", std::isfinite(mf.horizon_T) ? nlohmann::json(mf.horizon_T) : nlohmann::json()},
                                       {"residual", mf.residual},
                                       {"non_positive", mf.non_positive},
                                       {"extrapolated", mf.extrapolated}};
        }
        kernel = stage("kernel", [&] { return build_kernel_from_psi(psi); });
    } else {
        kernel = stage("kernel", [&] { return model_kernel(config); });
    }
    write_matrix_csv(record(dir / "kernel.csv"), {"kernel", grid.size(), 0, kernel.values});

    out.corrected_spectrum = stage("spectrum", [&] { return eigendecompose(kernel); });
    write_spectrum_csv(record(dir / "spectrum.csv"), out.corrected_spectrum);
    const Spectrum iid_spectrum = eigendecompose(brownian_bridge_kernel(grid));

    out.naive = stage("law", [&] {
        return simulate_statistic_distribution(iid_spectrum, config.n_trials, derive_seed(seed, kNaiveLawStream), law_options);
    });
    out.corrected = stage("law", [&] {
        return simulate_statistic_distribution(out.corrected_spectrum, config.n_trials, derive_seed(seed, kCorrectedLawStream),
                                               law_options);
    });
    write_distribution_csv(record(dir / "law_naive_ks.csv"), out.naive.ks);
    write_distribution_csv(record(dir / "law_naive_cm.csv"), out.naive.cm);
    write_distribution_csv(record(dir / "law_corrected_ks.csv"), out.corrected.ks);
    write_distribution_csv(record(dir / "law_corrected_cm.csv"), out.corrected.cm);
    summary["reduction_ratio_95"] = {{"ks", reduction_ratio(out.corrected.ks, out.naive.ks, 0.95)},
                                     {"cm", reduction_ratio(out.corrected.cm, out.naive.cm, 0.95)}};

    if (config.model == ModelKind::Empirical) {
        for (std::size_t c = 0; c < panel.columns.size(); ++c) {
            const auto target = stage("test", [&] { return column_target(panel.columns[c]); });
            out.report.naive.push_back({panel.names[c], stage("test", [&] {
                                            return run_gof_test(panel.columns[c], target, out.naive.ks, out.naive.cm);
                                        })});
            out.report.corrected.push_back({panel.names[c], stage("test", [&] {
                                                return run_gof_test(panel.columns[c], target, out.corrected.ks, out.corrected.cm);
                                            })});
        }
    } else {
        out.report = stage("test", [&] { return run_replications(config, out.naive, out.corrected); });
        summary["uniformity"] = {{"naive_ks", uniformity_json(out.report.naive_ks)},
                                 {"naive_cm", uniformity_json(out.report.naive_cm)},
                                 {"corrected_ks", uniformity_json(out.report.corrected_ks)},
                                 {"corrected_cm", uniformity_json(out.report.corrected_cm)}};
        write_histogram(record(dir / "pvalue_histogram.csv"), out.report, 20);
    }
    write_results_jsonl(record(dir / "results_naive.jsonl"), out.report.naive);
    write_results_jsonl(record(dir / "results_corrected.jsonl"), out.report.corrected);
    {
        std::ofstream s(record(dir / "summary.json"), std::ios::binary);
        s << summary.dump(2) << "\n";
    }
    return out;
}

PipelineConfig fig2_config(std::uint64_t seed) {
    PipelineConfig c;
    c.model = ModelKind::Ar1;
    c.g = 0.88;
    c.sigma2 = 0.05;
    c.n = 2500;
    c.replications = 350;
    c.seed = seed;
    c.output_dir = "fig2";
    return c;
}

PipelineConfig fig3_config(std::uint64_t seed) {
    PipelineConfig c;
    c.model = ModelKind::Fgn;
    c.nu = 0.4;
    c.sigma2 = 1.0;
    c.n = 1500;
    c.replications = 350;
    c.seed = seed;
    c.output_dir = "fig3";
    return c;
}

}  // namespace depgof
