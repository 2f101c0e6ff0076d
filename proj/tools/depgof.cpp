#include "depgof/copula_estimation.hpp"
#include "depgof/errors.hpp"
#include "depgof/io.hpp"
#include "depgof/kernel_spectrum.hpp"
#include "depgof/limit_law.hpp"
#include "depgof/pipeline.hpp"
#include "depgof/sampling_models.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

using namespace depgof;

namespace {

struct ModelArgs {
    std::string model = "ar1";
    double g = 0.88;
    double sigma2 = 0.05;
    double nu = 0.4;
    double s = 0.5;
    std::size_t n = 2500;

    void attach(CLI::App* app) {
        app->add_option("--model", model, "ar1, fgn or iid")->check(CLI::IsMember({"ar1", "fgn", "iid"}));
        app->add_option("--g", g, "AR(1) persistence");
        app->add_option("--sigma2", sigma2, "log-vol innovation variance (ar1) or variance (fgn)");
        app->add_option("--nu", nu, "FGN decay exponent");
        app->add_option("--s", s, "vol-of-vol of the iid model");
        app->add_option("--n", n, "series length");
    }

    PipelineConfig config() const {
        PipelineConfig c;
        c.model = parse_model_kind(model);
        c.g = g;
        c.sigma2 = sigma2;
        c.nu = nu;
        c.s = s;
        c.n = n;
        return c;
    }
};

SupMode parse_sup(const std::string& s) { return s == "grid" ? SupMode::Grid : SupMode::Bridge; }

void print_uniformity(const char* label, const UniformityTest& u) {
    std::cout << label << ": D = " << u.d << ", uniformity p = " << u.p_value << "\n";
}

void print_summary(const PipelineSummary& s) {
    if (!s.report.naive.empty() && s.report.naive.size() > 1) {
        print_uniformity("naive KS p-values", s.report.naive_ks);
        print_uniformity("naive CM p-values", s.report.naive_cm);
        print_uniformity("corrected KS p-values", s.report.corrected_ks);
        print_uniformity("corrected CM p-values", s.report.corrected_cm);
    }
    std::cout << "95% reduction ratio: KS " << reduction_ratio(s.corrected.ks, s.naive.ks, 0.95) << ", CM "
              << reduction_ratio(s.corrected.cm, s.naive.cm, 0.95) << "\n";
    for (const auto& a : s.artifacts) std::cout << "wrote " << a << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Goodness-of-fit tests for dependent observations"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "simulate synthetic return series to CSV");
    ModelArgs gen_model;
    gen_model.attach(gen);
    std::size_t gen_count = 1;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--count", gen_count, "number of series (columns)");
    gen->add_option("--seed", gen_seed, "master seed")->required();
    gen->add_option("--out", gen_out, "output CSV")->required();

    // estimate
    auto* est = app.add_subcommand("estimate", "self-copulas, Psi and lag fits from a CSV panel");
    std::string est_input, est_out = "depgof_estimate";
    std::size_t est_m = 100, est_tmax = 512;
    std::vector<std::size_t> est_lags{1, 10, 100};
    est->add_option("--input", est_input, "CSV panel")->required();
    est->add_option("--grid-m", est_m, "grid size");
    est->add_option("--t-max", est_tmax, "largest lag");
    est->add_option("--save-lags", est_lags, "lags whose copulas are written");
    est->add_option("--out-dir", est_out, "output directory");

    // kernel
    auto* ker = app.add_subcommand("kernel", "kernel and spectrum from Psi or from a model");
    ModelArgs ker_model;
    ker_model.attach(ker);
    std::string ker_psi, ker_out = "depgof_kernel", ker_basis = "matched";
    std::size_t ker_m = 100;
    ker->add_option("--psi", ker_psi, "Psi artifact from 'estimate' (overrides --model)");
    ker->add_option("--grid-m", ker_m, "grid size for model kernels");
    ker->add_option("--basis", ker_basis, "reference or matched log-normal basis")->check(CLI::IsMember({"reference", "matched"}));
    ker->add_option("--out-dir", ker_out, "output directory");

    // law
    auto* law = app.add_subcommand("law", "Monte-Carlo KS and CM limit laws from a spectrum");
    std::string law_spec, law_out = "depgof_law", law_sup = "bridge";
    std::size_t law_trials = 100'000;
    std::uint64_t law_seed = 0;
    law->add_option("--spectrum", law_spec, "spectrum artifact (default: the iid bridge on --grid-m)");
    std::size_t law_m = 100;
    law->add_option("--grid-m", law_m, "grid size when no spectrum is given");
    law->add_option("--trials", law_trials, "number of Monte-Carlo trials");
    law->add_option("--seed", law_seed, "master seed")->required();
    law->add_option("--sup", law_sup, "KS sup mode")->check(CLI::IsMember({"grid", "bridge"}));
    law->add_option("--out-dir", law_out, "output directory");

    // test
    auto* tst = app.add_subcommand("test", "KS and CM tests of each CSV column against a log-normal target");
    std::string tst_input, tst_ks, tst_cm, tst_out = "results.jsonl";
    double tst_s2 = -1.0;
    bool tst_standardize = true;
    tst->add_option("--input", tst_input, "CSV panel")->required();
    tst->add_option("--law-ks", tst_ks, "KS law artifact")->required();
    tst->add_option("--law-cm", tst_cm, "CM law artifact")->required();
    tst->add_option("--s2", tst_s2, "target vol-of-vol s^2 (default: calibrated per column)");
    tst->add_flag("!--raw", tst_standardize, "do not standardize columns");
    tst->add_option("--out", tst_out, "JSON-lines results");

    // run
    auto* run = app.add_subcommand("run", "full pipeline from a key=value config");
    std::string run_config;
    run->add_option("--config", run_config, "config file")->required();

    // reproduce
    auto* rep = app.add_subcommand("reproduce", "synthetic AR(1) (fig2) or FGN (fig3) experiment");
    std::string rep_which, rep_out;
    std::uint64_t rep_seed = 20100101;
    std::size_t rep_trials = 100'000, rep_repl = 350;
    rep->add_option("which", rep_which, "fig2 or fig3")->required()->check(CLI::IsMember({"fig2", "fig3"}));
    rep->add_option("--seed", rep_seed, "master seed");
    rep->add_option("--trials", rep_trials, "Monte-Carlo trials per law");
    rep->add_option("--replications", rep_repl, "number of synthetic series");
    rep->add_option("--out-dir", rep_out, "output directory (default: fig2 or fig3)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) {
            PipelineConfig c = gen_model.config();
            c.seed = gen_seed;
            c.replications = gen_count;
            PanelData panel;
            std::unique_ptr<FgnGenerator> fgn;
            if (c.model == ModelKind::Fgn) fgn = std::make_unique<FgnGenerator>(FgnLogVolParams{c.nu, c.sigma2}, c.n);
            for (std::size_t i = 0; i < gen_count; ++i) {
                panel.names.push_back("series_" + std::to_string(i + 1));
                panel.columns.push_back(generate_replication(c, i));
            }
            write_panel_csv(gen_out, panel);
            std::cout << "wrote " << gen_out << "\n";
        } else if (*est) {
            if (est_m < 10) throw ConfigError("grid-m must be at least 10");
            const PanelData panel = standardize(ingest_csv(est_input));
            const QuantileGrid grid(est_m);
            const std::size_t t_max = std::min(est_tmax, default_t_max(panel.length()));
            const auto copulas = average_self_copulas(panel.columns, t_max, grid, default_thread_count());
            const std::filesystem::path dir = est_out;
            for (std::size_t lag : est_lags) {
                if (lag >= 1 && lag <= t_max) {
                    write_matrix_csv(dir / ("copula_lag" + std::to_string(lag) + ".csv"), {"copula", est_m, lag, copulas[lag - 1].values});
                }
            }
            const PsiSurface psi = psi_accumulate(copulas, panel.length());
            write_matrix_csv(dir / "psi.csv", {"psi", est_m, t_max, psi.values});
            std::ofstream f(dir / "fits.csv", std::ios::binary);
            f << "lag,alpha,beta,rho,residual_rms\n";
            for (const auto& c : copulas) {
                const auto l = fit_lag_coefficients(c);
                f << l.t << "," << l.alpha << "," << l.beta << "," << l.rho << "," << l.residual_rms << "\n";
            }
            std::cout << "wrote " << (dir / "psi.csv").string() << " (t_max=" << t_max << ")\n";
        } else if (*ker) {
            KernelMatrix k;
            if (!ker_psi.empty()) {
                const MatrixArtifact a = read_matrix_csv(ker_psi);
                if (a.kind != "psi") throw DataError(ker_psi + ": expected a psi artifact");
                k = build_kernel_from_psi(PsiSurface{QuantileGrid(a.m), a.values, 0, a.lag});
            } else {
                PipelineConfig c = ker_model.config();
                c.grid_m = ker_m;
                c.basis = ker_basis == "reference" ? BasisChoice::Reference : BasisChoice::Matched;
                c.seed = 0;
                c.validate();
                k = model_kernel(c);
            }
            const Spectrum s = eigendecompose(k);
            const std::filesystem::path dir = ker_out;
            write_matrix_csv(dir / "kernel.csv", {"kernel", k.grid.size(), 0, k.values});
            write_spectrum_csv(dir / "spectrum.csv", s);
            const CmMoments mom = cm_moments(k);
            std::cout << "lambda_0 = " << s.eigenvalues(0) << ", CM mean = " << mom.mean << ", CM variance = " << mom.variance
                      << "\nwrote " << (dir / "spectrum.csv").string() << "\n";
        } else if (*law) {
            if (law_trials < 1000) throw ConfigError("trials must be at least 1000");
            const Spectrum s = law_spec.empty() ? eigendecompose(brownian_bridge_kernel(QuantileGrid(law_m)))
                                                : read_spectrum_csv(law_spec);
            LawOptions o;
            o.sup_mode = parse_sup(law_sup);
            const LimitLaws laws = simulate_statistic_distribution(s, law_trials, law_seed, o);
            const std::filesystem::path dir = law_out;
            write_distribution_csv(dir / "law_ks.csv", laws.ks);
            write_distribution_csv(dir / "law_cm.csv", laws.cm);
            std::cout << "KS 95% = " << laws.ks.quantile(0.95) << ", CM 95% = " << laws.cm.quantile(0.95) << "\nwrote "
                      << (dir / "law_ks.csv").string() << ", " << (dir / "law_cm.csv").string() << "\n";
        } else if (*tst) {
            PanelData panel = ingest_csv(tst_input);
            if (tst_standardize) panel = standardize(panel);
            const StatisticDistribution ks = read_distribution_csv(tst_ks);
            const StatisticDistribution cm = read_distribution_csv(tst_cm);
            std::vector<GofRecord> records;
            for (std::size_t c = 0; c < panel.columns.size(); ++c) {
                double s2 = tst_s2 >= 0.0 ? tst_s2 : std::max(0.0, calibrate_volvol(panel.columns[c]).s2);
                const LognormalVolModel target(s2, -s2);
                records.push_back({panel.names[c], run_gof_test(panel.columns[c], [&](double x) { return target.cdf(x); }, ks, cm)});
                const auto& r = records.back().result;
                std::cout << panel.names[c] << ": KS " << r.ks_stat << " (p " << r.ks_p << "), CM " << r.cm_stat << " (p "
                          << r.cm_p << ")\n";
            }
            write_results_jsonl(tst_out, records);
        } else if (*run) {
            print_summary(run_pipeline(load_config(run_config)));
        } else if (*rep) {
            PipelineConfig c = rep_which == "fig2" ? fig2_config(rep_seed) : fig3_config(rep_seed);
            c.n_trials = rep_trials;
            c.replications = rep_repl;
            if (!rep_out.empty()) c.output_dir = rep_out;
            print_summary(run_pipeline(c));
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
