#include "depgof/errors.hpp"
#include "depgof/pipeline.hpp"
#include "depgof/random.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace depgof;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

PipelineConfig small_config(ModelKind model, const fs::path& out) {
    PipelineConfig c;
    c.model = model;
    c.grid_m = 20;
    c.n_trials = 5000;
    c.n = 400;
    c.replications = 20;
    c.seed = 99;
    c.output_dir = out;
    return c;
}

}  // namespace

TEST(Pipeline, ModelMarginalsAndKernels) {
    PipelineConfig c = small_config(ModelKind::Ar1, "unused");
    const auto m = model_marginal(c);
    EXPECT_NEAR(m.logvol_variance(), 0.05 / (1 - 0.88 * 0.88), 1e-15);
    EXPECT_NEAR(m.log_shift(), -m.logvol_variance(), 1e-15);
    c.model = ModelKind::Iid;
    EXPECT_EQ(model_kernel(c).values, brownian_bridge_kernel(QuantileGrid(20)).values);
    c.model = ModelKind::Empirical;
    EXPECT_THROW(model_kernel(c), ConfigError);
}

TEST(Pipeline, ReplicationsAreDeterministic) {
    PipelineConfig c = small_config(ModelKind::Ar1, "unused");
    EXPECT_EQ(generate_replication(c, 3), generate_replication(c, 3));
    EXPECT_NE(generate_replication(c, 3), generate_replication(c, 4));
}

TEST(Pipeline, ParametricRunIsIdempotent) {
    const fs::path base = fs::temp_directory_path() / "depgof_pipeline_test";
    fs::remove_all(base);
    const auto a = run_pipeline(small_config(ModelKind::Ar1, base / "a"));
    const auto b = run_pipeline(small_config(ModelKind::Ar1, base / "b"));
    ASSERT_EQ(a.artifacts.size(), b.artifacts.size());
    for (const char* f : {"kernel.csv", "spectrum.csv", "law_naive_ks.csv", "law_corrected_cm.csv", "results_naive.jsonl",
                          "results_corrected.jsonl", "pvalue_histogram.csv", "summary.json"}) {
        ASSERT_TRUE(fs::exists(base / "a" / f)) << f;
        EXPECT_EQ(slurp(base / "a" / f), slurp(base / "b" / f)) << f;
    }
    EXPECT_EQ(a.report.naive.size(), 20u);
    const auto back = read_results_jsonl(base / "a" / "results_corrected.jsonl");
    EXPECT_EQ(back.size(), 20u);
    EXPECT_DOUBLE_EQ(back[4].result.cm_p, a.report.corrected[4].result.cm_p);
    fs::remove_all(base);
}

TEST(Pipeline, IidModelLawsCoincide) {
    const fs::path out = fs::temp_directory_path() / "depgof_pipeline_iid";
    PipelineConfig c = small_config(ModelKind::Iid, out);
    c.n_trials = 40'000;
    const auto s = run_pipeline(c);
    for (double u : {0.5, 0.9, 0.95}) {
        EXPECT_NEAR(s.corrected.ks.quantile(u) / s.naive.ks.quantile(u), 1.0, 0.02);
        EXPECT_NEAR(s.corrected.cm.quantile(u) / s.naive.cm.quantile(u), 1.0, 0.03);
    }
    fs::remove_all(out);
}

TEST(Pipeline, EmpiricalRunOnGeneratedPanel) {
    const fs::path out = fs::temp_directory_path() / "depgof_pipeline_emp";
    fs::remove_all(out);
    fs::create_directories(out);
    PanelData panel;
    for (std::size_t k = 0; k < 4; ++k) {
        panel.names.push_back("S" + std::to_string(k));
        panel.columns.push_back(gen_ar1_logvol({0.9, 0.02}, 1500, derive_seed(5, k)).values);
    }
    write_panel_csv(out / "panel.csv", panel);
    PipelineConfig c = small_config(ModelKind::Empirical, out / "run");
    c.input = out / "panel.csv";
    c.t_max = 30;
    c.save_lags = {1, 5, 100};
    const auto s = run_pipeline(c);
    EXPECT_TRUE(fs::exists(out / "run" / "copula_lag1.csv"));
    EXPECT_TRUE(fs::exists(out / "run" / "copula_lag5.csv"));
    EXPECT_FALSE(fs::exists(out / "run" / "copula_lag100.csv"));
    EXPECT_TRUE(fs::exists(out / "run" / "psi.csv"));
    EXPECT_TRUE(fs::exists(out / "run" / "fits.csv"));
    const auto psi = read_matrix_csv(out / "run" / "psi.csv");
    EXPECT_EQ(psi.kind, "psi");
    EXPECT_EQ(psi.lag, 30u);
    ASSERT_EQ(s.report.corrected.size(), 4u);
    EXPECT_EQ(s.report.corrected[2].name, "S2");
    fs::remove_all(out);
}

TEST(Pipeline, ErrorsAreTaggedWithStage) {
    PipelineConfig c = small_config(ModelKind::Empirical, fs::temp_directory_path() / "depgof_pipeline_err");
    c.input = "/nonexistent/panel.csv";
    try {
        run_pipeline(c);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_EQ(std::string(e.what()).rfind("ingest: ", 0), 0u) << e.what();
    }
    fs::remove_all(c.output_dir);
}
