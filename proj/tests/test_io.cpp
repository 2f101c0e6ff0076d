#include "depgof/copula_estimation.hpp"
#include "depgof/errors.hpp"
#include "depgof/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace depgof;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("depgof_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text) const {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

    fs::path dir_;
};

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, ParsesKeyValueWithComments) {
    std::istringstream in(
        "# experiment\n"
        "model = fgn   # long memory\n"
        "nu=0.4\nsigma2=1\nn=1500\n"
        "seed=17\n\n"
        "grid_m=50\nn_trials=2000\nsup_mode=grid\nbasis=reference\n"
        "save_lags=1,2,5\n");
    const auto c = parse_config(in);
    EXPECT_EQ(c.model, ModelKind::Fgn);
    EXPECT_DOUBLE_EQ(c.nu, 0.4);
    EXPECT_EQ(c.n, 1500u);
    EXPECT_EQ(c.seed, 17u);
    EXPECT_EQ(c.grid_m, 50u);
    EXPECT_EQ(c.sup_mode, SupMode::Grid);
    EXPECT_EQ(c.basis, BasisChoice::Reference);
    EXPECT_EQ(c.save_lags, (std::vector<std::size_t>{1, 2, 5}));

    std::istringstream again(format_config(c));
    const auto d = parse_config(again);
    EXPECT_EQ(format_config(d), format_config(c));
}

TEST(Config, RejectsInvalidInput) {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_config(in);
    };
    EXPECT_THROW(parse("model=ar1\n"), ConfigError);  // no seed
    EXPECT_THROW(parse("seed=1\ngrid_m=5\n"), ConfigError);
    EXPECT_THROW(parse("seed=1\nt_max=0\n"), ConfigError);
    EXPECT_THROW(parse("seed=1\nn_trials=999\n"), ConfigError);
    EXPECT_THROW(parse("seed=1\ncolour=blue\n"), ConfigError);
    EXPECT_THROW(parse("seed=1\nseed=2\n"), ConfigError);
    EXPECT_THROW(parse("seed=1\nmodel=garch\n"), ConfigError);
    EXPECT_THROW(parse("seed=1\ng=1.2\n"), ConfigError);
    EXPECT_THROW(parse("seed=1\nmodel=empirical\n"), ConfigError);
    EXPECT_THROW(parse("seed=x\n"), ConfigError);
    EXPECT_THROW(parse("seed 1\n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/depgof.cfg"), ConfigError);
}

TEST_F(TempDir, IngestWellFormedCsv) {
    const auto p = write("ok.csv", "A,B,C\n1,2,3\n4,5,6\n7,8,9\n-1,0.5,1e-3\n2,2,2\n");
    const auto panel = ingest_csv(p);
    ASSERT_EQ(panel.names, (std::vector<std::string>{"A", "B", "C"}));
    EXPECT_EQ(panel.length(), 5u);
    EXPECT_DOUBLE_EQ(panel.columns[2][3], 1e-3);
}

TEST_F(TempDir, IngestReportsRowAndColumn) {
    const auto blank = write("blank.csv", "A,B,C\n1,2,3\n4,,6\n");
    const std::string msg = error_of([&] { ingest_csv(blank); });
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'B'"), std::string::npos) << msg;

    const auto header = write("header.csv", "A,B\n");
    EXPECT_NE(error_of([&] { ingest_csv(header); }).find("fewer than 2 data rows"), std::string::npos);
    EXPECT_THROW(ingest_csv(write("ragged.csv", "A,B\n1,2\n3\n")), DataError);
    EXPECT_THROW(ingest_csv(write("text.csv", "A,B\n1,2\n3,x\n")), DataError);
    EXPECT_THROW(ingest_csv(write("dup.csv", "A,A\n1,2\n3,4\n")), DataError);
    EXPECT_THROW(ingest_csv(dir_ / "missing.csv"), DataError);
}

TEST(Standardize, MeanZeroUnitVariance) {
    PanelData p{{"a", "b"}, {{1.0, 2.0, 3.0}, {10.0, -4.0, 7.0}}};
    const auto s = standardize(p);
    EXPECT_NEAR(s.columns[0][0], -1.0, 1e-15);
    EXPECT_NEAR(s.columns[0][1], 0.0, 1e-15);
    EXPECT_NEAR(s.columns[0][2], 1.0, 1e-15);
    const auto twice = standardize(s);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(twice.columns[c][i], s.columns[c][i], 1e-12);
    EXPECT_THROW(standardize(PanelData{{"c"}, {{2.0, 2.0, 2.0}}}), DataError);
}

TEST(Standardize, CopulaIsInvariant) {
    std::vector<double> x(300);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.37 * i) * (1.0 + 0.5 * std::cos(0.011 * i)) + 3.0;
    PanelData p{{"x"}, {x}};
    const auto s = standardize(p);
    const QuantileGrid g(20);
    EXPECT_EQ(self_copula_at_lag(x, 2, g).values, self_copula_at_lag(s.columns[0], 2, g).values);
}

TEST_F(TempDir, MatrixAndSpectrumRoundTrip) {
    const QuantileGrid g(12);
    const Spectrum s = eigendecompose(brownian_bridge_kernel(g));
    const MatrixArtifact a{"kernel", 12, 3, brownian_bridge_kernel(g).values};
    write_matrix_csv(dir_ / "k.csv", a);
    const auto b = read_matrix_csv(dir_ / "k.csv");
    EXPECT_EQ(b.kind, "kernel");
    EXPECT_EQ(b.m, 12u);
    EXPECT_EQ(b.lag, 3u);
    EXPECT_EQ(b.values, a.values);
    std::ifstream in(dir_ / "k.csv");
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first, "# depgof kernel m=12 lag=3");

    write_spectrum_csv(dir_ / "s.csv", s);
    const Spectrum t = read_spectrum_csv(dir_ / "s.csv");
    EXPECT_EQ(t.eigenvalues, s.eigenvalues);
    EXPECT_EQ(t.eigenvectors, s.eigenvectors);
    EXPECT_EQ(t.digest(), s.digest());
    EXPECT_THROW(read_spectrum_csv(dir_ / "k.csv"), DataError);
    EXPECT_THROW(read_matrix_csv(write("bad.csv", "1,2\n3,4\n")), DataError);
}

TEST_F(TempDir, DistributionAndResultsRoundTrip) {
    StatisticDistribution d{StatisticKind::CM, {0.01, 0.1, 0.1, 0.3333333333333333, 2.5}, "abc123", 100, SupMode::Grid};
    write_distribution_csv(dir_ / "law.csv", d);
    const auto e = read_distribution_csv(dir_ / "law.csv");
    EXPECT_EQ(e.kind, d.kind);
    EXPECT_EQ(e.samples, d.samples);
    EXPECT_EQ(e.spectrum_digest, d.spectrum_digest);
    EXPECT_EQ(e.grid_m, 100u);
    EXPECT_EQ(e.sup_mode, SupMode::Grid);

    std::vector<GofRecord> r{{"AAA", {0.91, 0.12, 0.4, 0.35, 2500}}, {"B \"quoted\"", {1.5, 0.6, 1e-6, 0.001, 10}}};
    write_results_jsonl(dir_ / "r.jsonl", r);
    const auto back = read_results_jsonl(dir_ / "r.jsonl");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].name, r[1].name);
    EXPECT_DOUBLE_EQ(back[1].result.ks_p, 1e-6);
    EXPECT_DOUBLE_EQ(back[0].result.cm_stat, 0.12);
    EXPECT_EQ(back[0].result.n, 2500u);
    EXPECT_THROW(read_results_jsonl(write("bad.jsonl", "{\"name\": 1}\n")), DataError);
}
