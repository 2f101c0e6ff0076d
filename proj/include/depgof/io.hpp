#pragma once

#include "depgof/limit_law.hpp"
#include "depgof/sampling_models.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace depgof {

enum class ModelKind { Empirical, Ar1, Fgn, Iid };

const char* to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

/// Which log-normal marginal supplies the A~/R~ basis of a parametric kernel:
/// the unit-variance reference model or the generator's own marginal.
enum class BasisChoice { Reference, Matched };

struct PipelineConfig {
    std::size_t grid_m = 100;
    std::size_t t_max = 512;
    std::size_t n_trials = 100'000;
    std::optional<std::uint64_t> seed;
    ModelKind model = ModelKind::Ar1;
    SupMode sup_mode = SupMode::Bridge;
    BasisChoice basis = BasisChoice::Matched;

    // Model parameters.
    double g = 0.88;
    double sigma2 = 0.05;
    double nu = 0.4;
    double s = 0.5;
    std::size_t n = 2500;
    std::size_t replications = 350;

    std::filesystem::path input;
    std::filesystem::path output_dir = "depgof_out";
    /// Lags whose copula surfaces are written in the empirical pipeline.
    std::vector<std::size_t> save_lags{1, 10, 100};

    void validate() const;
};

/// Flat key=value text, one per line, '#' starts a comment.
PipelineConfig parse_config(std::istream& in);
PipelineConfig load_config(const std::filesystem::path& path);
std::string format_config(const PipelineConfig& config);

struct PanelData {
    std::vector<std::string> names;
    std::vector<ReturnSeries> columns;

    std::size_t length() const { return columns.empty() ? 0 : columns.front().size(); }
};

struct CsvOptions {
    char delimiter = ',';
};

PanelData ingest_csv(const std::filesystem::path& path, const CsvOptions& options = {});
void write_panel_csv(const std::filesystem::path& path, const PanelData& panel);

/// Per column: mean 0 and sample variance 1.
PanelData standardize(const PanelData& panel);

/// Matrix artifact: header "# depgof <kind> m=<M> lag=<t>" then CSV rows.
struct MatrixArtifact {
    std::string kind;
    std::size_t m = 0;
    std::size_t lag = 0;
    Eigen::MatrixXd values;
};

void write_matrix_csv(const std::filesystem::path& path, const MatrixArtifact& artifact);
MatrixArtifact read_matrix_csv(const std::filesystem::path& path);

/// Spectrum as a matrix artifact of kind "spectrum": the first row holds the
/// eigenvalues, the following M rows the eigenvectors.
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spectrum);
Spectrum read_spectrum_csv(const std::filesystem::path& path);

/// Sorted samples, one per line, after a "# depgof law ..." header.
void write_distribution_csv(const std::filesystem::path& path, const StatisticDistribution& dist);
StatisticDistribution read_distribution_csv(const std::filesystem::path& path);

struct GofRecord {
    std::string name;
    GofResult result;
};

/// One JSON object per line: {"name", "ks", "cm", "p_ks", "p_cm", "n"}.
void write_results_jsonl(const std::filesystem::path& path, const std::vector<GofRecord>& records);
std::vector<GofRecord> read_results_jsonl(const std::filesystem::path& path);

}  // namespace depgof
