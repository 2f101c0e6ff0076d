#pragma once

#include "depgof/io.hpp"
#include "depgof/kernel_spectrum.hpp"
#include "depgof/limit_law.hpp"
#include "depgof/lognormal_model.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace depgof {

/// Marginal of the series produced by a parametric model.
LognormalVolModel model_marginal(const PipelineConfig& config);

/// Dependence-corrected kernel of a parametric model (I for model=iid).
KernelMatrix model_kernel(const PipelineConfig& config);

/// Replication `index` of the parametric model.
ReturnSeries generate_replication(const PipelineConfig& config, std::size_t index);

struct ReplicationReport {
    std::vector<GofRecord> naive;
    std::vector<GofRecord> corrected;
    UniformityTest naive_ks, naive_cm, corrected_ks, corrected_cm;
};

/// Tests every replication against the naive (iid) and corrected laws and
/// summarizes the uniformity of the resulting p-values.
ReplicationReport run_replications(const PipelineConfig& config, const LimitLaws& naive, const LimitLaws& corrected);

struct PipelineSummary {
    Spectrum corrected_spectrum;
    LimitLaws naive;
    LimitLaws corrected;
    ReplicationReport report;
    std::vector<std::string> artifacts;
};

/// Runs estimate -> kernel -> spectrum -> law -> test and writes every
/// artifact under config.output_dir.
PipelineSummary run_pipeline(const PipelineConfig& config);

/// Parametric settings of the two synthetic experiments.
PipelineConfig fig2_config(std::uint64_t seed);
PipelineConfig fig3_config(std::uint64_t seed);

}  // namespace depgof
