#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mekt/dte.hpp"
#include "mekt/solver.hpp"
#include "mekt/synth.hpp"

namespace mekt {

struct PipelineOptions {
  MeanKind mean = MeanKind::Riemannian;
  MektConfig mekt;
  std::optional<KernelConfig> kernel;
  FeatureMode mode = FeatureMode::TangentUpper;
  int erp_target_class = 2;
  int select_k = 0;  // 0 disables ANOVA-F selection
  MmdKind mmd = MmdKind::Joint;
  std::optional<double> lda_gamma;  // nullopt = Ledoit-Wolf auto
};

/// CA + tangent features for one domain (MI pipeline).
FeatureMatrix domain_features(const DomainTrials& domain, MeanKind kind,
                              const MeanSolverConfig& cfg = {});

/// Per-domain features for all sources and the target, handling the
/// ERP augmented-covariance path when requested; target labels are
/// stripped before anything downstream sees them.
struct PreparedFeatures {
  std::vector<FeatureMatrix> sources;  // one per source domain
  FeatureMatrix source_pooled;         // column concatenation
  FeatureMatrix target;                // unlabeled
};

PreparedFeatures prepare_features(const std::vector<DomainTrials>& sources,
                                  const DomainTrials& target,
                                  const PipelineOptions& opts);

struct TaskResult {
  std::vector<int> predicted;
  std::vector<IterationDiag> diagnostics;
  double runtime_ms = 0.0;
  std::optional<double> bca;  // set when the target carries labels
};

/// Full MEKT pipeline: alignment, features, optional selection,
/// refinement loop, prediction. Scores against target labels when
/// they exist; labels never reach the fitting path.
TaskResult run_mekt_task(const std::vector<DomainTrials>& sources,
                         const DomainTrials& target,
                         const PipelineOptions& opts);

enum class BenchMethod { Mekt, CaOnly, Ea, RaMdm, CspLda };
enum class BenchProtocol { Sts, Mts };

BenchMethod parse_bench_method(const std::string& name);

struct BenchTask {
  std::vector<int> source_indices;
  int target_index = 0;
};

/// STS enumerates all ordered pairs; MTS uses every other domain as
/// a source for each target.
std::vector<BenchTask> bench_tasks(int n_domains, BenchProtocol protocol);

struct BenchRow {
  std::string task_id;
  std::vector<std::string> sources;
  std::string target;
  std::string method;
  double bca = 0.0;
  double runtime_ms = 0.0;
  int iterations = 0;
};

/// Run one task with the chosen method (labels required on target for
/// scoring).
BenchRow run_bench_task(const std::vector<DomainTrials>& domains,
                        const BenchTask& task, BenchMethod method,
                        const PipelineOptions& opts);

}  // namespace mekt
