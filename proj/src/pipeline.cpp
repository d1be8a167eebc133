#include "mekt/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace mekt {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

FeatureMatrix concat_features(const std::vector<FeatureMatrix>& parts) {
  if (parts.empty()) {
    throw EmptyInput("concat_features: no domains");
  }
  const int d = parts[0].dim();
  int total = 0;
  bool labeled = true;
  for (const auto& f : parts) {
    if (f.dim() != d) {
      throw DimensionError("concat_features: feature dimensionality mismatch");
    }
    total += f.count();
    labeled = labeled && f.labels.has_value();
  }
  FeatureMatrix out;
  out.columns = Matrix(d, total);
  out.domain_id = "pooled";
  std::vector<int> labels;
  int col = 0;
  for (const auto& f : parts) {
    out.columns.middleCols(col, f.count()) = f.columns;
    col += f.count();
    if (labeled) {
      labels.insert(labels.end(), f.labels->begin(), f.labels->end());
    }
  }
  if (labeled) out.labels = std::move(labels);
  return out;
}

Matrix pooled_erp_template(const std::vector<DomainTrials>& sources,
                           int target_class) {
  // Target domain has no labels; its template comes from the pooled
  // labeled source trials.
  Matrix acc;
  int count = 0;
  for (const auto& src : sources) {
    if (!src.labels) {
      throw LabelsRequired("pooled_erp_template: source labels required");
    }
    for (size_t i = 0; i < src.trials.size(); ++i) {
      if ((*src.labels)[i] == target_class) {
        if (count == 0) {
          acc = src.trials[i];
        } else {
          acc += src.trials[i];
        }
        ++count;
      }
    }
  }
  if (count == 0) {
    throw InsufficientData("pooled_erp_template: target class absent from sources");
  }
  return acc / static_cast<double>(count);
}

FeatureMatrix erp_domain_features(const DomainTrials& augmented, int channels,
                                  MeanKind kind) {
  return erp_block_features(center_align(augmented, kind), channels);
}

DomainTrials strip_labels(const DomainTrials& domain) {
  return DomainTrials{domain.trials, std::nullopt, domain.subject_id};
}

}  // namespace

FeatureMatrix domain_features(const DomainTrials& domain, MeanKind kind,
                              const MeanSolverConfig& cfg) {
  return tangent_map(center_align(domain, kind, cfg));
}

PreparedFeatures prepare_features(const std::vector<DomainTrials>& sources,
                                  const DomainTrials& target,
                                  const PipelineOptions& opts) {
  if (sources.empty()) {
    throw EmptyInput("prepare_features: no source domains");
  }
  PreparedFeatures prepared;
  DomainTrials unlabeled_target = strip_labels(target);

  if (opts.mode == FeatureMode::TangentUpper) {
    for (const auto& src : sources) {
      prepared.sources.push_back(domain_features(src, opts.mean));
    }
    prepared.target = domain_features(unlabeled_target, opts.mean);
  } else {
    const int channels = static_cast<int>(target.trials.at(0).rows());
    for (const auto& src : sources) {
      prepared.sources.push_back(erp_domain_features(
          erp_augment(src, opts.erp_target_class), channels, opts.mean));
    }
    Matrix tmpl = pooled_erp_template(sources, opts.erp_target_class);
    prepared.target = erp_domain_features(
        erp_augment_with_template(unlabeled_target, tmpl), channels, opts.mean);
  }

  prepared.source_pooled = concat_features(prepared.sources);
  if (!prepared.source_pooled.labels) {
    throw LabelsRequired("prepare_features: source labels required");
  }

  if (opts.select_k > 0) {
    // Selection is fit on source labels only, then applied to the target.
    auto selection = anova_f_select(prepared.source_pooled, opts.select_k);
    prepared.source_pooled = std::move(selection.features);
    prepared.target = apply_selection(prepared.target, selection.indices);
    for (auto& f : prepared.sources) {
      f = apply_selection(f, selection.indices);
    }
  }
  return prepared;
}

TaskResult run_mekt_task(const std::vector<DomainTrials>& sources,
                         const DomainTrials& target,
                         const PipelineOptions& opts) {
  const auto start = Clock::now();
  PreparedFeatures prepared = prepare_features(sources, target, opts);

  LdaClassifier classifier(opts.lda_gamma);
  MektResult fit =
      opts.kernel ? mekt_fit_kernel(prepared.source_pooled, prepared.target,
                                    opts.mekt, *opts.kernel, classifier, opts.mmd)
                  : mekt_fit(prepared.source_pooled, prepared.target, opts.mekt,
                             classifier, opts.mmd);

  TaskResult result;
  result.predicted = std::move(fit.predicted_labels);
  result.diagnostics = std::move(fit.diagnostics);
  result.runtime_ms = ms_since(start);
  if (target.labels) {
    result.bca = bca(*target.labels, result.predicted);
  }
  return result;
}

BenchMethod parse_bench_method(const std::string& name) {
  if (name == "mekt") return BenchMethod::Mekt;
  if (name == "ca") return BenchMethod::CaOnly;
  if (name == "ea") return BenchMethod::Ea;
  if (name == "ra-mdm") return BenchMethod::RaMdm;
  if (name == "csp-lda") return BenchMethod::CspLda;
  throw ConfigError("unknown bench method: " + name);
}

std::vector<BenchTask> bench_tasks(int n_domains, BenchProtocol protocol) {
  std::vector<BenchTask> tasks;
  if (protocol == BenchProtocol::Sts) {
    for (int s = 0; s < n_domains; ++s) {
      for (int t = 0; t < n_domains; ++t) {
        if (s != t) tasks.push_back(BenchTask{{s}, t});
      }
    }
  } else {
    for (int t = 0; t < n_domains; ++t) {
      BenchTask task;
      task.target_index = t;
      for (int s = 0; s < n_domains; ++s) {
        if (s != t) task.source_indices.push_back(s);
      }
      tasks.push_back(std::move(task));
    }
  }
  return tasks;
}

namespace {

TaskResult run_ca_baseline(const std::vector<DomainTrials>& sources,
                           const DomainTrials& target,
                           const PipelineOptions& opts) {
  const auto start = Clock::now();
  PipelineOptions no_adapt = opts;
  PreparedFeatures prepared = prepare_features(sources, target, no_adapt);
  LdaModel model = lda_fit(prepared.source_pooled, opts.lda_gamma);
  TaskResult result;
  result.predicted = lda_predict(model, prepared.target.columns);
  result.runtime_ms = ms_since(start);
  if (target.labels) result.bca = bca(*target.labels, result.predicted);
  return result;
}

TaskResult run_csp_lda_baseline(const std::vector<DomainTrials>& sources,
                                const DomainTrials& target, bool align_first,
                                const PipelineOptions& opts) {
  const auto start = Clock::now();
  DomainTrials pooled;
  pooled.subject_id = "pooled";
  std::vector<int> labels;
  for (const auto& raw : sources) {
    DomainTrials src = align_first ? euclidean_align(raw) : raw;
    if (!src.labels) {
      throw LabelsRequired("bench: source labels required");
    }
    pooled.trials.insert(pooled.trials.end(), src.trials.begin(),
                         src.trials.end());
    labels.insert(labels.end(), src.labels->begin(), src.labels->end());
  }
  pooled.labels = std::move(labels);

  DomainTrials test = align_first
                          ? euclidean_align(DomainTrials{target.trials,
                                                         std::nullopt,
                                                         target.subject_id})
                          : DomainTrials{target.trials, std::nullopt,
                                         target.subject_id};

  const int c = static_cast<int>(pooled.trials[0].rows());
  const int f = std::min(3, c / 2);
  CspFilter filter = csp_fit(pooled, f);
  LdaModel model = lda_fit(csp_feature_matrix(filter, pooled), opts.lda_gamma);
  TaskResult result;
  result.predicted = lda_predict(model, csp_feature_matrix(filter, test).columns);
  result.runtime_ms = ms_since(start);
  if (target.labels) result.bca = bca(*target.labels, result.predicted);
  return result;
}

TaskResult run_ra_mdm_baseline(const std::vector<DomainTrials>& sources,
                               const DomainTrials& target) {
  const auto start = Clock::now();
  std::vector<SpdMatrix> train_covs;
  std::vector<int> train_labels;
  for (const auto& src : sources) {
    if (!src.labels) {
      throw LabelsRequired("bench: source labels required");
    }
    std::vector<int> all(src.trials.size());
    std::iota(all.begin(), all.end(), 0);
    AlignedDomain aligned = riemannian_align(src, all);
    train_covs.insert(train_covs.end(), aligned.covariances.begin(),
                      aligned.covariances.end());
    train_labels.insert(train_labels.end(), src.labels->begin(),
                        src.labels->end());
  }
  std::vector<int> all(target.trials.size());
  std::iota(all.begin(), all.end(), 0);
  AlignedDomain aligned_target = riemannian_align(
      DomainTrials{target.trials, std::nullopt, target.subject_id}, all);

  MdmModel model = mdm_fit(train_covs, train_labels);
  TaskResult result;
  result.predicted = mdm_predict(model, aligned_target.covariances);
  result.runtime_ms = ms_since(start);
  if (target.labels) result.bca = bca(*target.labels, result.predicted);
  return result;
}

}  // namespace

BenchRow run_bench_task(const std::vector<DomainTrials>& domains,
                        const BenchTask& task, BenchMethod method,
                        const PipelineOptions& opts) {
  std::vector<DomainTrials> sources;
  for (int idx : task.source_indices) sources.push_back(domains.at(idx));
  const DomainTrials& target = domains.at(task.target_index);
  if (!target.labels) {
    throw LabelsRequired("bench: target labels required for scoring");
  }

  TaskResult result;
  switch (method) {
    case BenchMethod::Mekt:
      result = run_mekt_task(sources, target, opts);
      break;
    case BenchMethod::CaOnly:
      result = run_ca_baseline(sources, target, opts);
      break;
    case BenchMethod::Ea:
      result = run_csp_lda_baseline(sources, target, true, opts);
      break;
    case BenchMethod::CspLda:
      result = run_csp_lda_baseline(sources, target, false, opts);
      break;
    case BenchMethod::RaMdm:
      result = run_ra_mdm_baseline(sources, target);
      break;
  }

  BenchRow row;
  for (int idx : task.source_indices) {
    row.sources.push_back(domains.at(idx).subject_id);
  }
  row.target = target.subject_id;
  for (size_t i = 0; i < row.sources.size(); ++i) {
    if (i > 0) row.task_id += "+";
    row.task_id += row.sources[i];
  }
  row.task_id += "->" + row.target;
  row.bca = result.bca.value_or(0.0);
  row.runtime_ms = result.runtime_ms;
  row.iterations = static_cast<int>(result.diagnostics.size());
  return row;
}

}  // namespace mekt
