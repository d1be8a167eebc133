#include "mekt/alignment.hpp"

#include <iostream>

namespace mekt {

SpdMatrix trial_covariance(const Matrix& x, double eigen_floor) {
  if (x.rows() < 2) {
    throw DimensionError("trial_covariance: need at least 2 channels");
  }
  if (x.isZero(0.0)) {
    throw DegenerateMatrix("trial_covariance: zero trial");
  }
  if (x.cols() < x.rows()) {
    std::cerr << "warning: trial has fewer samples than channels; covariance is rank-deficient\n";
  }
  return regularize(x * x.transpose(), eigen_floor);
}

namespace {

std::vector<SpdMatrix> all_covariances(const DomainTrials& domain,
                                       double eigen_floor) {
  std::vector<SpdMatrix> covs;
  covs.reserve(domain.trials.size());
  for (const auto& x : domain.trials) {
    covs.push_back(trial_covariance(x, eigen_floor));
  }
  return covs;
}

AlignedDomain apply_reference(std::vector<SpdMatrix> covs, const SpdMatrix& m,
                              MeanKind kind, const DomainTrials& domain,
                              const MeanSolverConfig& cfg) {
  SpdMatrix m_ref = matrix_inv_sqrt(m, cfg.eigen_floor);
  for (auto& p : covs) {
    p = congruence(p, m_ref.mat());
  }
  return AlignedDomain{std::move(covs), std::move(m_ref), kind, domain.labels,
                       domain.subject_id};
}

}  // namespace

AlignedDomain center_align(const DomainTrials& domain, MeanKind kind,
                           const MeanSolverConfig& cfg) {
  if (domain.trials.size() < 2) {
    throw InsufficientData("center_align: need at least 2 trials");
  }
  auto covs = all_covariances(domain, cfg.eigen_floor);
  SpdMatrix m = mean(covs, kind, cfg);
  return apply_reference(std::move(covs), m, kind, domain, cfg);
}

AlignedDomain riemannian_align(const DomainTrials& domain,
                               const std::vector<int>& reference_trials,
                               const MeanSolverConfig& cfg) {
  if (reference_trials.empty()) {
    throw InsufficientData("riemannian_align: empty reference subset");
  }
  auto covs = all_covariances(domain, cfg.eigen_floor);
  std::vector<SpdMatrix> subset;
  subset.reserve(reference_trials.size());
  for (int idx : reference_trials) {
    if (idx < 0 || idx >= static_cast<int>(covs.size())) {
      throw DimensionError("riemannian_align: reference index out of range");
    }
    subset.push_back(covs[idx]);
  }
  SpdMatrix m = mean(subset, MeanKind::Riemannian, cfg);
  return apply_reference(std::move(covs), m, MeanKind::Riemannian, domain, cfg);
}

DomainTrials euclidean_align(const DomainTrials& domain) {
  if (domain.trials.size() < 2) {
    throw InsufficientData("euclidean_align: need at least 2 trials");
  }
  MeanSolverConfig cfg;
  auto covs = all_covariances(domain, cfg.eigen_floor);
  SpdMatrix m_e = mean(covs, MeanKind::Euclidean, cfg);
  SpdMatrix w = matrix_inv_sqrt(m_e, cfg.eigen_floor);
  DomainTrials out{{}, domain.labels, domain.subject_id};
  out.trials.reserve(domain.trials.size());
  for (const auto& x : domain.trials) {
    out.trials.push_back(w.mat() * x);
  }
  return out;
}

}  // namespace mekt
