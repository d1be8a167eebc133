#include "mekt/dte.hpp"

#include <algorithm>
#include <cmath>

#include "mekt/solver.hpp"

namespace mekt {

namespace {

double scatter_norm(const Matrix& m, ScatterNorm norm) {
  if (norm == ScatterNorm::Entrywise) {
    return m.cwiseAbs().sum();
  }
  return m.cwiseAbs().colwise().sum().maxCoeff();  // induced 1-norm
}

}  // namespace

TransferabilityScore transferability(const FeatureMatrix& source,
                                     const FeatureMatrix& target,
                                     ScatterNorm norm) {
  if (source.dim() != target.dim()) {
    throw DimensionError("transferability: feature dimensionality mismatch");
  }
  auto [s_w, s_b] = scatter_matrices(source);  // throws on single class

  const double n_s = source.count();
  const double n_t = target.count();
  Vector m_s = source.columns.rowwise().mean();
  Vector m_t = target.columns.rowwise().mean();
  Vector pooled = (n_s * m_s + n_t * m_t) / (n_s + n_t);
  Vector ds = m_s - pooled;
  Vector dt = m_t - pooled;
  Matrix between_domain = n_s * ds * ds.transpose() + n_t * dt * dt.transpose();

  TransferabilityScore score;
  score.source_id = source.domain_id;
  score.dis = scatter_norm(s_b, norm);
  score.dif = scatter_norm(between_domain, norm);
  score.r = score.dis / std::max(score.dif, 1e-12);
  return score;
}

std::vector<std::string> select_sources(std::vector<TransferabilityScore> scores,
                                        int z_star) {
  if (scores.empty()) {
    throw EmptyInput("select_sources: no scores");
  }
  if (z_star < 1 || z_star > static_cast<int>(scores.size())) {
    throw ConfigError("select_sources: z_star out of range");
  }
  std::stable_sort(scores.begin(), scores.end(),
                   [](const TransferabilityScore& a, const TransferabilityScore& b) {
                     if (a.r != b.r) return a.r > b.r;
                     return a.source_id < b.source_id;
                   });
  std::vector<std::string> ids;
  ids.reserve(z_star);
  for (int i = 0; i < z_star; ++i) ids.push_back(scores[i].source_id);
  return ids;
}

int default_selection_count(int z) {
  return std::max(1, static_cast<int>(std::lround((z - 1) / 2.0)));
}

}  // namespace mekt
