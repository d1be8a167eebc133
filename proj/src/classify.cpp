#include "mekt/classify.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>

namespace mekt {

namespace {

std::vector<int> sorted_class_ids(const std::vector<int>& labels) {
  std::set<int> ids(labels.begin(), labels.end());
  return {ids.begin(), ids.end()};
}

/// Ledoit-Wolf analytic shrinkage intensity toward (tr(S)/p) I,
/// from centered sample columns and their sample covariance.
double ledoit_wolf_gamma(const Matrix& centered, const Matrix& s) {
  const int p = static_cast<int>(s.rows());
  const int n = static_cast<int>(centered.cols());
  const double mu = s.trace() / p;
  const double d2 = (s - mu * Matrix::Identity(p, p)).squaredNorm() / p;
  if (d2 <= 0.0) return 0.0;
  double b2_bar = 0.0;
  for (int i = 0; i < n; ++i) {
    b2_bar += (centered.col(i) * centered.col(i).transpose() - s).squaredNorm();
  }
  b2_bar /= static_cast<double>(n) * n * p;
  const double b2 = std::min(b2_bar, d2);
  return b2 / d2;
}

}  // namespace

LdaModel lda_fit(const Matrix& x, const std::vector<int>& labels,
                 std::optional<double> gamma) {
  const int p = static_cast<int>(x.rows());
  const int n = static_cast<int>(x.cols());
  if (n != static_cast<int>(labels.size())) {
    throw DimensionError("lda_fit: label count mismatch");
  }
  auto ids = sorted_class_ids(labels);
  const int l = static_cast<int>(ids.size());
  if (l < 2) {
    throw InsufficientClasses("lda_fit: need at least 2 classes");
  }

  LdaModel model;
  model.class_ids = ids;
  model.class_means = Matrix::Zero(p, l);
  std::map<int, int> class_index;
  for (int k = 0; k < l; ++k) class_index[ids[k]] = k;
  Vector counts = Vector::Zero(l);
  for (int i = 0; i < n; ++i) {
    const int k = class_index[labels[i]];
    model.class_means.col(k) += x.col(i);
    counts[k] += 1.0;
  }
  for (int k = 0; k < l; ++k) model.class_means.col(k) /= counts[k];

  Matrix centered(p, n);
  for (int i = 0; i < n; ++i) {
    centered.col(i) = x.col(i) - model.class_means.col(class_index[labels[i]]);
  }
  Matrix s = centered * centered.transpose() / static_cast<double>(n);

  double g = gamma ? *gamma : ledoit_wolf_gamma(centered, s);
  g = std::clamp(g, 0.0, 1.0);
  const double target = s.trace() / p;

  Matrix sigma;
  Eigen::LLT<Matrix> llt;
  for (;;) {
    sigma = (1.0 - g) * s + g * target * Matrix::Identity(p, p);
    llt.compute(sigma);
    if (llt.info() == Eigen::Success &&
        sigma.diagonal().minCoeff() > 0.0) {
      break;
    }
    if (g >= 1.0) {
      throw DegenerateStatistics("lda_fit: covariance irreparably singular");
    }
    std::cerr << "warning: lda_fit escalating shrinkage, covariance singular\n";
    g = (g < 1e-3) ? 1e-3 : std::min(2.0 * g, 1.0);
  }

  model.gamma = g;
  model.pooled_covariance = sigma;
  model.discriminant_weights = llt.solve(model.class_means);
  model.discriminant_bias = Vector(l);
  for (int k = 0; k < l; ++k) {
    model.discriminant_bias[k] =
        -0.5 * model.class_means.col(k).dot(model.discriminant_weights.col(k));
  }
  return model;
}

LdaModel lda_fit(const FeatureMatrix& features, std::optional<double> gamma) {
  if (!features.labels) {
    throw LabelsRequired("lda_fit: labels required");
  }
  return lda_fit(features.columns, *features.labels, gamma);
}

std::vector<int> lda_predict(const LdaModel& model, const Matrix& x) {
  const int n = static_cast<int>(x.cols());
  Matrix scores = model.discriminant_weights.transpose() * x;
  scores.colwise() += model.discriminant_bias;
  std::vector<int> out(n);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    scores.col(i).maxCoeff(&best);
    out[i] = model.class_ids[best];
  }
  return out;
}

MdmModel mdm_fit(const std::vector<SpdMatrix>& covariances,
                 const std::vector<int>& labels, const MeanSolverConfig& cfg) {
  if (covariances.size() != labels.size()) {
    throw DimensionError("mdm_fit: label count mismatch");
  }
  MdmModel model;
  model.class_ids = sorted_class_ids(labels);
  for (int cls : model.class_ids) {
    std::vector<SpdMatrix> members;
    for (size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(covariances[i]);
    }
    if (members.empty()) {
      throw InsufficientData("mdm_fit: empty class");
    }
    model.class_centroids.push_back(mean(members, MeanKind::Riemannian, cfg));
  }
  return model;
}

std::vector<int> mdm_predict(const MdmModel& model,
                             const std::vector<SpdMatrix>& covariances) {
  std::vector<int> out;
  out.reserve(covariances.size());
  for (const auto& p : covariances) {
    int best = 0;
    double best_dist = riemannian_distance(p, model.class_centroids[0]);
    for (size_t k = 1; k < model.class_centroids.size(); ++k) {
      const double d = riemannian_distance(p, model.class_centroids[k]);
      if (d < best_dist) {  // ties keep the lower class id
        best_dist = d;
        best = static_cast<int>(k);
      }
    }
    out.push_back(model.class_ids[best]);
  }
  return out;
}

CspFilter csp_fit(const DomainTrials& domain, int f) {
  if (!domain.labels) {
    throw LabelsRequired("csp_fit: labels required");
  }
  auto ids = sorted_class_ids(*domain.labels);
  if (ids.size() != 2) {
    throw Unsupported("csp_fit: exactly 2 classes required");
  }
  const int c = static_cast<int>(domain.trials[0].rows());
  if (2 * f > c) {
    throw ConfigError("csp_fit: 2f exceeds channel count");
  }

  Matrix class_cov[2];
  for (int k = 0; k < 2; ++k) {
    Matrix acc = Matrix::Zero(c, c);
    int count = 0;
    for (size_t i = 0; i < domain.trials.size(); ++i) {
      if ((*domain.labels)[i] == ids[k]) {
        acc += domain.trials[i] * domain.trials[i].transpose();
        ++count;
      }
    }
    class_cov[k] = regularize(acc / count, 1e-10).mat();
  }

  CspFilter filter;
  filter.f = f;
  filter.w = Matrix(c, 2 * f);
  for (int k = 0; k < 2; ++k) {
    // leading eigenvectors of (cov_{1-k})^-1 cov_k
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(class_cov[k],
                                                        class_cov[1 - k]);
    if (es.info() != Eigen::Success) {
      throw SolverError("csp_fit: generalized eigensolve failed");
    }
    for (int j = 0; j < f; ++j) {
      filter.w.col(k * f + j) = es.eigenvectors().col(c - 1 - j);
    }
  }
  return filter;
}

Vector csp_features(const CspFilter& filter, const Matrix& trial) {
  Matrix filtered = filter.w.transpose() * trial;
  Matrix cov = filtered * filtered.transpose();
  Vector variances = cov.diagonal();
  return (variances / cov.trace()).array().log();
}

FeatureMatrix csp_feature_matrix(const CspFilter& filter,
                                 const DomainTrials& domain) {
  const int n = static_cast<int>(domain.trials.size());
  Matrix cols(2 * filter.f, n);
  for (int i = 0; i < n; ++i) {
    cols.col(i) = csp_features(filter, domain.trials[i]);
  }
  return FeatureMatrix{std::move(cols), domain.labels, domain.subject_id};
}

double bca(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) {
    throw DimensionError("bca: length mismatch");
  }
  if (truth.empty()) {
    throw EmptyInput("bca: empty input");
  }
  std::map<int, std::pair<int, int>> per_class;  // class -> (correct, total)
  for (size_t i = 0; i < truth.size(); ++i) {
    auto& [correct, total] = per_class[truth[i]];
    ++total;
    if (predicted[i] == truth[i]) ++correct;
  }
  double acc = 0.0;
  for (const auto& [cls, counts] : per_class) {
    acc += static_cast<double>(counts.first) / counts.second;
  }
  return acc / per_class.size();
}

}  // namespace mekt
