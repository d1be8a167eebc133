#include "mekt/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace mekt {

Vector upper_vector(const Matrix& sym) {
  const int c = static_cast<int>(sym.rows());
  Vector v(c * (c + 1) / 2);
  const double root2 = std::sqrt(2.0);
  int k = 0;
  for (int i = 0; i < c; ++i) {
    v[k++] = sym(i, i);
    for (int j = i + 1; j < c; ++j) {
      v[k++] = root2 * sym(i, j);
    }
  }
  return v;
}

FeatureMatrix tangent_map(const AlignedDomain& aligned) {
  const int n = static_cast<int>(aligned.covariances.size());
  if (n == 0) {
    throw EmptyInput("tangent_map: no covariances");
  }
  const int c = aligned.covariances[0].dim();
  Matrix cols(c * (c + 1) / 2, n);
  for (int i = 0; i < n; ++i) {
    cols.col(i) = upper_vector(matrix_log(aligned.covariances[i]));
  }
  return FeatureMatrix{std::move(cols), aligned.labels, aligned.subject_id};
}

Matrix erp_template(const DomainTrials& domain, int target_class) {
  if (!domain.labels) {
    throw LabelsRequired("erp_template: labels required");
  }
  Matrix acc;
  int count = 0;
  for (size_t i = 0; i < domain.trials.size(); ++i) {
    if ((*domain.labels)[i] == target_class) {
      if (count == 0) {
        acc = domain.trials[i];
      } else {
        acc += domain.trials[i];
      }
      ++count;
    }
  }
  if (count == 0) {
    throw InsufficientData("erp_template: target class has no trials");
  }
  return acc / static_cast<double>(count);
}

DomainTrials erp_augment_with_template(const DomainTrials& domain,
                                       const Matrix& tmpl) {
  DomainTrials out{{}, domain.labels, domain.subject_id};
  out.trials.reserve(domain.trials.size());
  for (const auto& x : domain.trials) {
    if (x.rows() != tmpl.rows() || x.cols() != tmpl.cols()) {
      throw DimensionError("erp_augment: template shape mismatch");
    }
    Matrix super(2 * x.rows(), x.cols());
    super << tmpl, x;
    out.trials.push_back(std::move(super));
  }
  return out;
}

DomainTrials erp_augment(const DomainTrials& domain, int target_class) {
  return erp_augment_with_template(domain, erp_template(domain, target_class));
}

FeatureMatrix erp_block_features(const AlignedDomain& aligned, int c) {
  const int n = static_cast<int>(aligned.covariances.size());
  if (n == 0) {
    throw EmptyInput("erp_block_features: no covariances");
  }
  if (aligned.covariances[0].dim() != 2 * c) {
    throw DimensionError("erp_block_features: covariances are not 2c x 2c");
  }
  Matrix cols(c * c, n);
  for (int i = 0; i < n; ++i) {
    Matrix lg = matrix_log(aligned.covariances[i]);
    Matrix block = lg.topRightCorner(c, c);
    int k = 0;
    for (int r = 0; r < c; ++r) {
      for (int s = 0; s < c; ++s) {
        cols(k++, i) = block(r, s);
      }
    }
  }
  return FeatureMatrix{std::move(cols), aligned.labels, aligned.subject_id};
}

FeatureMatrix apply_selection(const FeatureMatrix& features,
                              const std::vector<int>& indices) {
  Matrix out(static_cast<int>(indices.size()), features.count());
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= features.dim()) {
      throw DimensionError("apply_selection: index out of range");
    }
    out.row(static_cast<int>(i)) = features.columns.row(indices[i]);
  }
  return FeatureMatrix{std::move(out), features.labels, features.domain_id};
}

FeatureSelection anova_f_select(const FeatureMatrix& features, int k) {
  if (!features.labels) {
    throw LabelsRequired("anova_f_select: labels required");
  }
  const int d = features.dim();
  const int n = features.count();
  if (k < 1 || k > d) {
    throw ConfigError("anova_f_select: k out of range");
  }

  std::map<int, std::vector<int>> by_class;
  for (int i = 0; i < n; ++i) {
    by_class[(*features.labels)[i]].push_back(i);
  }
  const int num_classes = static_cast<int>(by_class.size());
  if (num_classes < 2) {
    throw InsufficientClasses("anova_f_select: need at least 2 classes");
  }
  for (const auto& [cls, idx] : by_class) {
    if (idx.size() < 2) {
      throw InsufficientData("anova_f_select: class with fewer than 2 samples");
    }
  }

  Vector f_stats(d);
  bool any_within = false;
  for (int j = 0; j < d; ++j) {
    const auto row = features.columns.row(j);
    const double grand = row.mean();
    double ssb = 0.0, ssw = 0.0;
    for (const auto& [cls, idx] : by_class) {
      double cm = 0.0;
      for (int i : idx) cm += row(i);
      cm /= static_cast<double>(idx.size());
      ssb += static_cast<double>(idx.size()) * (cm - grand) * (cm - grand);
      for (int i : idx) ssw += (row(i) - cm) * (row(i) - cm);
    }
    const double msb = ssb / (num_classes - 1);
    const double msw = ssw / (n - num_classes);
    if (msw > 0.0) {
      any_within = true;
      f_stats[j] = msb / msw;
    } else {
      // no within-group variance: infinite separation unless the
      // feature is constant overall, which counts as uninformative
      f_stats[j] = msb > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
  }
  if (!any_within) {
    throw DegenerateStatistics("anova_f_select: zero within-group variance everywhere");
  }

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (f_stats[a] != f_stats[b]) return f_stats[a] > f_stats[b];
    return a < b;
  });
  order.resize(k);

  FeatureSelection sel;
  sel.indices = order;
  sel.features = apply_selection(features, order);
  return sel;
}

}  // namespace mekt
