#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mekt/alignment.hpp"

namespace mekt {

/// Column-stacked feature vectors for one domain (d x n).
struct FeatureMatrix {
  Matrix columns;
  std::optional<std::vector<int>> labels;
  std::string domain_id;

  int dim() const { return static_cast<int>(columns.rows()); }
  int count() const { return static_cast<int>(columns.cols()); }
};

enum class FeatureMode { TangentUpper, ErpBlock };

/// Tangent-space mapping: upper(log(P')) per aligned covariance.
/// Off-diagonal entries carry weight sqrt(2) so the vector 2-norm
/// equals the Frobenius norm of the log matrix.
FeatureMatrix tangent_map(const AlignedDomain& aligned);

/// Vectorize one symmetric matrix under the same upper() convention.
Vector upper_vector(const Matrix& sym);

/// ERP augmentation: stack the mean target-class trial above every
/// trial, giving 2c x t super-trials.
DomainTrials erp_augment(const DomainTrials& domain, int target_class);

/// ERP augmentation with a caller-supplied template (used for the
/// unlabeled target domain, whose template comes from the sources).
DomainTrials erp_augment_with_template(const DomainTrials& domain,
                                       const Matrix& tmpl);

/// Mean trial of a class; the ERP template builder.
Matrix erp_template(const DomainTrials& domain, int target_class);

/// c x c upper-right block of log(P') for 2c x 2c augmented
/// covariances, flattened row-major into c^2 features.
FeatureMatrix erp_block_features(const AlignedDomain& aligned, int c);

struct FeatureSelection {
  FeatureMatrix features;
  std::vector<int> indices;  // descending F, ties by ascending index
};

/// One-way ANOVA F ranking; keeps the k highest-F features.
FeatureSelection anova_f_select(const FeatureMatrix& features, int k);

/// Apply a previously fitted selection to another feature matrix.
FeatureMatrix apply_selection(const FeatureMatrix& features,
                              const std::vector<int>& indices);

}  // namespace mekt
