#pragma once

#include <optional>
#include <vector>

#include "mekt/features.hpp"

namespace mekt {

/// Shrinkage LDA with equal class priors.
struct LdaModel {
  Matrix class_means;           // p x l
  Matrix pooled_covariance;     // after shrinkage
  Matrix discriminant_weights;  // p x l, Sigma^-1 * means
  Vector discriminant_bias;     // l
  std::vector<int> class_ids;
  double gamma = 0.0;
};

/// gamma in [0,1]; nullopt selects it by the Ledoit-Wolf analytic formula.
LdaModel lda_fit(const Matrix& x, const std::vector<int>& labels,
                 std::optional<double> gamma = std::nullopt);
LdaModel lda_fit(const FeatureMatrix& features,
                 std::optional<double> gamma = std::nullopt);
std::vector<int> lda_predict(const LdaModel& model, const Matrix& x);

/// Minimum distance to mean on the SPD manifold.
struct MdmModel {
  std::vector<SpdMatrix> class_centroids;
  std::vector<int> class_ids;
};

MdmModel mdm_fit(const std::vector<SpdMatrix>& covariances,
                 const std::vector<int>& labels,
                 const MeanSolverConfig& cfg = {});
std::vector<int> mdm_predict(const MdmModel& model,
                             const std::vector<SpdMatrix>& covariances);

/// Common spatial patterns for binary problems.
struct CspFilter {
  Matrix w;  // c x 2f
  int f = 0;
};

CspFilter csp_fit(const DomainTrials& domain, int f);
Vector csp_features(const CspFilter& filter, const Matrix& trial);
FeatureMatrix csp_feature_matrix(const CspFilter& filter,
                                 const DomainTrials& domain);

/// Balanced classification accuracy: mean per-class recall.
double bca(const std::vector<int>& truth, const std::vector<int>& predicted);

}  // namespace mekt
