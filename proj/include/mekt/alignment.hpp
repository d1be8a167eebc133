#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mekt/spd.hpp"

namespace mekt {

/// One subject's epoched trials, each a channels x samples matrix.
struct DomainTrials {
  std::vector<Matrix> trials;
  std::optional<std::vector<int>> labels;  // 1-based class ids
  std::string subject_id;
};

/// Covariances of a domain after re-centering; `reference` is the
/// M^{-1/2} that was actually applied.
struct AlignedDomain {
  std::vector<SpdMatrix> covariances;
  SpdMatrix reference;
  MeanKind mean_kind;
  std::optional<std::vector<int>> labels;
  std::string subject_id;
};

/// Trial covariance X X^T, regularized to SPD.
SpdMatrix trial_covariance(const Matrix& x, double eigen_floor = 1e-10);

/// Centroid alignment: congruence-transform every trial covariance by
/// the inverse square root of the domain mean, so the domain center
/// becomes the identity.
AlignedDomain center_align(const DomainTrials& domain, MeanKind kind,
                           const MeanSolverConfig& cfg = {});

/// Riemannian alignment with the reference mean computed over a
/// caller-supplied subset of trials (e.g. resting / non-target).
AlignedDomain riemannian_align(const DomainTrials& domain,
                               const std::vector<int>& reference_trials,
                               const MeanSolverConfig& cfg = {});

/// Euclidean alignment: rescale raw trials by M_E^{-1/2} so the mean
/// trial covariance becomes the identity.
DomainTrials euclidean_align(const DomainTrials& domain);

}  // namespace mekt
