#pragma once

#include <string>
#include <vector>

#include "mekt/features.hpp"

namespace mekt {

struct TransferabilityScore {
  std::string source_id;
  double dis = 0.0;  // source discriminability
  double dif = 0.0;  // source-target difference
  double r = 0.0;    // dis / max(dif, 1e-12)
};

enum class ScatterNorm { Entrywise, Induced };

/// Transferability of one labeled source against the unlabeled target:
/// ratio of the 1-norm of the source between-class scatter to the
/// 1-norm of the two-group between-domain scatter.
TransferabilityScore transferability(const FeatureMatrix& source,
                                     const FeatureMatrix& target,
                                     ScatterNorm norm = ScatterNorm::Entrywise);

/// Ids of the z_star highest-r sources, ties by ascending source_id.
std::vector<std::string> select_sources(std::vector<TransferabilityScore> scores,
                                        int z_star);

/// The default subset size: round((z - 1) / 2), at least 1.
int default_selection_count(int z);

}  // namespace mekt
