#pragma once

#include "robustcp/kruskal.hpp"

#include <vector>

namespace robustcp {

struct NormalizedModel {
  KruskalModel model;
  /// weights[r] is the product over modes of the original column-r norms.
  Vector weights;
  /// Components that had a zero column in some mode. Such a column is
  /// replaced by the first unit vector and its weight is 0.
  std::vector<std::size_t> zero_columns;
};

NormalizedModel normalize_columns(const KruskalModel& k);

/// Scales column r of the first factor by weights[r].
KruskalModel apply_weights(const KruskalModel& k, const Vector& weights);

struct FmsReport {
  double score = 0.0;
  /// permutation[r] is the true component matched to estimated component r.
  std::vector<std::size_t> permutation;
  /// Score of estimated component r against its match.
  std::vector<double> component_scores;
};

/// Factor match score. Both models are column-normalized, the congruence of
/// estimated component r with true component s is the product over modes of
/// |<est_r, true_s>|, and components are matched by the assignment that
/// maximizes the total congruence. Weight mismatch is not penalized.
FmsReport factor_match_score(const KruskalModel& estimated, const KruskalModel& truth);

/// Maximum-weight perfect matching on a square score matrix (Hungarian
/// method). Returns assignment[row] = column.
std::vector<std::size_t> max_weight_assignment(const Matrix& scores);

}  // namespace robustcp
