#pragma once

#include "robustcp/tensor.hpp"

#include <cstddef>
#include <vector>

namespace robustcp {

/// CP model: N factor matrices sharing a column count R. Factor n has
/// I_n rows.
class KruskalModel {
public:
  /// Throws std::invalid_argument on fewer than two factors, zero rank,
  /// or mismatched column counts.
  explicit KruskalModel(std::vector<Matrix> factors);

  std::size_t order() const noexcept { return factors_.size(); }
  std::size_t rank() const noexcept { return static_cast<std::size_t>(factors_.front().cols()); }
  Shape shape() const;

  const std::vector<Matrix>& factors() const noexcept { return factors_; }
  const Matrix& factor(std::size_t mode) const { return factors_.at(mode); }

  /// Replace one factor. The replacement must keep the rank.
  void set_factor(std::size_t mode, Matrix m);

  bool compatible_with(const Shape& shape) const;

private:
  std::vector<Matrix> factors_;
};

/// Columnwise Kronecker product; column r is a.col(r) ⊗ b.col(r), so the
/// row index is ia * rows(b) + ib.
Matrix khatri_rao(const Matrix& a, const Matrix& b);

/// Khatri-Rao product of every factor except `skip`, combined in decreasing
/// mode order (C ⊙ B when skipping A in a 3-way model). Satisfies
/// matricize(reconstruct(k), n) == k.factor(n) * khatri_rao_all_but(k, n)^T.
Matrix khatri_rao_all_but(const KruskalModel& k, std::size_t skip);

DenseTensor reconstruct(const KruskalModel& k);

/// Sum over entries of sqrt((t - reconstruct(k))^2 + eps)
/// plus (mu / 2) * sum of squared factor Frobenius norms.
double smoothed_l1_objective(const DenseTensor& t, const KruskalModel& k, double eps, double mu);

}  // namespace robustcp
