#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace robustcp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);

/// Dense order-N tensor of doubles.
///
/// Values are stored with the first index varying fastest, so element
/// (i_1, ..., i_N) lives at i_1 + I_1 * (i_2 + I_2 * (i_3 + ...)). With this
/// layout the mode-0 unfolding is a plain reshape. Modes are 0-based in the
/// C++ API.
class DenseTensor {
public:
  /// Zero-filled tensor. Throws std::invalid_argument if the order is below 2
  /// or any dimension is zero.
  explicit DenseTensor(Shape shape);
  DenseTensor(Shape shape, std::vector<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t order() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t mode) const { return shape_.at(mode); }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double& operator[](std::size_t linear) noexcept { return values_[linear]; }
  double operator[](std::size_t linear) const noexcept { return values_[linear]; }

  double& operator()(std::span<const std::size_t> index);
  double operator()(std::span<const std::size_t> index) const;

  std::size_t linear_index(std::span<const std::size_t> index) const;

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
  Shape shape_;
  std::vector<double> values_;
};

/// Mode-n unfolding X_(n): row i_n, columns enumerate the remaining indices
/// with the lowest remaining mode varying fastest (Kolda-Bader ordering).
Matrix matricize(const DenseTensor& t, std::size_t mode);

/// Inverse of matricize.
DenseTensor fold(const Matrix& m, std::size_t mode, const Shape& shape);

double frobenius_norm(const DenseTensor& t);

/// Elementwise a - b; shapes must agree.
DenseTensor subtract(const DenseTensor& a, const DenseTensor& b);

}  // namespace robustcp
