#include "robustcp/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace robustcp {

namespace {

void validate_shape(const Shape& shape) {
  if (shape.size() < 2) {
    throw std::invalid_argument("tensor order must be at least 2, got " + std::to_string(shape.size()));
  }
  for (std::size_t d : shape) {
    if (d == 0) throw std::invalid_argument("tensor dimensions must be positive");
  }
}

void check_mode(std::size_t mode, std::size_t order) {
  if (mode >= order) {
    throw std::out_of_range("mode " + std::to_string(mode) + " out of range for order " +
                            std::to_string(order));
  }
}

// Stride of each mode inside the column index of the mode-n unfolding.
std::vector<std::size_t> unfolding_strides(const Shape& shape, std::size_t mode) {
  std::vector<std::size_t> strides(shape.size(), 0);
  std::size_t s = 1;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (k == mode) continue;
    strides[k] = s;
    s *= shape[k];
  }
  return strides;
}

// Walks the tensor in storage order, calling f(linear, row, col) for the
// mode-n unfolding.
template <typename F>
void for_each_unfolded(const Shape& shape, std::size_t mode, F&& f) {
  const auto strides = unfolding_strides(shape, mode);
  const std::size_t total = element_count(shape);
  std::vector<std::size_t> idx(shape.size(), 0);
  std::size_t col = 0;
  for (std::size_t linear = 0; linear < total; ++linear) {
    f(linear, idx[mode], col);
    for (std::size_t k = 0; k < shape.size(); ++k) {
      if (++idx[k] < shape[k]) {
        col += strides[k];
        break;
      }
      col -= strides[k] * (shape[k] - 1);
      idx[k] = 0;
    }
  }
}

}  // namespace

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
  validate_shape(shape_);
  values_.assign(element_count(shape_), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  validate_shape(shape_);
  if (values_.size() != element_count(shape_)) {
    throw std::invalid_argument("tensor value count " + std::to_string(values_.size()) +
                                " does not match shape product " +
                                std::to_string(element_count(shape_)));
  }
}

std::size_t DenseTensor::linear_index(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) throw std::invalid_argument("index order mismatch");
  std::size_t linear = 0;
  for (std::size_t k = shape_.size(); k-- > 0;) {
    if (index[k] >= shape_[k]) throw std::out_of_range("tensor index out of range");
    linear = linear * shape_[k] + index[k];
  }
  return linear;
}

double& DenseTensor::operator()(std::span<const std::size_t> index) {
  return values_[linear_index(index)];
}

double DenseTensor::operator()(std::span<const std::size_t> index) const {
  return values_[linear_index(index)];
}

Matrix matricize(const DenseTensor& t, std::size_t mode) {
  check_mode(mode, t.order());
  const auto& shape = t.shape();
  const auto rows = static_cast<Eigen::Index>(shape[mode]);
  const auto cols = static_cast<Eigen::Index>(t.size() / shape[mode]);
  Matrix m(rows, cols);
  if (mode == 0) {
    m = Eigen::Map<const Matrix>(t.values().data(), rows, cols);
    return m;
  }
  for_each_unfolded(shape, mode, [&](std::size_t linear, std::size_t row, std::size_t col) {
    m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = t[linear];
  });
  return m;
}

DenseTensor fold(const Matrix& m, std::size_t mode, const Shape& shape) {
  validate_shape(shape);
  check_mode(mode, shape.size());
  const std::size_t total = element_count(shape);
  if (static_cast<std::size_t>(m.rows()) != shape[mode] ||
      static_cast<std::size_t>(m.rows() * m.cols()) != total) {
    throw std::invalid_argument("matrix of size " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) +
                                " cannot be folded into the requested shape");
  }
  DenseTensor t(shape);
  if (mode == 0) {
    Eigen::Map<Matrix>(t.values().data(), m.rows(), m.cols()) = m;
    return t;
  }
  for_each_unfolded(shape, mode, [&](std::size_t linear, std::size_t row, std::size_t col) {
    t[linear] = m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  });
  return t;
}

double frobenius_norm(const DenseTensor& t) {
  const auto v = t.values();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())).norm();
}

DenseTensor subtract(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("tensor shape mismatch");
  DenseTensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

}  // namespace robustcp
