#include "robustcp/kruskal.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace robustcp {

KruskalModel::KruskalModel(std::vector<Matrix> factors) : factors_(std::move(factors)) {
  if (factors_.size() < 2) throw std::invalid_argument("Kruskal model needs at least two factors");
  const auto r = factors_.front().cols();
  if (r < 1) throw std::invalid_argument("Kruskal model rank must be positive");
  for (std::size_t n = 0; n < factors_.size(); ++n) {
    if (factors_[n].cols() != r) {
      throw std::invalid_argument("factor " + std::to_string(n) + " has " +
                                  std::to_string(factors_[n].cols()) + " columns, expected " +
                                  std::to_string(r));
    }
    if (factors_[n].rows() < 1) throw std::invalid_argument("factor matrices must have rows");
  }
}

Shape KruskalModel::shape() const {
  Shape s;
  s.reserve(factors_.size());
  for (const auto& f : factors_) s.push_back(static_cast<std::size_t>(f.rows()));
  return s;
}

void KruskalModel::set_factor(std::size_t mode, Matrix m) {
  if (m.cols() != factors_.at(mode).cols()) {
    throw std::invalid_argument("replacement factor changes the model rank");
  }
  if (m.rows() < 1) throw std::invalid_argument("factor matrices must have rows");
  factors_[mode] = std::move(m);
}

bool KruskalModel::compatible_with(const Shape& shape) const {
  return shape == this->shape();
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("Khatri-Rao operands have " + std::to_string(a.cols()) + " and " +
                                std::to_string(b.cols()) + " columns");
  }
  Matrix out(a.rows() * b.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.cols(); ++r) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.col(r).segment(i * b.rows(), b.rows()) = a(i, r) * b.col(r);
    }
  }
  return out;
}

Matrix khatri_rao_all_but(const KruskalModel& k, std::size_t skip) {
  if (skip >= k.order()) {
    throw std::out_of_range("mode " + std::to_string(skip) + " out of range for order " +
                            std::to_string(k.order()));
  }
  Matrix acc;
  bool first = true;
  for (std::size_t n = k.order(); n-- > 0;) {
    if (n == skip) continue;
    if (first) {
      acc = k.factor(n);
      first = false;
    } else {
      acc = khatri_rao(acc, k.factor(n));
    }
  }
  return acc;
}

DenseTensor reconstruct(const KruskalModel& k) {
  const Matrix unfolded = k.factor(0) * khatri_rao_all_but(k, 0).transpose();
  return fold(unfolded, 0, k.shape());
}

double smoothed_l1_objective(const DenseTensor& t, const KruskalModel& k, double eps, double mu) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be nonnegative");
  if (!k.compatible_with(t.shape())) throw std::invalid_argument("model and tensor shapes differ");
  const DenseTensor approx = reconstruct(k);
  double loss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = t[i] - approx[i];
    loss += std::sqrt(r * r + eps);
  }
  double reg = 0.0;
  for (const auto& f : k.factors()) reg += f.squaredNorm();
  return loss + 0.5 * mu * reg;
}

}  // namespace robustcp
