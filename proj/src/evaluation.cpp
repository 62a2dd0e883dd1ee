#include "robustcp/evaluation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace robustcp {

NormalizedModel normalize_columns(const KruskalModel& k) {
  const auto r = static_cast<Eigen::Index>(k.rank());
  Vector weights = Vector::Ones(r);
  std::vector<bool> zero(static_cast<std::size_t>(r), false);
  std::vector<Matrix> factors;
  factors.reserve(k.order());
  for (const auto& f : k.factors()) {
    Matrix g = f;
    for (Eigen::Index c = 0; c < r; ++c) {
      const double norm = g.col(c).norm();
      if (norm > 0.0) {
        g.col(c) /= norm;
        weights(c) *= norm;
      } else {
        g.col(c).setZero();
        g(0, c) = 1.0;
        weights(c) = 0.0;
        zero[static_cast<std::size_t>(c)] = true;
      }
    }
    factors.push_back(std::move(g));
  }
  NormalizedModel out{KruskalModel(std::move(factors)), weights, {}};
  for (std::size_t c = 0; c < zero.size(); ++c)
    if (zero[c]) out.zero_columns.push_back(c);
  return out;
}

KruskalModel apply_weights(const KruskalModel& k, const Vector& weights) {
  if (weights.size() != static_cast<Eigen::Index>(k.rank())) {
    throw std::invalid_argument("weight vector length differs from model rank");
  }
  KruskalModel out = k;
  out.set_factor(0, k.factor(0) * weights.asDiagonal());
  return out;
}

std::vector<std::size_t> max_weight_assignment(const Matrix& scores) {
  if (scores.rows() != scores.cols()) throw std::invalid_argument("assignment needs a square matrix");
  const auto n = static_cast<std::size_t>(scores.rows());
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Shortest augmenting path form of the Hungarian method on cost = -score,
  // with 1-based potentials; index 0 is a sentinel.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  const auto cost = [&](std::size_t i, std::size_t j) {
    return -scores(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1));
  };
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n, 0);
  for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
  return assignment;
}

FmsReport factor_match_score(const KruskalModel& estimated, const KruskalModel& truth) {
  if (estimated.rank() != truth.rank()) {
    throw std::invalid_argument("FMS: rank mismatch (" + std::to_string(estimated.rank()) + " vs " +
                                std::to_string(truth.rank()) + ")");
  }
  if (estimated.shape() != truth.shape()) throw std::invalid_argument("FMS: shape mismatch");

  const NormalizedModel a = normalize_columns(estimated);
  const NormalizedModel b = normalize_columns(truth);
  const auto r = static_cast<Eigen::Index>(estimated.rank());
  Matrix congruence = Matrix::Ones(r, r);
  for (std::size_t n = 0; n < estimated.order(); ++n) {
    congruence = congruence.cwiseProduct(
        (a.model.factor(n).transpose() * b.model.factor(n)).cwiseAbs());
  }
  // Rounding can push a unit-vector inner product a hair above one.
  congruence = congruence.cwiseMin(1.0);

  FmsReport report;
  report.permutation = max_weight_assignment(congruence);
  double total = 0.0;
  for (Eigen::Index c = 0; c < r; ++c) {
    const double s = congruence(c, static_cast<Eigen::Index>(report.permutation[static_cast<std::size_t>(c)]));
    report.component_scores.push_back(s);
    total += s;
  }
  report.score = total / static_cast<double>(r);
  return report;
}

}  // namespace robustcp
