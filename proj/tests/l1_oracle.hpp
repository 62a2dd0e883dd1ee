#pragma once

// Brute-force reference minimizer for the smoothed l1 loss, independent of
// the MM iteration: enumerate candidate points (interpolating vertices of the
// unsmoothed problem plus a uniform grid), keep the best, then polish with a
// damped Newton method on the exact Hessian.

#include "robustcp/l1_regression.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace robustcp::test {

inline double oracle_loss(const Vector& u, const L1Problem& p) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.m.rows(); ++i) {
    const double r = p.y(i) - p.m.row(i).dot(u);
    sum += std::sqrt(r * r + p.eps);
  }
  return sum + 0.5 * p.mu * u.squaredNorm();
}

inline void for_each_subset(int n, int k, std::vector<int>& pick, int start,
                            const auto& visit) {
  if (static_cast<int>(pick.size()) == k) {
    visit(pick);
    return;
  }
  for (int i = start; i < n; ++i) {
    pick.push_back(i);
    for_each_subset(n, k, pick, i + 1, visit);
    pick.pop_back();
  }
}

struct OracleResult {
  Vector u;
  double loss;
};

inline OracleResult brute_force_minimize(const L1Problem& p, int grid_points = 41) {
  const auto j = static_cast<int>(p.m.cols());
  const auto n = static_cast<int>(p.m.rows());
  OracleResult best{Vector::Zero(j), oracle_loss(Vector::Zero(j), p)};
  const auto consider = [&](const Vector& u) {
    const double l = oracle_loss(u, p);
    if (l < best.loss) best = {u, l};
  };

  // Vertices: points interpolating J of the observations.
  double radius = 1.0;
  if (n >= j) {
    std::vector<int> pick;
    for_each_subset(n, j, pick, 0, [&](const std::vector<int>& rows) {
      Matrix a(j, j);
      Vector b(j);
      for (int r = 0; r < j; ++r) {
        a.row(r) = p.m.row(rows[static_cast<std::size_t>(r)]);
        b(r) = p.y(rows[static_cast<std::size_t>(r)]);
      }
      Eigen::FullPivLU<Matrix> lu(a);
      if (!lu.isInvertible()) return;
      const Vector u = lu.solve(b);
      radius = std::max(radius, u.cwiseAbs().maxCoeff());
      consider(u);
    });
  }

  // Uniform grid over [-2 radius, 2 radius]^J.
  std::vector<int> counter(static_cast<std::size_t>(j), 0);
  const double h = 4.0 * radius / (grid_points - 1);
  while (true) {
    Vector u(j);
    for (int c = 0; c < j; ++c) u(c) = -2.0 * radius + h * counter[static_cast<std::size_t>(c)];
    consider(u);
    int c = 0;
    while (c < j && ++counter[static_cast<std::size_t>(c)] == grid_points) counter[static_cast<std::size_t>(c++)] = 0;
    if (c == j) break;
  }

  // Damped Newton polish.
  Vector u = best.u;
  for (int it = 0; it < 200; ++it) {
    Vector g = p.mu * u;
    Matrix hess = p.mu * Matrix::Identity(j, j);
    for (Eigen::Index i = 0; i < p.m.rows(); ++i) {
      const double r = p.y(i) - p.m.row(i).dot(u);
      const double s = std::sqrt(r * r + p.eps);
      g -= (r / s) * p.m.row(i).transpose();
      hess += (p.eps / (s * s * s)) * p.m.row(i).transpose() * p.m.row(i);
    }
    const Vector step = -hess.ldlt().solve(g);
    const double current = oracle_loss(u, p);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const Vector trial = u + t * step;
      if (oracle_loss(trial, p) < current) {
        u = trial;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  consider(u);
  return best;
}

}  // namespace robustcp::test
