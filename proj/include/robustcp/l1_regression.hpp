#pragma once

#include "robustcp/tensor.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace robustcp {

/// Raised when a linear solve that should be positive definite is not.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Smoothed, ridge-regularized least-absolute-deviations problem:
///
///   L(u) = sum_i sqrt(r_i(u)^2 + eps) + (mu / 2) ||u||^2,   r(u) = y - M u.
///
/// Both eps and mu must be strictly positive; together they make L smooth
/// and strictly convex, so it has a single minimizer.
struct L1Problem {
  Vector y;
  Matrix m;
  double eps = 1e-10;
  double mu = 1e-8;

  Eigen::Index rows() const noexcept { return m.rows(); }
  Eigen::Index unknowns() const noexcept { return m.cols(); }

  /// Throws std::invalid_argument when the fields are inconsistent.
  void validate() const;
};

struct SolverOptions {
  /// Converged once |L_k - L_{k+1}| / (1 + |L_k|) < tol.
  double tol = 1e-9;
  int max_iter = 100;
  std::optional<Vector> initial;
  /// Also require |grad L(u_k)| <= tol * (1 + |grad L(u_0)|) before declaring
  /// convergence. The objective test alone can stop with a gradient on the
  /// order of sqrt(tol) when the MM rate is slow.
  bool require_stationarity = true;

  void validate() const;
};

struct SolveTrace {
  /// objectives[0] is the loss at the starting point; one entry per step
  /// after, each obtained by adding the step's loss change computed in a
  /// cancellation-free form.
  std::vector<double> objectives;
  int iterations = 0;
  bool converged = false;
};

struct L1Solution {
  Vector u;
  SolveTrace trace;
};

Vector residuals(const Vector& u, const L1Problem& p);

double smoothed_loss(const Vector& u, const L1Problem& p);

/// Analytic gradient of smoothed_loss: -M^T (r / sqrt(r^2 + eps)) + mu u.
Vector smoothed_loss_gradient(const Vector& u, const L1Problem& p);

/// Quadratic surrogate of smoothed_loss that touches it at `anchor` and lies
/// above it everywhere.
double majorizer(const Vector& u, const Vector& anchor, const L1Problem& p);

/// Exact minimizer of majorizer(., u_current): solves
/// (M^T W M + mu I) u = M^T W y with W_ii = (r_i(u_current)^2 + eps)^(-1/2).
/// W is applied row-wise and never formed. Throws NumericalError if the
/// Cholesky factorization fails.
Vector mm_step(const Vector& u_current, const L1Problem& p);

/// Iterates mm_step from opts.initial (zero when absent). A step that would
/// raise the loss through rounding is rejected and ends the iteration, so
/// the trace is non-increasing. Hitting max_iter leaves converged false.
/// A rejected step counts as convergence only when the stationarity test
/// (if enabled) passes.
L1Solution solve(const L1Problem& p, const SolverOptions& opts = {});

}  // namespace robustcp
