#include "robustcp/l1_regression.hpp"

#include <cmath>
#include <string>

namespace robustcp {

void L1Problem::validate() const {
  if (!(eps > 0.0)) throw std::invalid_argument("L1Problem: eps must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("L1Problem: mu must be positive");
  if (y.size() != m.rows()) {
    throw std::invalid_argument("L1Problem: y has length " + std::to_string(y.size()) +
                                " but M has " + std::to_string(m.rows()) + " rows");
  }
  if (m.rows() < 1 || m.cols() < 1) throw std::invalid_argument("L1Problem: empty design matrix");
}

void SolverOptions::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("SolverOptions: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("SolverOptions: max_iter must be at least 1");
}

namespace {

void check_length(const Vector& u, const L1Problem& p) {
  if (u.size() != p.unknowns()) {
    throw std::invalid_argument("vector of length " + std::to_string(u.size()) +
                                " does not match " + std::to_string(p.unknowns()) + " unknowns");
  }
}

// L(next) - L(current) without subtracting two rounded totals:
// sqrt(a^2 + e) - sqrt(b^2 + e) = (a - b)(a + b) / (sqrt(a^2 + e) + sqrt(b^2 + e)).
double loss_change(const Vector& next, const Vector& current, const L1Problem& p) {
  const Vector step = next - current;
  const Eigen::ArrayXd r = (p.y - p.m * current).array();
  const Eigen::ArrayXd dr = -(p.m * step).array();
  const Eigen::ArrayXd rn = r + dr;
  const Eigen::ArrayXd denom = (rn.square() + p.eps).sqrt() + (r.square() + p.eps).sqrt();
  return (dr * (rn + r) / denom).sum() + 0.5 * p.mu * step.dot(next + current);
}

}  // namespace

Vector residuals(const Vector& u, const L1Problem& p) {
  check_length(u, p);
  return p.y - p.m * u;
}

double smoothed_loss(const Vector& u, const L1Problem& p) {
  const Vector r = residuals(u, p);
  return (r.array().square() + p.eps).sqrt().sum() + 0.5 * p.mu * u.squaredNorm();
}

Vector smoothed_loss_gradient(const Vector& u, const L1Problem& p) {
  const Vector r = residuals(u, p);
  const Vector psi = r.array() / (r.array().square() + p.eps).sqrt();
  return -p.m.transpose() * psi + p.mu * u;
}

double majorizer(const Vector& u, const Vector& anchor, const L1Problem& p) {
  check_length(anchor, p);
  const Vector r = residuals(u, p);
  const Vector ra = residuals(anchor, p);
  const Eigen::ArrayXd root = (ra.array().square() + p.eps).sqrt();
  const double body = (root + (r.array().square() - ra.array().square()) / (2.0 * root)).sum();
  return body + 0.5 * p.mu * u.squaredNorm();
}

Vector mm_step(const Vector& u_current, const L1Problem& p) {
  const Vector r = residuals(u_current, p);
  const Vector w = (r.array().square() + p.eps).rsqrt();
  const Matrix wm = w.asDiagonal() * p.m;
  Matrix gram = p.m.transpose() * wm;
  gram.diagonal().array() += p.mu;
  const Vector rhs = wm.transpose() * p.y;

  const Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("mm_step: weighted normal equations are not positive definite");
  }
  Vector next = llt.solve(rhs);
  if (!next.allFinite()) throw NumericalError("mm_step: non-finite update");
  return next;
}

L1Solution solve(const L1Problem& p, const SolverOptions& opts) {
  p.validate();
  opts.validate();

  L1Solution out;
  if (opts.initial) {
    check_length(*opts.initial, p);
    out.u = *opts.initial;
  } else {
    out.u = Vector::Zero(p.unknowns());
  }

  const double grad_limit =
      opts.require_stationarity ? opts.tol * (1.0 + smoothed_loss_gradient(out.u, p).norm()) : 0.0;
  const auto stationary = [&](const Vector& u) {
    return !opts.require_stationarity || smoothed_loss_gradient(u, p).norm() <= grad_limit;
  };

  double loss = smoothed_loss(out.u, p);
  out.trace.objectives.push_back(loss);
  for (int k = 0; k < opts.max_iter; ++k) {
    Vector next = mm_step(out.u, p);
    const double delta = loss_change(next, out.u, p);
    if (delta > 0.0) {
      // Only reachable through rounding once the iterates have settled.
      out.trace.converged = stationary(out.u);
      break;
    }
    const double change = -delta / (1.0 + std::abs(loss));
    out.u = std::move(next);
    loss += delta;
    out.trace.objectives.push_back(loss);
    ++out.trace.iterations;
    if (change < opts.tol && stationary(out.u)) {
      out.trace.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace robustcp
