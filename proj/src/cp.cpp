#include "robustcp/cp.hpp"

#include "parallel.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace robustcp {

namespace {

using Clock = std::chrono::steady_clock;

void validate_common(const DenseTensor& t, const CpOptions& opts) {
  if (opts.rank < 1) throw std::invalid_argument("rank must be at least 1");
  if (!(opts.outer_tol > 0.0)) throw std::invalid_argument("outer_tol must be positive");
  if (opts.max_outer < 1) throw std::invalid_argument("max_outer must be at least 1");
  if (t.order() < 2) throw std::invalid_argument("tensor order must be at least 2");
}

double relative_change(double previous, double current) {
  return std::abs(previous - current) / (1.0 + std::abs(previous));
}

std::vector<Matrix> all_unfoldings(const DenseTensor& t) {
  std::vector<Matrix> out;
  out.reserve(t.order());
  for (std::size_t n = 0; n < t.order(); ++n) out.push_back(matricize(t, n));
  return out;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

Matrix nvecs_init(const DenseTensor& t, std::size_t mode, std::size_t r) {
  if (mode >= t.order()) throw std::out_of_range("nvecs_init: mode out of range");
  const std::size_t dim = t.dim(mode);
  if (r < 1 || r > dim) {
    throw std::invalid_argument("nvecs initialization needs rank <= mode size: rank " +
                                std::to_string(r) + " exceeds dimension " + std::to_string(dim) +
                                " of mode " + std::to_string(mode + 1));
  }
  const Matrix unfolded = matricize(t, mode);
  const Matrix gram = unfolded * unfolded.transpose();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) throw NumericalError("nvecs_init: eigen-decomposition failed");
  const auto& values = eig.eigenvalues();  // ascending
  if (!(values(values.size() - 1) > 0.0)) {
    throw std::invalid_argument("nvecs_init: unfolding of mode " + std::to_string(mode + 1) +
                                " is identically zero");
  }
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix out(d, static_cast<Eigen::Index>(r));
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    Vector v = eig.eigenvectors().col(d - 1 - c);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    out.col(c) = v;
  }
  return out;
}

KruskalModel initial_model(const DenseTensor& t, const CpOptions& opts) {
  const auto r = static_cast<Eigen::Index>(opts.rank);
  return std::visit(
      [&](const auto& init) -> KruskalModel {
        using T = std::decay_t<decltype(init)>;
        if constexpr (std::is_same_v<T, NvecsInit>) {
          std::vector<Matrix> factors;
          for (std::size_t n = 0; n < t.order(); ++n) factors.push_back(nvecs_init(t, n, opts.rank));
          return KruskalModel(std::move(factors));
        } else if constexpr (std::is_same_v<T, RandomInit>) {
          std::mt19937_64 rng(init.seed);
          std::uniform_real_distribution<double> unif(0.0, 1.0);
          std::vector<Matrix> factors;
          for (std::size_t n = 0; n < t.order(); ++n) {
            Matrix f(static_cast<Eigen::Index>(t.dim(n)), r);
            for (Eigen::Index i = 0; i < f.rows(); ++i)
              for (Eigen::Index c = 0; c < r; ++c) f(i, c) = unif(rng);
            factors.push_back(std::move(f));
          }
          return KruskalModel(std::move(factors));
        } else {
          if (!init.compatible_with(t.shape()) || init.rank() != opts.rank) {
            throw std::invalid_argument("provided initial model does not match tensor shape and rank");
          }
          return init;
        }
      },
      opts.init);
}

Matrix update_factor_l1(const Matrix& unfolded, const KruskalModel& k, std::size_t mode,
                        const CpOptions& opts, std::span<const std::size_t> row_order) {
  const Matrix design = khatri_rao_all_but(k, mode);
  const Matrix& current = k.factor(mode);
  if (unfolded.rows() != current.rows() || unfolded.cols() != design.rows()) {
    throw std::invalid_argument("update_factor_l1: unfolding does not match model");
  }
  Matrix next(current.rows(), current.cols());
  detail::parallel_for(row_order.size(), opts.threads, [&](std::size_t j) {
    const auto i = static_cast<Eigen::Index>(row_order[j]);
    L1Problem problem{unfolded.row(i).transpose(), design, opts.eps, opts.mu};
    SolverOptions inner = opts.inner;
    inner.initial = current.row(i).transpose();
    next.row(i) = solve(problem, inner).u.transpose();
  });
  return next;
}

Matrix update_factor_l1(const DenseTensor& t, const KruskalModel& k, std::size_t mode,
                        const CpOptions& opts) {
  if (!k.compatible_with(t.shape())) throw std::invalid_argument("model and tensor shapes differ");
  std::vector<std::size_t> order(t.dim(mode));
  std::iota(order.begin(), order.end(), std::size_t{0});
  return update_factor_l1(matricize(t, mode), k, mode, opts, order);
}

FitResult cpal1_fit(const DenseTensor& t, const CpOptions& opts) {
  validate_common(t, opts);
  if (!(opts.eps > 0.0) || !(opts.mu > 0.0)) {
    throw std::invalid_argument("CPAL1 needs eps > 0 and mu > 0");
  }
  const auto start = Clock::now();
  const auto unfoldings = all_unfoldings(t);
  FitResult result{initial_model(t, opts), 0.0, {}, 0, false, 0.0};
  result.initial_objective = smoothed_l1_objective(t, result.model, opts.eps, opts.mu);

  std::vector<std::vector<std::size_t>> orders(t.order());
  for (std::size_t n = 0; n < t.order(); ++n) {
    orders[n].resize(t.dim(n));
    std::iota(orders[n].begin(), orders[n].end(), std::size_t{0});
  }

  double previous = result.initial_objective;
  for (int sweep = 0; sweep < opts.max_outer; ++sweep) {
    for (std::size_t n = 0; n < t.order(); ++n) {
      result.model.set_factor(n, update_factor_l1(unfoldings[n], result.model, n, opts, orders[n]));
    }
    const double objective = smoothed_l1_objective(t, result.model, opts.eps, opts.mu);
    result.objective_history.push_back(objective);
    ++result.sweeps;
    if (relative_change(previous, objective) < opts.outer_tol) {
      result.converged = true;
      break;
    }
    previous = objective;
  }
  result.seconds = seconds_since(start);
  return result;
}

Matrix spd_pseudo_inverse(const Matrix& gamma, double rel_threshold) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(gamma);
  if (eig.info() != Eigen::Success) throw NumericalError("pseudo-inverse: eigen-decomposition failed");
  const Vector& values = eig.eigenvalues();
  const double cutoff = rel_threshold * values.maxCoeff();
  Vector inv = Vector::Zero(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) > cutoff && values(i) > 0.0) inv(i) = 1.0 / values(i);
  }
  const Matrix& vecs = eig.eigenvectors();
  return vecs * inv.asDiagonal() * vecs.transpose();
}

FitResult cpals_fit(const DenseTensor& t, const CpOptions& opts) {
  validate_common(t, opts);
  const auto start = Clock::now();
  const auto unfoldings = all_unfoldings(t);
  FitResult result{initial_model(t, opts), 0.0, {}, 0, false, 0.0};
  const auto residual = [&] { return frobenius_norm(subtract(t, reconstruct(result.model))); };
  result.initial_objective = residual();

  const auto r = static_cast<Eigen::Index>(opts.rank);
  double previous = result.initial_objective;
  for (int sweep = 0; sweep < opts.max_outer; ++sweep) {
    for (std::size_t n = 0; n < t.order(); ++n) {
      Matrix gamma = Matrix::Ones(r, r);
      for (std::size_t m = 0; m < t.order(); ++m) {
        if (m == n) continue;
        const Matrix& f = result.model.factor(m);
        gamma = gamma.cwiseProduct(f.transpose() * f);
      }
      const Matrix mttkrp = unfoldings[n] * khatri_rao_all_but(result.model, n);
      result.model.set_factor(n, mttkrp * spd_pseudo_inverse(gamma));
    }
    const double objective = residual();
    result.objective_history.push_back(objective);
    ++result.sweeps;
    if (relative_change(previous, objective) < opts.outer_tol) {
      result.converged = true;
      break;
    }
    previous = objective;
  }
  result.seconds = seconds_since(start);
  return result;
}

}  // namespace robustcp
