#pragma once

#include "robustcp/kruskal.hpp"
#include "robustcp/l1_regression.hpp"

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace robustcp {

/// Leading left singular vectors of each mode unfolding.
struct NvecsInit {};

/// Entries i.i.d. uniform(0, 1) from a seeded generator.
struct RandomInit {
  std::uint64_t seed = 0;
};

using InitStrategy = std::variant<NvecsInit, RandomInit, KruskalModel>;

struct CpOptions {
  std::size_t rank = 1;
  double eps = 1e-10;
  double mu = 1e-8;
  /// Relative objective change across one full sweep.
  double outer_tol = 1e-8;
  int max_outer = 500;
  /// Per-row MM solves; the initial point is always the current row. Rows
  /// stop on objective change alone: any number of MM steps keeps the sweep
  /// monotone.
  SolverOptions inner{1e-9, 50, std::nullopt, false};
  InitStrategy init = NvecsInit{};
  /// Workers for the independent row solves; 0 picks hardware concurrency.
  unsigned threads = 1;
};

struct FitResult {
  KruskalModel model;
  /// Objective before the first sweep.
  double initial_objective = 0.0;
  /// Objective after each sweep (smoothed l1 for CPAL1, Frobenius residual
  /// for CPALS).
  std::vector<double> objective_history;
  int sweeps = 0;
  bool converged = false;
  double seconds = 0.0;
};

/// I_n x r matrix with orthonormal columns spanning the dominant left
/// singular subspace of matricize(t, mode). Computed from the eigenvectors
/// of the Gram matrix X_(n) X_(n)^T; each column is signed so its largest
/// magnitude entry is positive.
Matrix nvecs_init(const DenseTensor& t, std::size_t mode, std::size_t r);

/// Initial model for `t` according to opts.init.
KruskalModel initial_model(const DenseTensor& t, const CpOptions& opts);

/// New factor `mode` for CPAL1: row i is the smoothed l1 regression of row i
/// of X_(n) on khatri_rao_all_but(k, mode), warm-started at the current row.
Matrix update_factor_l1(const DenseTensor& t, const KruskalModel& k, std::size_t mode,
                        const CpOptions& opts);

/// Same, on a precomputed unfolding and with rows visited in `row_order`.
/// Rows are independent so the order never changes the result.
Matrix update_factor_l1(const Matrix& unfolded, const KruskalModel& k, std::size_t mode,
                        const CpOptions& opts, std::span<const std::size_t> row_order);

FitResult cpal1_fit(const DenseTensor& t, const CpOptions& opts);

/// Alternating least squares baseline: factor n <- X_(n) Z pinv(Gamma), with
/// Gamma the Hadamard product of the other factors' Gram matrices.
FitResult cpals_fit(const DenseTensor& t, const CpOptions& opts);

/// Pseudo-inverse of a symmetric positive semidefinite matrix, dropping
/// eigenvalues at or below rel_threshold * max eigenvalue.
Matrix spd_pseudo_inverse(const Matrix& gamma, double rel_threshold = 1e-12);

}  // namespace robustcp
