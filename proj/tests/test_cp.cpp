#include "robustcp/cp.hpp"
#include "robustcp/evaluation.hpp"
#include "robustcp/simulation.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace robustcp;
using robustcp::test::random_model;
using robustcp::test::random_tensor;

namespace {

KruskalModel half_normal_model(const Shape& dims, std::size_t rank, std::uint64_t seed) {
  Rng rng(seed);
  return generate_true_model(dims, rank, rng);
}

CpOptions options(std::size_t rank) {
  CpOptions o;
  o.rank = rank;
  return o;
}

}  // namespace

TEST(NvecsInit, rank_one_tensor) {
  const KruskalModel k = half_normal_model({5, 4, 3}, 1, 1);
  const Matrix v = nvecs_init(reconstruct(k), 0, 1);
  const Vector a = k.factor(0).col(0).normalized();
  EXPECT_NEAR(std::abs(v.col(0).dot(a)), 1.0, 1e-12);
}

TEST(NvecsInit, orthonormal_with_dense_svd_singular_values) {
  std::mt19937_64 rng(2);
  const DenseTensor t = random_tensor(rng, {6, 5, 4});
  const Matrix v = nvecs_init(t, 1, 2);
  ASSERT_EQ(v.rows(), 5);
  ASSERT_EQ(v.cols(), 2);
  EXPECT_LE((v.transpose() * v - Matrix::Identity(2, 2)).norm(), 1e-10);

  const Matrix unfolded = matricize(t, 1);
  const Eigen::JacobiSVD<Matrix> svd(unfolded);
  for (Eigen::Index c = 0; c < 2; ++c) {
    const double sigma = (unfolded.transpose() * v.col(c)).norm();
    EXPECT_NEAR(sigma, svd.singularValues()(c), 1e-10 * svd.singularValues()(0));
  }
}

TEST(NvecsInit, errors) {
  EXPECT_THROW(nvecs_init(DenseTensor(Shape{3, 3, 3}), 0, 1), std::invalid_argument);
  std::mt19937_64 rng(3);
  const DenseTensor t = random_tensor(rng, {3, 4, 5});
  try {
    nvecs_init(t, 0, 4);
    FAIL() << "expected rank check";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("rank"), std::string::npos);
  }
}

TEST(UpdateFactorL1, true_model_is_a_fixed_point) {
  const KruskalModel k = half_normal_model({6, 5, 4}, 2, 4);
  const DenseTensor t = reconstruct(k);
  for (std::size_t n = 0; n < 3; ++n) {
    const Matrix next = update_factor_l1(t, k, n, options(2));
    EXPECT_LE((next - k.factor(n)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(UpdateFactorL1, single_row_mode_is_one_regression) {
  std::mt19937_64 rng(5);
  const DenseTensor t = random_tensor(rng, {1, 3, 4});
  const KruskalModel k = random_model(rng, {1, 3, 4}, 2);
  const CpOptions opts = options(2);
  const Matrix next = update_factor_l1(t, k, 0, opts);

  L1Problem p{matricize(t, 0).row(0).transpose(), khatri_rao(k.factor(2), k.factor(1)), opts.eps, opts.mu};
  SolverOptions inner = opts.inner;
  inner.initial = k.factor(0).row(0).transpose();
  EXPECT_EQ(next.row(0), solve(p, inner).u.transpose());
}

TEST(UpdateFactorL1, rows_match_direct_solves) {
  std::mt19937_64 rng(6);
  const DenseTensor t = random_tensor(rng, {4, 3, 2});
  const KruskalModel k = random_model(rng, {4, 3, 2}, 2);
  const CpOptions opts = options(2);
  const Matrix next = update_factor_l1(t, k, 0, opts);
  const Matrix unfolded = matricize(t, 0);
  const Matrix design = khatri_rao(k.factor(2), k.factor(1));
  for (Eigen::Index i = 0; i < 4; ++i) {
    L1Problem p{unfolded.row(i).transpose(), design, opts.eps, opts.mu};
    SolverOptions inner = opts.inner;
    inner.initial = k.factor(0).row(i).transpose();
    EXPECT_EQ(next.row(i), solve(p, inner).u.transpose());
  }
}

TEST(UpdateFactorL1, row_order_and_threads_do_not_matter) {
  std::mt19937_64 rng(7);
  const DenseTensor t = random_tensor(rng, {9, 6, 5});
  const KruskalModel k = random_model(rng, {9, 6, 5}, 3);
  CpOptions opts = options(3);
  const Matrix unfolded = matricize(t, 0);
  std::vector<std::size_t> order(9);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const Matrix sequential = update_factor_l1(unfolded, k, 0, opts, order);

  std::shuffle(order.begin(), order.end(), rng);
  EXPECT_EQ(update_factor_l1(unfolded, k, 0, opts, order), sequential);
  opts.threads = 4;
  EXPECT_EQ(update_factor_l1(unfolded, k, 0, opts, order), sequential);
}

TEST(Cpal1Fit, noise_free_recovery) {
  const KruskalModel truth = half_normal_model({15, 15, 15}, 3, 8);
  const FitResult fit = cpal1_fit(reconstruct(truth), options(3));
  EXPECT_GE(factor_match_score(fit.model, truth).score, 0.99);
}

TEST(Cpal1Fit, rank_one_recovery) {
  const KruskalModel truth = half_normal_model({7, 6, 5}, 1, 9);
  const FitResult fit = cpal1_fit(reconstruct(truth), options(1));
  EXPECT_GE(factor_match_score(fit.model, truth).score, 0.999);
}

TEST(Cpal1Fit, sweeps_are_monotone) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 4; ++trial) {
    const DenseTensor t = random_tensor(rng, {6, 5, 4});
    CpOptions opts = options(2);
    opts.init = RandomInit{static_cast<std::uint64_t>(trial)};
    opts.max_outer = 40;
    const FitResult fit = cpal1_fit(t, opts);
    double previous = fit.initial_objective;
    for (double obj : fit.objective_history) {
      EXPECT_LE(obj, previous * (1 + 1e-10));
      previous = obj;
    }
    EXPECT_EQ(fit.objective_history.size(), static_cast<std::size_t>(fit.sweeps));
  }
}

TEST(Cpal1Fit, deterministic) {
  std::mt19937_64 rng(11);
  const DenseTensor t = random_tensor(rng, {5, 5, 5});
  CpOptions opts = options(2);
  opts.init = RandomInit{42};
  opts.max_outer = 20;
  const FitResult a = cpal1_fit(t, opts);
  opts.threads = 3;
  const FitResult b = cpal1_fit(t, opts);
  EXPECT_EQ(a.objective_history, b.objective_history);
  for (std::size_t n = 0; n < 3; ++n) EXPECT_EQ(a.model.factor(n), b.model.factor(n));
}

TEST(Cpal1Fit, option_errors) {
  std::mt19937_64 rng(12);
  const DenseTensor t = random_tensor(rng, {3, 4, 5});
  EXPECT_THROW(cpal1_fit(t, options(4)), std::invalid_argument);
  CpOptions opts = options(2);
  opts.mu = 0.0;
  EXPECT_THROW(cpal1_fit(t, opts), std::invalid_argument);
  opts = options(0);
  EXPECT_THROW(cpal1_fit(t, opts), std::invalid_argument);
  opts = options(2);
  opts.init = random_model(rng, {3, 4, 6}, 2);
  EXPECT_THROW(cpal1_fit(t, opts), std::invalid_argument);
}

TEST(Cpal1Fit, provided_initial_model_is_used) {
  const KruskalModel truth = half_normal_model({5, 4, 3}, 2, 13);
  CpOptions opts = options(2);
  opts.init = truth;
  opts.max_outer = 1;
  const FitResult fit = cpal1_fit(reconstruct(truth), opts);
  EXPECT_LE((fit.model.factor(0) - truth.factor(0)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(CpalsFit, noise_free_recovery) {
  const KruskalModel truth = half_normal_model({12, 11, 10}, 3, 14);
  const DenseTensor t = reconstruct(truth);
  const FitResult fit = cpals_fit(t, options(3));
  EXPECT_LT(fit.objective_history.back() / frobenius_norm(t), 1e-8);
  EXPECT_GE(factor_match_score(fit.model, truth).score, 0.99);
  EXPECT_TRUE(fit.converged);
}

TEST(CpalsFit, noise_free_residual_decreases) {
  const KruskalModel truth = half_normal_model({10, 10, 10}, 3, 15);
  const FitResult fit = cpals_fit(reconstruct(truth), options(3));
  double previous = fit.initial_objective;
  int violations = 0;
  for (double obj : fit.objective_history) {
    // Non-monotone steps at rounding level are tolerated, not failures.
    if (obj > previous && obj - previous > 1e-12 * (1 + previous)) ++violations;
    previous = obj;
  }
  EXPECT_EQ(violations, 0);
}

TEST(CpalsFit, rank_exceeding_dimension) {
  std::mt19937_64 rng(16);
  EXPECT_THROW(cpals_fit(random_tensor(rng, {2, 5, 5}), options(3)), std::invalid_argument);
}

TEST(SpdPseudoInverse, drops_null_space) {
  Matrix g = Matrix::Zero(2, 2);
  g(0, 0) = 4.0;
  const Matrix p = spd_pseudo_inverse(g);
  EXPECT_NEAR(p(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(p(1, 1), 0.0, 1e-15);
}

TEST(Comparison, gaussian_noise_only_is_a_draw) {
  SimConfig config;
  config.dims = {12, 12, 12};
  config.rank = 3;
  config.eta = 0.1;
  config.gamma = 0.0;
  config.gaussian_level = 0.1;
  config.replicates = 5;
  config.seed = 99;
  config.l1_options.max_outer = 200;
  std::vector<double> l1, ls;
  for (const auto& rec : run_experiment(config)) (rec.method == kMethodL1 ? l1 : ls).push_back(rec.fms);
  std::sort(l1.begin(), l1.end());
  std::sort(ls.begin(), ls.end());
  EXPECT_NEAR(l1[2], ls[2], 0.05);
}

TEST(Comparison, artifacts_hurt_least_squares_more) {
  SimConfig config;
  config.dims = {20, 20, 20};
  config.rank = 3;
  config.eta = 0.2;
  config.gamma = 2.0;
  config.replicates = 1;
  config.seed = 5;
  const auto recs = run_experiment(config);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_GT(recs[0].fms, recs[1].fms);
}
