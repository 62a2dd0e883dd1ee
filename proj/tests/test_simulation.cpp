#include "robustcp/simulation.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace robustcp;

namespace {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

template <typename Range>
Moments moments(const Range& values) {
  double sum = 0.0, sq = 0.0, n = 0.0;
  for (double v : values) {
    sum += v;
    sq += v * v;
    n += 1.0;
  }
  const double mean = sum / n;
  return {mean, sq / n - mean * mean};
}

SimConfig small_config() {
  SimConfig c;
  c.dims = {8, 7, 6};
  c.rank = 2;
  c.eta = 0.2;
  c.gamma = 1.0;
  c.replicates = 2;
  c.seed = 17;
  c.l1_options.max_outer = 30;
  return c;
}

bool same_records(const std::vector<ExperimentRecord>& a, const std::vector<ExperimentRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].replicate != b[i].replicate || a[i].method != b[i].method || a[i].fms != b[i].fms ||
        a[i].sweeps != b[i].sweeps || a[i].converged != b[i].converged) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST(DeriveSeed, distinct_streams_and_replicates) {
  EXPECT_NE(derive_seed(1, 0, 1), derive_seed(1, 1, 1));
  EXPECT_NE(derive_seed(1, 0, 1), derive_seed(1, 0, 2));
  EXPECT_NE(derive_seed(1, 0, 1), derive_seed(2, 0, 1));
  EXPECT_EQ(derive_seed(5, 3, 2), derive_seed(5, 3, 2));
}

TEST(GenerateTrueModel, nonnegative_and_deterministic) {
  Rng a(3), b(3);
  const KruskalModel ka = generate_true_model({5, 6, 7}, 3, a);
  const KruskalModel kb = generate_true_model({5, 6, 7}, 3, b);
  for (std::size_t n = 0; n < 3; ++n) {
    EXPECT_GE(ka.factor(n).minCoeff(), 0.0);
    EXPECT_EQ(ka.factor(n), kb.factor(n));
  }
}

TEST(GenerateTrueModel, half_normal_mean) {
  Rng rng(4);
  const KruskalModel k = generate_true_model({50000, 50000}, 1, rng);
  std::vector<double> all;
  for (const auto& f : k.factors()) all.insert(all.end(), f.data(), f.data() + f.size());
  ASSERT_EQ(all.size(), 100000u);
  EXPECT_NEAR(moments(all).mean, std::sqrt(2.0 / std::numbers::pi), 0.01);
}

TEST(GenerateArtifactTensor, exact_count_and_gamma_moments) {
  Rng rng(5);
  const DenseTensor p = generate_artifact_tensor({500, 400}, 0.5, rng);
  std::vector<double> nonzero;
  for (double v : p.values())
    if (v != 0.0) nonzero.push_back(v);
  ASSERT_EQ(nonzero.size(), 100000u);
  const Moments m = moments(nonzero);
  EXPECT_NEAR(m.mean, 1.0, 0.02);
  EXPECT_NEAR(m.variance, 0.02, 0.2 * 0.02);
  for (double v : nonzero) EXPECT_GT(v, 0.0);
}

TEST(GenerateArtifactTensor, count_rounds_eta_times_size) {
  Rng rng(6);
  const DenseTensor p = generate_artifact_tensor({7, 3, 5}, 0.1, rng);
  std::size_t count = 0;
  for (double v : p.values()) count += v != 0.0;
  EXPECT_EQ(count, static_cast<std::size_t>(std::llround(0.1 * 105)));
  EXPECT_THROW(generate_artifact_tensor({3, 3}, 0.0, rng), std::invalid_argument);
  EXPECT_THROW(generate_artifact_tensor({3, 3}, 1.0, rng), std::invalid_argument);
}

TEST(GenerateGaussianTensor, moments_and_determinism) {
  Rng rng(7);
  const DenseTensor q = generate_gaussian_tensor({100, 100, 10}, rng);
  const Moments m = moments(q.values());
  EXPECT_NEAR(m.mean, 0.0, 0.02);
  EXPECT_NEAR(m.variance, 1.0, 0.02);

  Rng a(8), b(8), c(9);
  const DenseTensor qa = generate_gaussian_tensor({4, 4}, a);
  EXPECT_EQ(qa, generate_gaussian_tensor({4, 4}, b));
  EXPECT_NE(qa, generate_gaussian_tensor({4, 4}, c));
}

TEST(Corrupt, zero_coefficients_leave_data_alone) {
  Rng rng(10);
  const DenseTensor x = reconstruct(generate_true_model({4, 5, 6}, 2, rng));
  const DenseTensor p = generate_artifact_tensor({4, 5, 6}, 0.2, rng);
  const DenseTensor q = generate_gaussian_tensor({4, 5, 6}, rng);
  EXPECT_EQ(corrupt(x, p, q, 0.0, 0.0), x);
}

TEST(Corrupt, artifact_term_norm_and_elementwise) {
  Rng rng(11);
  const Shape dims{6, 5, 4};
  const DenseTensor x = reconstruct(generate_true_model(dims, 2, rng));
  const DenseTensor p = generate_artifact_tensor(dims, 0.1, rng);
  const DenseTensor q = generate_gaussian_tensor(dims, rng);
  const double gamma = 1.5;
  const double nx = frobenius_norm(x);

  const DenseTensor artifact_only = subtract(corrupt(x, p, q, gamma, 0.0), x);
  EXPECT_NEAR(frobenius_norm(artifact_only), gamma * nx, 1e-12 * gamma * nx);

  const DenseTensor mixed = corrupt(x, p, q, gamma, 0.1);
  double np = 0.0, nq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) np += p[i] * p[i], nq += q[i] * q[i];
  np = std::sqrt(np);
  nq = std::sqrt(nq);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double expected = x[i] + gamma * nx / np * p[i] + 0.1 * nx / nq * q[i];
    EXPECT_NEAR(mixed[i], expected, 1e-12 * (1 + std::abs(expected)));
  }
}

TEST(Corrupt, zero_noise_rejected) {
  const DenseTensor x(Shape{2, 2}, {1, 2, 3, 4});
  const DenseTensor zero(Shape{2, 2});
  EXPECT_THROW(corrupt(x, zero, x, 1.0, 0.1), std::invalid_argument);
  EXPECT_THROW(corrupt(x, x, zero, 1.0, 0.1), std::invalid_argument);
  EXPECT_THROW(corrupt(x, DenseTensor(Shape{2, 3}), x, 1.0, 0.1), std::invalid_argument);
}

TEST(CheckArtifactScale, scale_equivariant) {
  Rng rng(12);
  const Shape dims{10, 10, 10};
  DenseTensor x = reconstruct(generate_true_model(dims, 3, rng));
  const DenseTensor p = generate_artifact_tensor(dims, 0.2, rng);
  const DenseTensor q = generate_gaussian_tensor(dims, rng);
  for (double level : {0.1, 1.0, 3.0}) {
    const bool before = check_artifact_scale(x, p, q, 2.0, level);
    DenseTensor big = x;
    for (double& v : big.values()) v *= 1000.0;
    EXPECT_EQ(check_artifact_scale(big, p, q, 2.0, level), before);
  }
  EXPECT_FALSE(check_artifact_scale(x, p, q, 2.0, 100.0));
}

TEST(CheckArtifactScale, holds_at_default_levels) {
  int holds = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Shape dims{20, 20, 20};
    const DenseTensor x = reconstruct(generate_true_model(dims, 3, rng));
    const DenseTensor p = generate_artifact_tensor(dims, 0.2, rng);
    const DenseTensor q = generate_gaussian_tensor(dims, rng);
    holds += check_artifact_scale(x, p, q, 2.0, 0.1);
  }
  EXPECT_GE(holds, 18);
}

TEST(RunExperiment, record_bookkeeping) {
  const SimConfig config = small_config();
  const auto recs = run_experiment(config);
  ASSERT_EQ(recs.size(), 4u);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].replicate, i / 2);
    EXPECT_EQ(recs[i].method, i % 2 == 0 ? kMethodL1 : kMethodLs);
    EXPECT_EQ(recs[i].eta, config.eta);
    EXPECT_EQ(recs[i].gamma, config.gamma);
    EXPECT_GE(recs[i].fms, 0.0);
    EXPECT_LE(recs[i].fms, 1.0);
    EXPECT_TRUE(recs[i].error.empty());
  }
}

TEST(RunExperiment, deterministic_across_threads) {
  SimConfig config = small_config();
  config.replicates = 4;
  const auto sequential = run_experiment(config);
  EXPECT_TRUE(same_records(sequential, run_experiment(config)));
  config.threads = 3;
  EXPECT_TRUE(same_records(sequential, run_experiment(config)));
}

TEST(RunExperiment, noise_free_recovers) {
  SimConfig config;
  config.dims = {12, 12, 12};
  config.rank = 3;
  config.eta = 0.1;
  config.gamma = 0.0;
  config.gaussian_level = 0.0;
  config.replicates = 5;
  config.seed = 3;
  config.l1_options.max_outer = 200;
  int good_l1 = 0, good_ls = 0;
  for (const auto& rec : run_experiment(config)) {
    if (rec.fms >= 0.99) ++(rec.method == kMethodL1 ? good_l1 : good_ls);
  }
  EXPECT_GE(good_l1, 5 * 9 / 10);
  EXPECT_GE(good_ls, 5 * 9 / 10);
}

TEST(SimConfig, validation) {
  SimConfig c = small_config();
  c.eta = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_config();
  c.rank = 9;
  EXPECT_THROW(run_experiment(c), std::invalid_argument);
  c = small_config();
  c.gamma = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_config();
  c.replicates = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
