#include "robustcp/simulation.hpp"

#include "parallel.hpp"
#include "robustcp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace robustcp {

namespace {

enum Stream : std::uint64_t { kModelStream = 1, kArtifactStream = 2, kGaussianStream = 3 };

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double max_value(const DenseTensor& t) {
  const auto v = t.values();
  return *std::max_element(v.begin(), v.end());
}

ExperimentRecord fit_and_score(const DenseTensor& data, const KruskalModel& truth,
                               const SimConfig& config, std::size_t replicate, bool l1) {
  ExperimentRecord rec;
  rec.replicate = replicate;
  rec.eta = config.eta;
  rec.gamma = config.gamma;
  rec.method = l1 ? kMethodL1 : kMethodLs;
  CpOptions opts = l1 ? config.l1_options : config.ls_options;
  opts.rank = config.rank;
  opts.threads = 1;
  try {
    const FitResult fit = l1 ? cpal1_fit(data, opts) : cpals_fit(data, opts);
    rec.fms = factor_match_score(fit.model, truth).score;
    rec.seconds = fit.seconds;
    rec.sweeps = fit.sweeps;
    rec.converged = fit.converged;
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replicate, std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(base) ^ replicate) ^ stream);
}

KruskalModel generate_true_model(const Shape& dims, std::size_t rank, Rng& rng) {
  if (rank < 1) throw std::invalid_argument("rank must be at least 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Matrix> factors;
  for (std::size_t d : dims) {
    Matrix f(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(rank));
    for (Eigen::Index c = 0; c < f.cols(); ++c)
      for (Eigen::Index i = 0; i < f.rows(); ++i) f(i, c) = std::abs(normal(rng));
    factors.push_back(std::move(f));
  }
  return KruskalModel(std::move(factors));
}

DenseTensor generate_artifact_tensor(const Shape& dims, double eta, Rng& rng) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
  DenseTensor p(dims);
  const std::size_t total = p.size();
  const auto count = static_cast<std::size_t>(std::llround(eta * static_cast<double>(total)));

  std::vector<std::size_t> positions(total);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  std::gamma_distribution<double> artifact(50.0, 1.0 / 50.0);
  // Partial Fisher-Yates: the first `count` slots become a uniform sample.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, total - 1);
    std::swap(positions[i], positions[pick(rng)]);
    p[positions[i]] = artifact(rng);
  }
  return p;
}

DenseTensor generate_gaussian_tensor(const Shape& dims, Rng& rng) {
  DenseTensor q(dims);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : q.values()) v = normal(rng);
  return q;
}

DenseTensor corrupt(const DenseTensor& x, const DenseTensor& p, const DenseTensor& q, double gamma,
                    double gaussian_level) {
  if (x.shape() != p.shape() || x.shape() != q.shape()) {
    throw std::invalid_argument("corrupt: tensors must share a shape");
  }
  const double nx = frobenius_norm(x);
  const double np = frobenius_norm(p);
  const double nq = frobenius_norm(q);
  if (!(np > 0.0) || !(nq > 0.0)) throw std::invalid_argument("corrupt: noise tensor has zero norm");
  const double cp = gamma * nx / np;
  const double cq = gaussian_level * nx / nq;
  DenseTensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + cp * p[i] + cq * q[i];
  return out;
}

bool scaled_term_below_max(const DenseTensor& x, const DenseTensor& noise, double coef) {
  if (x.shape() != noise.shape()) throw std::invalid_argument("shape mismatch");
  const double nn = frobenius_norm(noise);
  if (!(nn > 0.0)) throw std::invalid_argument("noise tensor has zero norm");
  const double scale = std::abs(coef) * frobenius_norm(x) / nn;
  const auto v = noise.values();
  double largest = 0.0;
  for (double e : v) largest = std::max(largest, std::abs(e));
  return scale * largest < max_value(x);
}

bool check_artifact_scale(const DenseTensor& x, const DenseTensor& p, const DenseTensor& q,
                          double /*gamma*/, double gaussian_level) {
  if (p.shape() != x.shape()) throw std::invalid_argument("shape mismatch");
  return scaled_term_below_max(x, q, gaussian_level);
}

void SimConfig::validate() const {
  if (dims.size() < 2) throw std::invalid_argument("dims must have at least two entries");
  if (rank < 1) throw std::invalid_argument("rank must be at least 1");
  for (std::size_t d : dims) {
    if (d < rank) {
      throw std::invalid_argument("every dimension must be >= rank for nvecs initialization");
    }
  }
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
  if (!(gaussian_level >= 0.0)) throw std::invalid_argument("gaussian level must be nonnegative");
  if (replicates < 1) throw std::invalid_argument("replicates must be at least 1");
}

std::vector<ExperimentRecord> run_experiment(const SimConfig& config) {
  config.validate();
  std::vector<ExperimentRecord> records(2 * config.replicates);
  detail::parallel_for(config.replicates, config.threads, [&](std::size_t rep) {
    Rng model_rng(derive_seed(config.seed, rep, kModelStream));
    Rng artifact_rng(derive_seed(config.seed, rep, kArtifactStream));
    Rng gaussian_rng(derive_seed(config.seed, rep, kGaussianStream));
    const KruskalModel truth = generate_true_model(config.dims, config.rank, model_rng);
    const DenseTensor x = reconstruct(truth);
    const DenseTensor p = generate_artifact_tensor(config.dims, config.eta, artifact_rng);
    const DenseTensor q = generate_gaussian_tensor(config.dims, gaussian_rng);
    const DenseTensor data = corrupt(x, p, q, config.gamma, config.gaussian_level);
    const bool gaussian_ok = check_artifact_scale(x, p, q, config.gamma, config.gaussian_level);
    const bool artifact_ok = scaled_term_below_max(x, p, config.gamma);

    for (int m = 0; m < 2; ++m) {
      ExperimentRecord rec = fit_and_score(data, truth, config, rep, m == 0);
      rec.gaussian_scale_ok = gaussian_ok;
      rec.artifact_scale_ok = artifact_ok;
      records[2 * rep + static_cast<std::size_t>(m)] = std::move(rec);
    }
  });
  return records;
}

}  // namespace robustcp
