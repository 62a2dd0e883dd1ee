#pragma once

#include "robustcp/cp.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace robustcp {

using Rng = std::mt19937_64;

/// Independent seed for (replicate, stream) derived from a base seed with
/// SplitMix64 finalization. Replicates can be generated in any order or in
/// parallel and still see the same numbers.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replicate, std::uint64_t stream);

/// Factor entries are |z| with z ~ N(0, 1).
KruskalModel generate_true_model(const Shape& dims, std::size_t rank, Rng& rng);

/// Exactly round(eta * N) entries, drawn uniformly without replacement, hold
/// Gamma(shape 50, scale 1/50) values; all other entries are zero.
DenseTensor generate_artifact_tensor(const Shape& dims, double eta, Rng& rng);

/// I.i.d. standard normal entries.
DenseTensor generate_gaussian_tensor(const Shape& dims, Rng& rng);

/// x + gamma (|x|/|p|) p + gaussian_level (|x|/|q|) q, all norms Frobenius.
DenseTensor corrupt(const DenseTensor& x, const DenseTensor& p, const DenseTensor& q, double gamma,
                    double gaussian_level);

/// True iff every |coef * (|x|/|noise|) * noise| entry is below max(x).
bool scaled_term_below_max(const DenseTensor& x, const DenseTensor& noise, double coef);

/// Diagnostic on the scaled Gaussian term of corrupt().
bool check_artifact_scale(const DenseTensor& x, const DenseTensor& p, const DenseTensor& q,
                          double gamma, double gaussian_level);

struct SimConfig {
  Shape dims{50, 50, 50};
  std::size_t rank = 5;
  double eta = 0.2;
  double gamma = 2.0;
  double gaussian_level = 0.1;
  std::size_t replicates = 100;
  std::uint64_t seed = 1;
  CpOptions l1_options;
  CpOptions ls_options;
  /// Replicate-level workers; fits inside a replicate run single-threaded.
  unsigned threads = 1;

  void validate() const;
};

struct ExperimentRecord {
  std::size_t replicate = 0;
  double eta = 0.0;
  double gamma = 0.0;
  std::string method;
  double fms = 0.0;
  double seconds = 0.0;
  int sweeps = 0;
  bool converged = false;
  bool gaussian_scale_ok = false;
  bool artifact_scale_ok = false;
  /// Non-empty when the fit threw; fms is then 0.
  std::string error;
};

inline constexpr const char* kMethodL1 = "CPAL1";
inline constexpr const char* kMethodLs = "CPALS";

/// Two records (CPAL1 then CPALS) per replicate, ordered by replicate id.
/// The same replicate id yields the same true model and noise draws for
/// every (eta, gamma), so grid cells are paired.
std::vector<ExperimentRecord> run_experiment(const SimConfig& config);

}  // namespace robustcp
