#include "robustcp/cli.hpp"

#include "robustcp/cp.hpp"
#include "robustcp/evaluation.hpp"
#include "robustcp/io.hpp"
#include "robustcp/l1_regression.hpp"
#include "robustcp/report.hpp"
#include "robustcp/simulation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace robustcp::cli {

namespace fs = std::filesystem;
using io::format_double;

namespace {

// Bad flag combinations found after parsing; reported as usage errors.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct FitFlags {
  std::string method = "cpal1";
  std::size_t rank = 1;
  double eps = 1e-10;
  double mu = 1e-8;
  double outer_tol = 1e-8;
  int max_outer = 500;
  double inner_tol = 1e-9;
  int inner_max_iter = 50;
  std::string init = "nvecs";
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

void add_fit_options(CLI::App& app, FitFlags& f) {
  app.add_option("--eps", f.eps, "Smoothing constant of the l1 loss")->check(CLI::PositiveNumber);
  app.add_option("--mu", f.mu, "Ridge weight of the l1 loss")->check(CLI::PositiveNumber);
  app.add_option("--outer-tol", f.outer_tol, "Relative objective change that ends the sweeps")
      ->check(CLI::PositiveNumber);
  app.add_option("--max-outer", f.max_outer, "Sweep cap")->check(CLI::PositiveNumber);
  app.add_option("--inner-tol", f.inner_tol, "Stopping threshold of each row regression")
      ->check(CLI::PositiveNumber);
  app.add_option("--inner-max-iter", f.inner_max_iter, "MM step cap per row regression")
      ->check(CLI::PositiveNumber);
}

CpOptions to_cp_options(const FitFlags& f) {
  CpOptions o;
  o.rank = f.rank;
  o.eps = f.eps;
  o.mu = f.mu;
  o.outer_tol = f.outer_tol;
  o.max_outer = f.max_outer;
  o.inner.tol = f.inner_tol;
  o.inner.max_iter = f.inner_max_iter;
  if (f.init == "random") o.init = RandomInit{f.seed};
  o.threads = f.threads;
  return o;
}

std::vector<std::pair<std::string, std::string>> fit_manifest_options(const FitFlags& f) {
  return {{"eps", format_double(f.eps)},
          {"mu", format_double(f.mu)},
          {"outer-tol", format_double(f.outer_tol)},
          {"max-outer", std::to_string(f.max_outer)},
          {"inner-tol", format_double(f.inner_tol)},
          {"inner-max-iter", std::to_string(f.inner_max_iter)}};
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>) {
      s += format_double(values[i]);
    } else {
      s += std::to_string(values[i]);
    }
  }
  return s;
}

void save_manifest(const fs::path& path, const report::RunManifest& m) {
  std::ofstream out(path);
  if (!out) throw io::IoError("cannot write " + path.string());
  report::write_manifest(out, m);
  if (!out) throw io::IoError("write failed: " + path.string());
}

fs::path manifest_path(const fs::path& output) { return fs::path(output.string() + ".manifest"); }

// --config FILE is spliced into the argument list right after the subcommand
// name, as --key=value tokens, so later command-line flags override it.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::vector<std::string> configs;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file argument");
      configs.push_back(args[++i]);
    } else if (args[i].rfind("--config=", 0) == 0) {
      configs.push_back(args[i].substr(9));
    } else {
      rest.push_back(args[i]);
    }
  }
  if (configs.empty()) return args;

  std::vector<std::string> injected;
  for (const auto& path : configs) {
    std::ifstream in(path);
    if (!in) throw io::IoError("cannot open config " + path);
    for (auto& [key, value] : report::read_key_values(in)) {
      if (key == "command" || key == "version") continue;
      injected.push_back("--" + key + "=" + value);
    }
  }
  if (rest.empty()) return injected;
  std::vector<std::string> out{rest.front()};
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

// ---------------------------------------------------------------- fit

struct FitCommand {
  std::string tensor;
  std::string out;
  bool force = false;
  FitFlags flags;
};

void register_fit(CLI::App& app, FitCommand& c) {
  auto* sub = app.add_subcommand("fit", "Fit a CP model to a tensor file");
  sub->add_option("tensor,--tensor", c.tensor, "Tensor text file")->required();
  sub->add_option("--method", c.flags.method, "cpal1 or cpals")
      ->check(CLI::IsMember({"cpal1", "cpals"}));
  sub->add_option("--rank,-r", c.flags.rank, "Number of components")->check(CLI::PositiveNumber);
  sub->add_option("--out,-o", c.out, "Write the fitted Kruskal model here");
  sub->add_flag("--force", c.force, "Overwrite an existing model file");
  sub->add_option("--init", c.flags.init, "nvecs or random")->check(CLI::IsMember({"nvecs", "random"}));
  sub->add_option("--seed", c.flags.seed, "Seed for random initialization");
  sub->add_option("--threads", c.flags.threads, "Row-solve workers (0 = auto)");
  add_fit_options(*sub, c.flags);
}

void refuse_existing(const std::string& path, bool force) {
  if (!path.empty() && !force && fs::exists(path)) {
    throw UsageError(path + " exists; pass --force to overwrite");
  }
}

int run_fit(const FitCommand& c, std::ostream& out, std::ostream& err) {
  refuse_existing(c.out, c.force);
  const DenseTensor t = io::load_tensor(c.tensor);
  const std::size_t smallest = *std::min_element(t.shape().begin(), t.shape().end());
  if (c.flags.init == "nvecs" && c.flags.rank > smallest) {
    throw UsageError("rank " + std::to_string(c.flags.rank) + " exceeds the smallest tensor dimension " +
                     std::to_string(smallest) + "; nvecs initialization needs rank <= every dimension");
  }
  const CpOptions opts = to_cp_options(c.flags);
  const bool l1 = c.flags.method == "cpal1";
  const FitResult fit = l1 ? cpal1_fit(t, opts) : cpals_fit(t, opts);
  const double residual = frobenius_norm(subtract(t, reconstruct(fit.model))) / frobenius_norm(t);

  out << "method " << (l1 ? kMethodL1 : kMethodLs) << '\n'
      << "objective " << format_double(fit.objective_history.empty() ? fit.initial_objective
                                                                     : fit.objective_history.back())
      << '\n'
      << "sweeps " << fit.sweeps << '\n'
      << "seconds " << format_double(fit.seconds) << '\n'
      << "relative_residual " << format_double(residual) << '\n'
      << "converged " << (fit.converged ? "true" : "false") << '\n';
  if (!fit.converged) {
    err << "warning: not converged after " << fit.sweeps << " sweeps (outer-tol "
        << format_double(c.flags.outer_tol) << ")\n";
  }

  if (!c.out.empty()) {
    io::save_kruskal(c.out, fit.model);
    report::RunManifest m{"fit", kVersion, {}};
    m.options = {{"tensor", c.tensor},
                 {"out", c.out},
                 {"method", c.flags.method},
                 {"rank", std::to_string(c.flags.rank)},
                 {"init", c.flags.init},
                 {"seed", std::to_string(c.flags.seed)},
                 {"threads", std::to_string(c.flags.threads)}};
    for (auto& kv : fit_manifest_options(c.flags)) m.options.push_back(std::move(kv));
    save_manifest(manifest_path(c.out), m);
  }
  return kOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateCommand {
  // Lists stay strings until after parsing so a repeated flag replaces the
  // earlier value instead of extending it.
  std::string eta_list = "0.1,0.2";
  std::string gamma_list = "1,2";
  std::string dims_list = "20,20,20";
  std::size_t rank = 3;
  double gaussian_level = 0.1;
  std::size_t replicates = 20;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;
  std::string plot;
  std::string from_csv;
  bool force = false;
  bool no_timing = false;
  FitFlags flags;
};

void register_simulate(CLI::App& app, SimulateCommand& c) {
  auto* sub = app.add_subcommand("simulate", "Run the artifact-noise simulation grid");
  sub->add_option("--eta", c.eta_list, "Artifact densities, comma separated");
  sub->add_option("--gamma", c.gamma_list, "Artifact levels, comma separated");
  sub->add_option("--dims", c.dims_list, "Tensor dimensions, comma separated");
  sub->add_option("--rank,-r", c.rank, "True and fitted rank");
  sub->add_option("--gaussian-level", c.gaussian_level, "Gaussian noise level");
  sub->add_option("--replicates,-n", c.replicates, "Replicates per cell");
  sub->add_option("--seed", c.seed, "Base seed");
  sub->add_option("--threads", c.threads, "Replicate workers (0 = auto)");
  sub->add_option("--out,-o", c.out, "CSV output");
  sub->add_option("--plot", c.plot, "SVG boxplot output");
  sub->add_option("--from-csv", c.from_csv, "Plot an existing CSV instead of simulating");
  sub->add_flag("--force", c.force, "Overwrite existing outputs");
  sub->add_flag("--no-timing", c.no_timing, "Write 0 in the seconds column");
  add_fit_options(*sub, c.flags);
}

void write_svg(const std::string& path, const std::vector<ExperimentRecord>& records) {
  std::ofstream svg(path);
  if (!svg) throw io::IoError("cannot write " + path);
  svg << report::render_boxplot_svg(records);
  if (!svg) throw io::IoError("write failed: " + path);
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> values;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const std::size_t end = std::min(text.find(',', begin), text.size());
    T v{};
    const auto [ptr, ec] = std::from_chars(text.data() + begin, text.data() + end, v);
    if (ec != std::errc{} || ptr != text.data() + end) {
      throw UsageError(std::string(flag) + ": invalid list '" + text + "'");
    }
    values.push_back(v);
    begin = end + 1;
  }
  return values;
}

int run_simulate(const SimulateCommand& c, std::ostream& out, std::ostream& err) {
  if (!c.from_csv.empty()) {
    if (c.plot.empty()) throw UsageError("--from-csv needs --plot");
    refuse_existing(c.plot, c.force);
    std::ifstream in(c.from_csv);
    if (!in) throw io::IoError("cannot open " + c.from_csv);
    const auto records = report::read_records_csv(in);
    if (records.empty()) throw UsageError(c.from_csv + " has no records");
    write_svg(c.plot, records);
    out << "plotted " << records.size() << " records to " << c.plot << '\n';
    return kOk;
  }
  if (c.out.empty()) throw UsageError("simulate needs --out");

  const auto etas = parse_list<double>(c.eta_list, "--eta");
  const auto gammas = parse_list<double>(c.gamma_list, "--gamma");
  const auto dims = parse_list<std::size_t>(c.dims_list, "--dims");

  // Every cell is validated before any fit starts.
  std::vector<SimConfig> cells;
  for (double eta : etas) {
    for (double gamma : gammas) {
      SimConfig s;
      s.dims = dims;
      s.rank = c.rank;
      s.eta = eta;
      s.gamma = gamma;
      s.gaussian_level = c.gaussian_level;
      s.replicates = c.replicates;
      s.seed = c.seed;
      s.threads = c.threads;
      s.l1_options = to_cp_options(c.flags);
      s.ls_options = to_cp_options(c.flags);
      s.l1_options.threads = s.ls_options.threads = 1;
      s.validate();
      cells.push_back(std::move(s));
    }
  }
  refuse_existing(c.out, c.force);
  refuse_existing(c.plot, c.force);

  std::vector<ExperimentRecord> records;
  for (const auto& cell : cells) {
    const auto recs = run_experiment(cell);
    std::size_t gaussian_ok = 0, artifact_ok = 0, failures = 0;
    for (std::size_t i = 0; i < recs.size(); i += 2) {
      gaussian_ok += recs[i].gaussian_scale_ok;
      artifact_ok += recs[i].artifact_scale_ok;
    }
    for (const auto& r : recs) {
      if (!r.error.empty()) {
        ++failures;
        err << "error: replicate " << r.replicate << ' ' << r.method << ": " << r.error << '\n';
      }
    }
    err << "eta=" << format_double(cell.eta) << " gamma=" << format_double(cell.gamma)
        << ": gaussian term below max(X) in " << gaussian_ok << '/' << cell.replicates
        << ", artifact term below max(X) in " << artifact_ok << '/' << cell.replicates;
    if (failures) err << ", " << failures << " failed fits";
    err << '\n';
    records.insert(records.end(), recs.begin(), recs.end());
  }

  {
    std::ofstream csv(c.out);
    if (!csv) throw io::IoError("cannot write " + c.out);
    report::write_records_csv(csv, records, !c.no_timing);
    if (!csv) throw io::IoError("write failed: " + c.out);
  }
  if (!c.plot.empty()) write_svg(c.plot, records);

  report::RunManifest m{"simulate", kVersion, {}};
  m.options = {{"eta", join(etas)},
               {"gamma", join(gammas)},
               {"dims", join(dims)},
               {"rank", std::to_string(c.rank)},
               {"gaussian-level", format_double(c.gaussian_level)},
               {"replicates", std::to_string(c.replicates)},
               {"seed", std::to_string(c.seed)},
               {"threads", std::to_string(c.threads)},
               {"out", c.out},
               {"no-timing", c.no_timing ? "true" : "false"}};
  if (!c.plot.empty()) m.options.emplace_back("plot", c.plot);
  for (auto& kv : fit_manifest_options(c.flags)) m.options.push_back(std::move(kv));
  save_manifest(manifest_path(c.out), m);
  out << "wrote " << records.size() << " records to " << c.out << '\n';
  return kOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateCommand {
  std::string estimated;
  std::string truth;
};

void register_evaluate(CLI::App& app, EvaluateCommand& c) {
  auto* sub = app.add_subcommand("evaluate", "Factor match score of two Kruskal models");
  sub->add_option("estimated", c.estimated, "Estimated model file")->required();
  sub->add_option("truth", c.truth, "Reference model file")->required();
}

int run_evaluate(const EvaluateCommand& c, std::ostream& out) {
  const KruskalModel est = io::load_kruskal(c.estimated);
  const KruskalModel truth = io::load_kruskal(c.truth);
  if (est.rank() != truth.rank() || est.shape() != truth.shape()) {
    throw UsageError("models differ in rank or shape: " + c.estimated + " vs " + c.truth);
  }
  const FmsReport r = factor_match_score(est, truth);
  out << format_double(r.score);
  for (double s : r.component_scores) out << ',' << format_double(s);
  out << '\n';
  return kOk;
}

// ---------------------------------------------------------------- l1solve

struct L1SolveCommand {
  std::string problem;
  double eps = 1e-10;
  double mu = 1e-8;
  double tol = 1e-9;
  int max_iter = 100;
};

void register_l1solve(CLI::App& app, L1SolveCommand& c) {
  auto* sub = app.add_subcommand("l1solve", "Solve one smoothed l1 regression");
  sub->group("");
  sub->add_option("problem", c.problem, "Matrix/vector text file")->required();
  sub->add_option("--eps", c.eps)->check(CLI::PositiveNumber);
  sub->add_option("--mu", c.mu)->check(CLI::PositiveNumber);
  sub->add_option("--tol", c.tol)->check(CLI::PositiveNumber);
  sub->add_option("--max-iter", c.max_iter)->check(CLI::PositiveNumber);
}

int run_l1solve(const L1SolveCommand& c, std::ostream& out) {
  std::ifstream in(c.problem);
  if (!in) throw io::IoError("cannot open " + c.problem);
  auto [m, y] = io::read_l1_problem(in);
  const L1Problem p{std::move(y), std::move(m), c.eps, c.mu};
  SolverOptions opts;
  opts.tol = c.tol;
  opts.max_iter = c.max_iter;
  const L1Solution s = solve(p, opts);
  out << "objective " << format_double(smoothed_loss(s.u, p)) << '\n'
      << "iterations " << s.trace.iterations << '\n'
      << "converged " << (s.trace.converged ? "true" : "false") << '\n'
      << "u";
  for (Eigen::Index i = 0; i < s.u.size(); ++i) out << ' ' << format_double(s.u(i));
  out << '\n';
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust CP tensor factorization", "robustcp"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  FitCommand fit;
  SimulateCommand sim;
  EvaluateCommand eval;
  L1SolveCommand l1;
  register_fit(app, fit);
  register_simulate(app, sim);
  register_evaluate(app, eval);
  register_l1solve(app, l1);
  for (auto* sub : app.get_subcommands({})) sub->add_option("--config", "key=value defaults file")->type_name("FILE");

  try {
    std::vector<std::string> expanded = expand_config(args);
    // CLI11 consumes arguments from the back.
    std::reverse(expanded.begin(), expanded.end());
    app.parse(expanded);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kOk : kUsage;
  } catch (const io::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return dynamic_cast<const io::IoError*>(&e) ? kIo : kUsage;
  }

  try {
    if (app.got_subcommand("fit")) return run_fit(fit, out, err);
    if (app.got_subcommand("simulate")) return run_simulate(sim, out, err);
    if (app.got_subcommand("evaluate")) return run_evaluate(eval, out);
    return run_l1solve(l1, out);
  } catch (const io::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const io::IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
}

}  // namespace robustcp::cli
