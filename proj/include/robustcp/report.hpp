#pragma once

#include "robustcp/simulation.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace robustcp::report {

inline constexpr const char* kCsvHeader = "replicate,eta,gamma,method,fms,seconds,sweeps,converged";

/// One CSV field, quoted when it contains a comma, quote or newline.
std::string csv_field(const std::string& value);

/// Header plus one row per record. With `timing` false the seconds column is
/// written as 0 so that output depends only on the inputs.
void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records, bool timing);

/// Parses a file produced by write_records_csv. Throws io::ParseError.
std::vector<ExperimentRecord> read_records_csv(std::istream& in);

struct BoxStats {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  /// Most extreme observations within 1.5 IQR of the box.
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;
  std::size_t count = 0;
};

/// Quartiles by linear interpolation between order statistics. Throws on
/// empty input.
BoxStats box_stats(std::vector<double> values);

/// Grouped boxplot of FMS per (eta, gamma) cell, one box per method, as a
/// standalone SVG document. Each box group carries data-eta, data-gamma,
/// data-method and data-median attributes.
std::string render_boxplot_svg(const std::vector<ExperimentRecord>& records);

/// Reproducibility record written next to every output, in the same flat
/// key=value format the CLI accepts through --config.
struct RunManifest {
  std::string command;
  std::string version;
  std::vector<std::pair<std::string, std::string>> options;
};

void write_manifest(std::ostream& out, const RunManifest& manifest);

/// Flat key=value file: '#' starts a comment line, blank lines are ignored,
/// whitespace around keys and values is trimmed. Throws io::ParseError.
std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in);

}  // namespace robustcp::report
