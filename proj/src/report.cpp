#include "robustcp/report.hpp"

#include "robustcp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace robustcp::report {

using io::format_double;
using io::ParseError;

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records, bool timing) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.replicate << ',' << format_double(r.eta) << ',' << format_double(r.gamma) << ','
        << csv_field(r.method) << ',' << format_double(r.fms) << ','
        << format_double(timing ? r.seconds : 0.0) << ',' << r.sweeps << ','
        << (r.converged ? 1 : 0) << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line_no, const char* what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(line_no, std::string("invalid ") + what + " '" + s + "'");
  }
  return v;
}

double quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<ExperimentRecord> read_records_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(0, "empty CSV");
  if (trim(line) != kCsvHeader) throw ParseError(1, "unexpected CSV header '" + line + "'");
  std::vector<ExperimentRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line, line_no);
    if (f.size() != 8) throw ParseError(line_no, "expected 8 fields, found " + std::to_string(f.size()));
    ExperimentRecord r;
    r.replicate = parse_number<std::size_t>(f[0], line_no, "replicate");
    r.eta = parse_number<double>(f[1], line_no, "eta");
    r.gamma = parse_number<double>(f[2], line_no, "gamma");
    r.method = f[3];
    r.fms = parse_number<double>(f[4], line_no, "fms");
    r.seconds = parse_number<double>(f[5], line_no, "seconds");
    r.sweeps = parse_number<int>(f[6], line_no, "sweeps");
    r.converged = parse_number<int>(f[7], line_no, "converged") != 0;
    records.push_back(std::move(r));
  }
  return records;
}

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("box_stats: no values");
  std::sort(values.begin(), values.end());
  BoxStats s;
  s.count = values.size();
  s.q1 = quantile(values, 0.25);
  s.median = quantile(values, 0.5);
  s.q3 = quantile(values, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = s.q1;
  s.whisker_high = s.q3;
  for (double v : values) {
    if (v < lo_fence || v > hi_fence) {
      s.outliers.push_back(v);
    } else {
      s.whisker_low = std::min(s.whisker_low, v);
      s.whisker_high = std::max(s.whisker_high, v);
    }
  }
  return s;
}

std::string render_boxplot_svg(const std::vector<ExperimentRecord>& records) {
  // Cells in first-appearance order; methods within a cell likewise.
  std::vector<std::pair<double, double>> cells;
  std::vector<std::string> methods;
  std::map<std::tuple<double, double, std::string>, std::vector<double>> groups;
  for (const auto& r : records) {
    const auto cell = std::make_pair(r.eta, r.gamma);
    if (std::find(cells.begin(), cells.end(), cell) == cells.end()) cells.push_back(cell);
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    groups[{r.eta, r.gamma, r.method}].push_back(r.fms);
  }

  constexpr double left = 60, top = 30, plot_h = 300, box_w = 28, gap = 10, cell_pad = 30;
  const double cell_w = static_cast<double>(methods.size()) * (box_w + gap) + cell_pad;
  const double plot_w = std::max(1.0, static_cast<double>(cells.size())) * cell_w;
  const double width = left + plot_w + 140, height = top + plot_h + 70;
  const auto y_of = [&](double fms) { return top + (1.0 - std::clamp(fms, 0.0, 1.0)) * plot_h; };
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = t / 5.0;
    svg << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << y_of(v) << "\" y2=\""
        << y_of(v) << "\" stroke=\"#ddd\"/>\n"
        << "<text x=\"" << left - 8 << "\" y=\"" << y_of(v) + 4 << "\" text-anchor=\"end\">" << v
        << "</text>\n";
  }
  svg << "<text x=\"15\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 15 " << top + plot_h / 2
      << ")\" text-anchor=\"middle\">FMS</text>\n";

  for (std::size_t c = 0; c < cells.size(); ++c) {
    const double x0 = left + static_cast<double>(c) * cell_w + cell_pad / 2;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const auto it = groups.find({cells[c].first, cells[c].second, methods[m]});
      if (it == groups.end()) continue;
      const BoxStats s = box_stats(it->second);
      const double x = x0 + static_cast<double>(m) * (box_w + gap);
      const double mid = x + box_w / 2;
      const char* color = palette[m % 4];
      svg << "<g class=\"box\" data-eta=\"" << format_double(cells[c].first) << "\" data-gamma=\""
          << format_double(cells[c].second) << "\" data-method=\"" << methods[m] << "\" data-median=\""
          << format_double(s.median) << "\" data-n=\"" << s.count << "\">\n"
          << "  <line x1=\"" << mid << "\" x2=\"" << mid << "\" y1=\"" << y_of(s.whisker_high)
          << "\" y2=\"" << y_of(s.q3) << "\" stroke=\"black\"/>\n"
          << "  <line x1=\"" << mid << "\" x2=\"" << mid << "\" y1=\"" << y_of(s.q1) << "\" y2=\""
          << y_of(s.whisker_low) << "\" stroke=\"black\"/>\n"
          << "  <line x1=\"" << x + 6 << "\" x2=\"" << x + box_w - 6 << "\" y1=\"" << y_of(s.whisker_high)
          << "\" y2=\"" << y_of(s.whisker_high) << "\" stroke=\"black\"/>\n"
          << "  <line x1=\"" << x + 6 << "\" x2=\"" << x + box_w - 6 << "\" y1=\"" << y_of(s.whisker_low)
          << "\" y2=\"" << y_of(s.whisker_low) << "\" stroke=\"black\"/>\n"
          << "  <rect x=\"" << x << "\" y=\"" << y_of(s.q3) << "\" width=\"" << box_w << "\" height=\""
          << std::max(0.5, y_of(s.q1) - y_of(s.q3)) << "\" fill=\"" << color
          << "\" fill-opacity=\"0.5\" stroke=\"black\"/>\n"
          << "  <line class=\"median\" x1=\"" << x << "\" x2=\"" << x + box_w << "\" y1=\""
          << y_of(s.median) << "\" y2=\"" << y_of(s.median) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
      for (double o : s.outliers) {
        svg << "  <circle cx=\"" << mid << "\" cy=\"" << y_of(o) << "\" r=\"2.5\" fill=\"none\" stroke=\""
            << color << "\"/>\n";
      }
      svg << "</g>\n";
    }
    const double label_x = x0 + static_cast<double>(methods.size()) * (box_w + gap) / 2;
    svg << "<text x=\"" << label_x << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">&#951;="
        << format_double(cells[c].first) << "</text>\n"
        << "<text x=\"" << label_x << "\" y=\"" << top + plot_h + 32 << "\" text-anchor=\"middle\">&#947;="
        << format_double(cells[c].second) << "</text>\n";
  }
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const double y = top + 10 + static_cast<double>(m) * 18;
    svg << "<rect x=\"" << left + plot_w + 20 << "\" y=\"" << y - 9 << "\" width=\"12\" height=\"12\" fill=\""
        << palette[m % 4] << "\" fill-opacity=\"0.5\" stroke=\"black\"/>\n"
        << "<text x=\"" << left + plot_w + 38 << "\" y=\"" << y + 1 << "\">" << methods[m] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_manifest(std::ostream& out, const RunManifest& manifest) {
  out << "# robustcp run manifest\n"
      << "command=" << manifest.command << '\n'
      << "version=" << manifest.version << '\n';
  for (const auto& [k, v] : manifest.options) out << k << '=' << v << '\n';
}

std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value, found '" + t + "'");
    std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ParseError(line_no, "empty key");
    out.emplace_back(std::move(key), trim(t.substr(eq + 1)));
  }
  return out;
}

}  // namespace robustcp::report
