#include "robustcp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace robustcp::io {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(line == 0 ? what + " (at end of input)"
                                   : "line " + std::to_string(line) + ": " + what),
      line_(line) {}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

// Whitespace-separated tokens with the line each came from. Blank lines and
// lines starting with '#' are skipped.
class Tokens {
public:
  explicit Tokens(std::istream& in) : in_(in) {}

  bool next(std::string& tok) {
    while (!(line_stream_ >> tok)) {
      std::string line;
      if (!std::getline(in_, line)) return false;
      ++line_no_;
      if (!line.empty() && line.front() == '#') line.clear();
      line_stream_.clear();
      line_stream_.str(line);
    }
    return true;
  }

  std::string expect(const char* what) {
    std::string tok;
    if (!next(tok)) throw ParseError(0, std::string("expected ") + what);
    return tok;
  }

  void keyword(const char* word) {
    const std::string tok = expect(word);
    if (tok != word) fail("expected '" + std::string(word) + "', found '" + tok + "'");
  }

  std::size_t positive(const char* what) {
    const std::string tok = expect(what);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || v == 0) {
      fail(std::string("invalid ") + what + " '" + tok + "'");
    }
    return v;
  }

  double real(const char* what) {
    const std::string tok = expect(what);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
      fail(std::string("invalid ") + what + " '" + tok + "'");
    }
    return v;
  }

  // Reads the rest of the current line as positive integers.
  std::vector<std::size_t> rest_of_line(const char* what) {
    std::vector<std::size_t> out;
    std::string tok;
    while (line_stream_ >> tok) {
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc{} || ptr != tok.data() + tok.size() || v == 0) {
        fail(std::string("invalid ") + what + " '" + tok + "'");
      }
      out.push_back(v);
    }
    return out;
  }

  void expect_end() {
    std::string tok;
    if (next(tok)) fail("unexpected trailing token '" + tok + "'");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_no_, what); }

  std::size_t line() const noexcept { return line_no_; }

private:
  std::istream& in_;
  std::istringstream line_stream_;
  std::size_t line_no_ = 0;
};

Matrix read_matrix_body(Tokens& tokens, std::size_t rows, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = tokens.real("matrix value");
  return m;
}

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

DenseTensor read_tensor(std::istream& in) {
  Tokens tokens(in);
  tokens.keyword("shape");
  Shape shape = tokens.rest_of_line("dimension");
  if (shape.size() < 2) tokens.fail("tensor needs at least two dimensions");
  const std::size_t total = element_count(shape);
  std::vector<double> values(total);
  for (auto& v : values) v = tokens.real("tensor value");
  tokens.expect_end();
  return DenseTensor(std::move(shape), std::move(values));
}

void write_tensor(std::ostream& out, const DenseTensor& t) {
  out << "shape";
  for (std::size_t d : t.shape()) out << ' ' << d;
  out << '\n';
  for (double v : t.values()) out << format_double(v) << '\n';
}

KruskalModel read_kruskal(std::istream& in) {
  Tokens tokens(in);
  tokens.keyword("rank");
  const std::size_t rank = tokens.positive("rank");
  tokens.keyword("order");
  const std::size_t order = tokens.positive("order");
  if (order < 2) tokens.fail("model order must be at least 2");
  std::vector<Matrix> factors;
  for (std::size_t n = 1; n <= order; ++n) {
    tokens.keyword("factor");
    const std::size_t index = tokens.positive("factor index");
    if (index != n) tokens.fail("expected factor " + std::to_string(n) + ", found " + std::to_string(index));
    const std::size_t rows = tokens.positive("row count");
    const std::size_t cols = tokens.positive("column count");
    if (cols != rank) {
      tokens.fail("factor " + std::to_string(n) + " has " + std::to_string(cols) +
                  " columns but rank is " + std::to_string(rank));
    }
    factors.push_back(read_matrix_body(tokens, rows, cols));
  }
  tokens.expect_end();
  return KruskalModel(std::move(factors));
}

void write_kruskal(std::ostream& out, const KruskalModel& k) {
  out << "rank " << k.rank() << " order " << k.order() << '\n';
  for (std::size_t n = 0; n < k.order(); ++n) {
    const Matrix& f = k.factor(n);
    out << "factor " << n + 1 << ' ' << f.rows() << ' ' << f.cols() << '\n';
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      for (Eigen::Index j = 0; j < f.cols(); ++j) {
        if (j) out << ' ';
        out << format_double(f(i, j));
      }
      out << '\n';
    }
  }
}

DesignAndTarget read_l1_problem(std::istream& in) {
  Tokens tokens(in);
  tokens.keyword("matrix");
  const std::size_t rows = tokens.positive("row count");
  const std::size_t cols = tokens.positive("column count");
  DesignAndTarget out;
  out.m = read_matrix_body(tokens, rows, cols);
  tokens.keyword("vector");
  const std::size_t len = tokens.positive("vector length");
  if (len != rows) tokens.fail("vector length " + std::to_string(len) + " differs from matrix rows");
  out.y.resize(static_cast<Eigen::Index>(len));
  for (Eigen::Index i = 0; i < out.y.size(); ++i) out.y(i) = tokens.real("vector value");
  tokens.expect_end();
  return out;
}

DenseTensor load_tensor(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_tensor(in);
}

KruskalModel load_kruskal(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_kruskal(in);
}

void save_tensor(const std::filesystem::path& path, const DenseTensor& t) {
  write_file(path, [&](std::ostream& out) { write_tensor(out, t); });
}

void save_kruskal(const std::filesystem::path& path, const KruskalModel& k) {
  write_file(path, [&](std::ostream& out) { write_kruskal(out, k); });
}

}  // namespace robustcp::io
