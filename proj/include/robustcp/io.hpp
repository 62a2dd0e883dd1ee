#pragma once

#include "robustcp/kruskal.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace robustcp::io {

/// Malformed input; line() is 1-based, 0 when the problem is end of input.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

// Tensor text format:
//   shape I_1 I_2 ... I_N
//   one value per line, first index fastest
DenseTensor read_tensor(std::istream& in);
void write_tensor(std::ostream& out, const DenseTensor& t);

// Kruskal text format:
//   rank R order N
//   factor n rows cols       (n is 1-based)
//   rows lines of cols values each (row-major)
//   ... repeated for every factor
KruskalModel read_kruskal(std::istream& in);
void write_kruskal(std::ostream& out, const KruskalModel& k);

// l1 problem text format (used by the l1solve subcommand):
//   matrix I J
//   I lines of J values
//   vector I
//   I values, one per line
struct DesignAndTarget {
  Matrix m;
  Vector y;
};
DesignAndTarget read_l1_problem(std::istream& in);

DenseTensor load_tensor(const std::filesystem::path& path);
KruskalModel load_kruskal(const std::filesystem::path& path);
void save_tensor(const std::filesystem::path& path, const DenseTensor& t);
void save_kruskal(const std::filesystem::path& path, const KruskalModel& k);

/// File could not be opened or written.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace robustcp::io
