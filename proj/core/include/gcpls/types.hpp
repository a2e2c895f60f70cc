#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcpls {

// A fingerprint row: sorted, distinct 1-based column positions of the 1 bits.
using PositionRow = std::vector<std::uint32_t>;

// Differential (gap) encoding of a PositionRow: first position, then
// successive differences. All gaps >= 1; prefix sums never exceed the
// matrix dimension.
using GapSequence = std::vector<std::uint32_t>;

// Response vector y with its centering constant. `values` are centered
// (sum ~ 0) once `center()` has run; `mean` holds the subtracted constant.
struct ResponseVector {
  std::vector<double> values;
  double mean = 0.0;

  static ResponseVector centered(const std::vector<double>& raw);
};

// Sparse binary data matrix: n rows of sorted 1-based positions, d columns.
// Labels travel with the matrix when parsed from a labeled text file.
struct FingerprintMatrix {
  std::vector<PositionRow> rows;
  std::uint32_t dim = 0;
  std::vector<double> labels;
  // true when {0,1} labels were remapped to {-1,+1} at parse time
  bool labels_remapped = false;

  std::size_t num_rows() const { return rows.size(); }
};

// Input/validation problem in a data file; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// File cannot be opened/read/written, or its binary content is corrupt.
class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure (e.g. singular Gram matrix after jitter). `component`
// is the 1-based index of the offending PLS component, 0 if not applicable.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, int component = 0)
      : std::runtime_error(what), component_(component) {}
  int component() const { return component_; }

 private:
  int component_;
};

}  // namespace gcpls
