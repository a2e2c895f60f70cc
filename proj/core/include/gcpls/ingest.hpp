#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "gcpls/types.hpp"

namespace gcpls {

// Parses a labeled sparse text file, one sample per line:
//   <label> <idx>:1 <idx>:1 ...
// with strictly ascending 1-based indices and all values equal to 1.
// Lines containing only whitespace are skipped. When every label lies in
// {0,1} and at least one 0 is present, labels are remapped to {-1,+1} and
// `labels_remapped` is set so callers can report it once.
//
// dim is `expected_dim` when given (indices above it are an error),
// otherwise the largest index seen. Throws ParseError with the offending
// line number, or IoError if the file cannot be read.
FingerprintMatrix parse_sparse_file(const std::string& path,
                                    std::optional<std::uint32_t> expected_dim = {});
FingerprintMatrix parse_sparse_stream(std::istream& in,
                                      std::optional<std::uint32_t> expected_dim = {});

// Writes the matrix back in the same text format (labels default to 0 when
// the matrix carries none). parse(write(m)) == m.
void write_sparse_file(const FingerprintMatrix& m, const std::string& path);
void write_sparse_stream(const FingerprintMatrix& m, std::ostream& out);

// (p1, p2, ..., pm) -> (p1, p2-p1, ..., pm-p(m-1)). Empty row -> empty.
GapSequence to_gap_sequence(const PositionRow& row);

// Exact inverse of to_gap_sequence. Throws IoError when a prefix sum
// exceeds `dim` or a gap is zero (corrupt data).
PositionRow from_gap_sequence(const GapSequence& gaps, std::uint32_t dim);

}  // namespace gcpls
