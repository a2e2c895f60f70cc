#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcpls/grammar.hpp"
#include "gcpls/types.hpp"

namespace gcpls {

// Weight array P: for the i-th rule, the sum of the terminal gap values in
// its full expansion (P[Z] = P[left] + P[right], P[terminal t] = t). Sized
// by the grammar only; indexed by rule position, not symbol id.
using WeightArray = std::vector<std::uint64_t>;

WeightArray build_weight_array(const Grammar& grammar);

// Grammar-compressed sparse binary matrix: the rule dictionary, one
// compressed gap sequence per row, and the dimensions. Immutable after
// construction; all accessors are safe for concurrent callers.
//
// Row and column indices on the public operations are 1-based, matching
// the text format. Dense vectors are 0-based: w[j-1] corresponds to
// column j.
struct CompressedMatrix {
  Grammar grammar;
  std::vector<std::vector<Symbol>> sequences;
  std::uint32_t n = 0;
  std::uint32_t d = 0;
  WeightArray weights;  // built once from the grammar

  void rebuild_weights() { weights = build_weight_array(grammar); }
};

// Weight of any symbol: its value for terminals, P lookup for rules.
inline std::uint64_t symbol_weight(const CompressedMatrix& cm, Symbol s) {
  return cm.grammar.is_terminal(s)
             ? s
             : cm.weights[s - cm.grammar.terminal_bound - 1];
}

// Expands the i-th compressed sequence back to its gap sequence by
// iterative grammar-tree traversal (explicit stack; grammar depth can reach
// corpus length in degenerate chains).
GapSequence expand_gaps(const CompressedMatrix& cm, std::uint32_t i);

// Recovers row i: expand gaps, then prefix-sum back to positions.
PositionRow access_row(const CompressedMatrix& cm, std::uint32_t i);

// All 1-based row ids i with X[i][j] = 1, ascending, without expanding
// rows: per row, prefix-sum symbol weights to find the symbol whose span
// covers j, then descend its grammar tree guided by left-child weights.
std::vector<std::uint32_t> access_column(const CompressedMatrix& cm,
                                         std::uint32_t j);

enum class TmatvecStrategy { kRowScan, kColumnScan };

// out[i] = sum of w[p-1] over positions p of row i (X is binary, so the
// product is a gather-sum over each expanded row).
std::vector<double> matvec(const CompressedMatrix& cm,
                           const std::vector<double>& w,
                           unsigned threads = 1);

// out[j-1] = sum of r[i-1] over rows i with X[i][j] = 1. Row-scan expands
// each row once (default; one corpus sweep); column-scan probes every
// column through access_column. Both orders produce identical sums.
std::vector<double> tmatvec(const CompressedMatrix& cm,
                            const std::vector<double>& r,
                            TmatvecStrategy strategy = TmatvecStrategy::kRowScan,
                            unsigned threads = 1);

// GCMX1 container, little-endian throughout:
//   magic "GCMX1"
//   u64 n, u64 d, u64 terminal_bound, u64 rule_count
//   rule_count x { u32 left, u32 right }      (creation order)
//   n x { u32 length, length x u32 symbol }
// Writers are atomic (temp file + rename). Loaders validate structure and
// throw IoError on corrupt input.
void save_gcmx(const CompressedMatrix& cm, const std::string& path);
void write_gcmx(const CompressedMatrix& cm, std::ostream& out);
CompressedMatrix load_gcmx(const std::string& path);
CompressedMatrix read_gcmx(std::istream& in);

struct CompressionStats {
  std::uint64_t num_rules = 0;
  std::uint64_t compressed_symbols = 0;  // total length of all sequences
  std::uint64_t nnz = 0;                 // total uncompressed positions
  std::uint32_t n = 0;
  std::uint32_t d = 0;

  // (rules + sequences) vs. raw 32-bit-per-position encoding, id counts on
  // both sides: (2 * num_rules + compressed_symbols) / nnz.
  double ratio_vs_raw32() const;
};

CompressionStats compute_stats(const CompressedMatrix& cm);

}  // namespace gcpls
