#pragma once

#include <cstdint>
#include <vector>

#include "gcpls/compressed_matrix.hpp"
#include "gcpls/pair_counter.hpp"
#include "gcpls/types.hpp"

namespace gcpls {

// Top-k batch Re-Pair configuration. A pair must occur at least twice to be
// replaced (the Re-Pair stopping rule); that threshold is not configurable.
struct CompressorConfig {
  std::uint32_t topk = 64;
  CounterMode mode = CounterMode::kExact;
  std::uint64_t interval_length = 1u << 20;  // lossy: interval length l
  std::uint64_t capacity = 1u << 20;         // freq: max table entries v
  double vacancy_percent = 30.0;             // freq: eviction target epsilon

  // Installed on each iteration's counter; for instrumentation/tests.
  PairCounter::Probe counter_probe;

  PairCounter make_counter() const;
  void validate() const;  // throws std::invalid_argument
};

// Observes every adjacent pair of every row, left to right, never spanning
// a row boundary. Occurrences of a pair with itself (runs like aaa) are
// counted non-overlapping: aaa yields one aa.
void count_pairs(const std::vector<std::vector<Symbol>>& rows,
                 PairCounter& counter);

// Up to k pairs with count >= 2, by count descending; ties broken by
// (left, right) ascending so results are reproducible.
std::vector<SymbolPair> select_topk(const PairCounter& counter, std::size_t k);

// One left-to-right pass over every row, rewriting occurrences of the
// selected pairs. A rule is created only when a pair's second
// non-overlapping occurrence is found: the first occurrence is buffered
// (possibly in an earlier row) and both are rewritten at that moment;
// later occurrences rewrite immediately. A pair matched once is left
// untouched and produces no rule, so every rule rewrites at least two
// occurrences at creation. When a matched pair consumes a position, the
// pair starting at the next position is skipped (in abc with ab and bc
// both selected, ab wins). Returns the number of rules created.
std::size_t replace_pairs(std::vector<std::vector<Symbol>>& rows,
                          const std::vector<SymbolPair>& selected,
                          Grammar& grammar);

// Iterates {count_pairs -> select_topk -> replace_pairs} on the gap-encoded
// rows until no pair occurs twice (or a pass cannot create any rule).
// Lossless for every counter mode: counters affect grammar size only.
CompressedMatrix compress(const FingerprintMatrix& matrix,
                          const CompressorConfig& config);

// Exact inverse: expands every row back to its positions.
FingerprintMatrix decompress(const CompressedMatrix& cm);

}  // namespace gcpls
