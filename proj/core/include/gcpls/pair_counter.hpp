#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gcpls/grammar.hpp"

namespace gcpls {

using SymbolPair = std::pair<Symbol, Symbol>;

inline std::uint64_t pack_pair(Symbol a, Symbol b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

inline SymbolPair unpack_pair(std::uint64_t key) {
  return {static_cast<Symbol>(key >> 32), static_cast<Symbol>(key & 0xffffffffu)};
}

enum class CounterMode { kExact, kLossy, kFreq };

// Streaming frequency table H over adjacent symbol pairs. Three modes:
//  - exact: plain counts
//  - lossy: interval-based eviction; after every interval of `interval_length`
//    observations, pairs counted below the interval index are dropped, and a
//    newly seen pair starts at interval_index + 1
//  - freq: hard capacity `capacity`; inserting into a full table first
//    decrements every count (dropping zeros) until at most
//    capacity * (1 - vacancy_percent/100) entries remain
// Mode invariants: freq keeps size() <= capacity at all times; lossy keeps
// every surviving count >= interval_index().
class PairCounter {
 public:
  using Table = std::unordered_map<std::uint64_t, std::int64_t>;
  using Probe = std::function<void(const PairCounter&)>;

  static PairCounter exact();
  static PairCounter lossy(std::uint64_t interval_length);
  static PairCounter freq(std::uint64_t capacity, double vacancy_percent);

  void observe(Symbol a, Symbol b);

  std::int64_t count(Symbol a, Symbol b) const;
  std::size_t size() const { return table_.size(); }
  std::uint64_t observed() const { return observed_; }        // N
  std::uint64_t interval_index() const { return interval_; }  // Delta
  CounterMode mode() const { return mode_; }
  std::uint64_t capacity() const { return capacity_; }
  std::uint64_t interval_length() const { return interval_length_; }
  const Table& table() const { return table_; }

  // Entries sorted by count descending, ties by (left, right) ascending.
  std::vector<std::pair<SymbolPair, std::int64_t>> items_by_frequency() const;

  // Invoked after every observe(); used by invariant-checking tests.
  void set_probe(Probe probe) { probe_ = std::move(probe); }

 private:
  PairCounter(CounterMode mode, std::uint64_t interval_length,
              std::uint64_t capacity, double vacancy_percent);

  void observe_lossy(std::uint64_t key);
  void observe_freq(std::uint64_t key);

  CounterMode mode_;
  std::uint64_t interval_length_;
  std::uint64_t capacity_;
  double vacancy_percent_;
  std::uint64_t observed_ = 0;
  std::uint64_t interval_ = 0;
  Table table_;
  Probe probe_;
};

}  // namespace gcpls
