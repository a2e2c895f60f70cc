#include "gcpls/repair.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "gcpls/ingest.hpp"

namespace gcpls {

void CompressorConfig::validate() const {
  if (topk < 1) throw std::invalid_argument("topk must be >= 1");
  if (mode == CounterMode::kLossy && interval_length < 1)
    throw std::invalid_argument("interval length must be >= 1");
  if (mode == CounterMode::kFreq) {
    if (capacity < 1) throw std::invalid_argument("capacity must be >= 1");
    if (!(vacancy_percent > 0.0 && vacancy_percent < 100.0))
      throw std::invalid_argument("vacancy rate must be in (0, 100)");
  }
}

PairCounter CompressorConfig::make_counter() const {
  PairCounter c = mode == CounterMode::kExact ? PairCounter::exact()
                  : mode == CounterMode::kLossy
                      ? PairCounter::lossy(interval_length)
                      : PairCounter::freq(capacity, vacancy_percent);
  if (counter_probe) c.set_probe(counter_probe);
  return c;
}

void count_pairs(const std::vector<std::vector<Symbol>>& rows, PairCounter& counter) {
  for (const auto& row : rows) {
    std::size_t q = 0;
    while (q + 1 < row.size()) {
      counter.observe(row[q], row[q + 1]);
      // aa inside an equal run: skip the overlapping middle pair
      if (row[q] == row[q + 1] && q + 2 < row.size() && row[q + 2] == row[q])
        q += 2;
      else
        q += 1;
    }
  }
}

std::vector<SymbolPair> select_topk(const PairCounter& counter, std::size_t k) {
  std::vector<SymbolPair> selected;
  for (const auto& [pair, cnt] : counter.items_by_frequency()) {
    if (cnt < 2) break;
    selected.push_back(pair);
    if (selected.size() == k) break;
  }
  return selected;
}

namespace {

constexpr Symbol kTombstone = 0;  // never a valid symbol

struct PairState {
  enum Phase : std::uint8_t { kUnseen = 0, kBuffered, kRuleMade };
  Phase phase = kUnseen;
  std::uint32_t row = 0;  // buffered first occurrence, output coordinates
  std::uint32_t pos = 0;
  Symbol rule = 0;
};

}  // namespace

std::size_t replace_pairs(std::vector<std::vector<Symbol>>& rows,
                          const std::vector<SymbolPair>& selected, Grammar& grammar) {
  if (selected.empty()) return 0;
  std::unordered_map<std::uint64_t, PairState> states;
  states.reserve(selected.size() * 2);
  for (const auto& [a, b] : selected) states.emplace(pack_pair(a, b), PairState{});

  std::size_t created = 0;
  std::vector<std::uint32_t> dirty;
  for (std::uint32_t r = 0; r < rows.size(); ++r) {
    auto& in = rows[r];
    std::vector<Symbol> out;
    out.reserve(in.size());
    std::size_t q = 0;
    while (q < in.size()) {
      if (q + 1 < in.size()) {
        auto it = states.find(pack_pair(in[q], in[q + 1]));
        if (it != states.end()) {
          PairState& st = it->second;
          if (st.phase == PairState::kRuleMade) {
            out.push_back(st.rule);
          } else if (st.phase == PairState::kBuffered) {
            // Second non-overlapping occurrence: make the rule and rewrite
            // both. Tombstones are compacted after the pass, so buffered
            // positions recorded in other states stay valid.
            st.rule = grammar.add_rule(in[q], in[q + 1]);
            ++created;
            auto& owner = (st.row == r) ? out : rows[st.row];
            owner[st.pos] = st.rule;
            owner[st.pos + 1] = kTombstone;
            dirty.push_back(st.row);
            st.phase = PairState::kRuleMade;
            out.push_back(st.rule);
          } else {
            st.phase = PairState::kBuffered;
            st.row = r;
            st.pos = static_cast<std::uint32_t>(out.size());
            out.push_back(in[q]);
            out.push_back(in[q + 1]);
          }
          q += 2;
          continue;
        }
      }
      out.push_back(in[q]);
      ++q;
    }
    rows[r] = std::move(out);
  }
  for (std::uint32_t r : dirty)
    std::erase(rows[r], kTombstone);
  return created;
}

CompressedMatrix compress(const FingerprintMatrix& matrix, const CompressorConfig& config) {
  config.validate();
  CompressedMatrix cm;
  cm.n = static_cast<std::uint32_t>(matrix.rows.size());
  cm.d = matrix.dim;
  cm.sequences.reserve(matrix.rows.size());
  Symbol max_gap = 0;
  for (const auto& row : matrix.rows) {
    GapSequence gaps = to_gap_sequence(row);
    for (Symbol g : gaps) max_gap = std::max(max_gap, g);
    cm.sequences.push_back(std::move(gaps));
  }
  cm.grammar.terminal_bound = max_gap;

  for (;;) {
    PairCounter counter = config.make_counter();
    count_pairs(cm.sequences, counter);
    const auto selected = select_topk(counter, config.topk);
    if (selected.empty()) break;
    // A pass that makes no rule leaves the rows unchanged, so further
    // iterations would repeat it forever.
    if (replace_pairs(cm.sequences, selected, cm.grammar) == 0) break;
  }
  cm.rebuild_weights();
  return cm;
}

FingerprintMatrix decompress(const CompressedMatrix& cm) {
  FingerprintMatrix m;
  m.dim = cm.d;
  m.rows.reserve(cm.n);
  for (std::uint32_t i = 1; i <= cm.n; ++i) m.rows.push_back(access_row(cm, i));
  return m;
}

}  // namespace gcpls
