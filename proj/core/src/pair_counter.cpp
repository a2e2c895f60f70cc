#include "gcpls/pair_counter.hpp"

#include <algorithm>

namespace gcpls {

PairCounter::PairCounter(CounterMode mode, std::uint64_t interval_length,
                         std::uint64_t capacity, double vacancy_percent)
    : mode_(mode),
      interval_length_(interval_length),
      capacity_(capacity),
      vacancy_percent_(vacancy_percent) {}

PairCounter PairCounter::exact() {
  return PairCounter(CounterMode::kExact, 0, 0, 0.0);
}

PairCounter PairCounter::lossy(std::uint64_t interval_length) {
  return PairCounter(CounterMode::kLossy, interval_length, 0, 0.0);
}

PairCounter PairCounter::freq(std::uint64_t capacity, double vacancy_percent) {
  return PairCounter(CounterMode::kFreq, 0, capacity, vacancy_percent);
}

void PairCounter::observe(Symbol a, Symbol b) {
  const std::uint64_t key = pack_pair(a, b);
  ++observed_;
  switch (mode_) {
    case CounterMode::kExact:
      ++table_[key];
      break;
    case CounterMode::kLossy:
      observe_lossy(key);
      break;
    case CounterMode::kFreq:
      observe_freq(key);
      break;
  }
  if (probe_) probe_(*this);
}

void PairCounter::observe_lossy(std::uint64_t key) {
  auto it = table_.find(key);
  if (it != table_.end()) {
    ++it->second;
  } else {
    table_.emplace(key, static_cast<std::int64_t>(interval_) + 1);
  }
  const std::uint64_t boundary = observed_ / interval_length_;
  if (boundary != interval_) {
    interval_ = boundary;
    for (auto e = table_.begin(); e != table_.end();) {
      if (e->second < static_cast<std::int64_t>(interval_))
        e = table_.erase(e);
      else
        ++e;
    }
  }
}

void PairCounter::observe_freq(std::uint64_t key) {
  auto it = table_.find(key);
  if (it != table_.end()) {
    ++it->second;
    return;
  }
  if (table_.size() >= capacity_) {
    const double target = static_cast<double>(capacity_) * (1.0 - vacancy_percent_ / 100.0);
    while (target < static_cast<double>(table_.size())) {
      for (auto e = table_.begin(); e != table_.end();) {
        if (--e->second == 0)
          e = table_.erase(e);
        else
          ++e;
      }
    }
  }
  table_.emplace(key, 1);
}

std::int64_t PairCounter::count(Symbol a, Symbol b) const {
  auto it = table_.find(pack_pair(a, b));
  return it == table_.end() ? 0 : it->second;
}

std::vector<std::pair<SymbolPair, std::int64_t>> PairCounter::items_by_frequency() const {
  std::vector<std::pair<SymbolPair, std::int64_t>> items;
  items.reserve(table_.size());
  for (const auto& [key, cnt] : table_) items.emplace_back(unpack_pair(key), cnt);
  std::sort(items.begin(), items.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  return items;
}

}  // namespace gcpls
