#include <doctest.h>

#include <random>

#include "gcpls/pair_counter.hpp"
#include "gcpls/repair.hpp"
#include "testutil.hpp"

using namespace gcpls;

namespace {

std::vector<SymbolPair> random_stream(testutil::Rng& rng, std::size_t len,
                                      Symbol alphabet) {
  std::uniform_int_distribution<Symbol> sym(1, alphabet);
  std::vector<SymbolPair> s;
  s.reserve(len);
  for (std::size_t i = 0; i < len; ++i) s.push_back({sym(rng), sym(rng)});
  return s;
}

}  // namespace

TEST_CASE("exact counter counts plainly") {
  PairCounter c = PairCounter::exact();
  c.observe(1, 2);
  c.observe(1, 2);
  c.observe(2, 1);
  CHECK(c.count(1, 2) == 2);
  CHECK(c.count(2, 1) == 1);
  CHECK(c.count(9, 9) == 0);
  CHECK(c.observed() == 3);
}

TEST_CASE("lossy with one interval covering the stream equals exact") {
  testutil::Rng rng(101);
  for (int it = 0; it < 20; ++it) {
    const auto stream = random_stream(rng, 200, 6);
    PairCounter exact = PairCounter::exact();
    PairCounter lossy = PairCounter::lossy(stream.size() + 1);
    for (const auto& [a, b] : stream) {
      exact.observe(a, b);
      lossy.observe(a, b);
    }
    CHECK(lossy.table() == exact.table());
  }
}

TEST_CASE("freq with capacity above the distinct-pair count equals exact") {
  testutil::Rng rng(102);
  for (int it = 0; it < 20; ++it) {
    const auto stream = random_stream(rng, 200, 5);
    PairCounter exact = PairCounter::exact();
    PairCounter freq = PairCounter::freq(26, 30.0);  // 25 possible pairs
    for (const auto& [a, b] : stream) {
      exact.observe(a, b);
      freq.observe(a, b);
    }
    CHECK(freq.table() == exact.table());
  }
}

TEST_CASE("freq hand trace: v=2, vacancy 50%, stream A A A B C") {
  // After B the table is {A:3, B:1} at capacity; C triggers one decrement
  // sweep leaving {A:2}, then inserts C.
  const SymbolPair A{1, 2}, B{3, 4}, C{5, 6};
  PairCounter c = PairCounter::freq(2, 50.0);
  for (const auto& p : {A, A, A, B}) c.observe(p.first, p.second);
  CHECK(c.count(1, 2) == 3);
  CHECK(c.count(3, 4) == 1);
  CHECK(c.size() == 2);
  c.observe(C.first, C.second);
  CHECK(c.size() == 2);
  CHECK(c.count(1, 2) == 2);
  CHECK(c.count(3, 4) == 0);
  CHECK(c.count(5, 6) == 1);
}

TEST_CASE("freq matches a scripted step-by-step oracle") {
  testutil::Rng rng(103);
  for (int it = 0; it < 30; ++it) {
    const auto stream = random_stream(rng, 300, 8);
    const std::uint64_t v = 1 + rng() % 12;
    const double eps = 10.0 + static_cast<double>(rng() % 80);
    PairCounter c = PairCounter::freq(v, eps);
    testutil::FreqOracle oracle{v, eps, {}};
    for (const auto& [a, b] : stream) {
      c.observe(a, b);
      oracle.observe(a, b);
      REQUIRE(c.size() == oracle.table.size());
      for (const auto& [pair, cnt] : oracle.table)
        REQUIRE(c.count(pair.first, pair.second) == cnt);
    }
  }
}

TEST_CASE("lossy matches a scripted step-by-step oracle") {
  testutil::Rng rng(104);
  for (int it = 0; it < 30; ++it) {
    const auto stream = random_stream(rng, 300, 8);
    const std::uint64_t ell = 1 + rng() % 40;
    PairCounter c = PairCounter::lossy(ell);
    testutil::LossyOracle oracle{ell};
    for (const auto& [a, b] : stream) {
      c.observe(a, b);
      oracle.observe(a, b);
      REQUIRE(c.interval_index() == oracle.delta);
      REQUIRE(c.size() == oracle.table.size());
      for (const auto& [pair, cnt] : oracle.table)
        REQUIRE(c.count(pair.first, pair.second) == cnt);
    }
  }
}

TEST_CASE("freq table size never exceeds capacity") {
  testutil::Rng rng(105);
  for (const std::uint64_t v : {std::uint64_t{1}, std::uint64_t{2}, std::uint64_t{8}}) {
    for (const double eps : {10.0, 30.0, 50.0}) {
      PairCounter c = PairCounter::freq(v, eps);
      std::size_t max_seen = 0;
      c.set_probe([&](const PairCounter& pc) { max_seen = std::max(max_seen, pc.size()); });
      for (const auto& [a, b] : random_stream(rng, 500, 10)) c.observe(a, b);
      CHECK(max_seen <= v);
    }
  }
}

TEST_CASE("lossy survivors stay at or above the interval index") {
  testutil::Rng rng(106);
  PairCounter c = PairCounter::lossy(16);
  bool ok = true;
  c.set_probe([&](const PairCounter& pc) {
    for (const auto& [key, cnt] : pc.table())
      if (cnt < static_cast<std::int64_t>(pc.interval_index())) ok = false;
  });
  for (const auto& [a, b] : random_stream(rng, 1000, 4)) c.observe(a, b);
  CHECK(ok);
  CHECK(c.interval_index() == 1000 / 16);
}

TEST_CASE("count_pairs examples") {
  PairCounter c = PairCounter::exact();
  SUBCASE("adjacent pairs within a row") {
    count_pairs({{1, 2, 1, 2}}, c);
    CHECK(c.count(1, 2) == 2);
    CHECK(c.count(2, 1) == 1);
    CHECK(c.size() == 2);
  }
  SUBCASE("runs count non-overlapping (aaa -> one aa)") {
    count_pairs({{7, 7, 7}}, c);
    CHECK(c.count(7, 7) == 1);
    CHECK(c.size() == 1);
  }
  SUBCASE("pairs accumulate across rows but never span them") {
    count_pairs({{1, 2}, {1, 2}}, c);
    CHECK(c.count(1, 2) == 2);
    CHECK(c.count(2, 1) == 0);
  }
  SUBCASE("length-1 and empty rows contribute nothing") {
    count_pairs({{5}, {}}, c);
    CHECK(c.size() == 0);
  }
}

TEST_CASE("count_pairs agrees with the per-pair greedy oracle") {
  testutil::Rng rng(107);
  for (int it = 0; it < 50; ++it) {
    std::vector<std::vector<Symbol>> rows;
    const std::size_t nrows = 1 + rng() % 5;
    std::uniform_int_distribution<Symbol> sym(1, 4);  // small alphabet forces runs
    for (std::size_t r = 0; r < nrows; ++r) {
      std::vector<Symbol> row(rng() % 30);
      for (auto& s : row) s = sym(rng);
      rows.push_back(std::move(row));
    }
    PairCounter c = PairCounter::exact();
    count_pairs(rows, c);
    const auto expected = testutil::brute_force_pair_counts(rows);
    REQUIRE(c.size() == expected.size());
    for (const auto& [pair, cnt] : expected)
      REQUIRE(c.count(pair.first, pair.second) == static_cast<std::int64_t>(cnt));
  }
}
