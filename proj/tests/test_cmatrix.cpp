#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gcpls/compressed_matrix.hpp"
#include "gcpls/repair.hpp"
#include "testutil.hpp"

using namespace gcpls;

namespace {

CompressedMatrix compress_exact(const FingerprintMatrix& m, std::uint32_t k = 8) {
  CompressorConfig cfg;
  cfg.topk = k;
  return compress(m, cfg);
}

// literal matrix with no rules: sequences are raw gap terminals
CompressedMatrix raw_matrix(std::vector<std::vector<Symbol>> seqs, std::uint32_t d) {
  CompressedMatrix cm;
  cm.n = static_cast<std::uint32_t>(seqs.size());
  cm.d = d;
  Symbol max_gap = 0;
  for (const auto& s : seqs)
    for (Symbol g : s) max_gap = std::max(max_gap, g);
  cm.grammar.terminal_bound = max_gap;
  cm.sequences = std::move(seqs);
  cm.rebuild_weights();
  return cm;
}

}  // namespace

TEST_CASE("weight array follows the rule recurrence") {
  Grammar g;
  g.terminal_bound = 2;
  g.add_rule(1, 2);  // Z1 -> (1,2)
  WeightArray p = build_weight_array(g);
  REQUIRE(p.size() == 1);
  CHECK(p[0] == 3);

  g.add_rule(g.first_rule_id(), 1);  // Z2 -> (Z1, 1)
  p = build_weight_array(g);
  REQUIRE(p.size() == 2);
  CHECK(p[1] == 4);
}

TEST_CASE("weight array of a rule-free grammar is empty") {
  Grammar g;
  g.terminal_bound = 7;
  CHECK(build_weight_array(g).empty());
}

TEST_CASE("weight array rejects forward references") {
  Grammar g;
  g.terminal_bound = 2;
  g.rules.push_back(Rule{4, 1});  // references a not-yet-created rule
  CHECK_THROWS_AS(build_weight_array(g), IoError);
}

TEST_CASE("access_row expands a single rule") {
  CompressedMatrix cm;
  cm.n = 1;
  cm.d = 5;
  cm.grammar.terminal_bound = 3;
  cm.grammar.add_rule(3, 2);
  cm.sequences = {{cm.grammar.first_rule_id()}};
  cm.rebuild_weights();
  CHECK(expand_gaps(cm, 1) == GapSequence{3, 2});
  CHECK(access_row(cm, 1) == PositionRow{3, 5});
}

TEST_CASE("access_row of an empty sequence is an empty row") {
  CompressedMatrix cm = raw_matrix({{}}, 4);
  CHECK(access_row(cm, 1).empty());
  CHECK_THROWS_AS(access_row(cm, 0), std::out_of_range);
  CHECK_THROWS_AS(access_row(cm, 2), std::out_of_range);
}

TEST_CASE("access_row recovers every original row") {
  testutil::Rng rng(11);
  for (int it = 0; it < 20; ++it) {
    const FingerprintMatrix m = testutil::random_matrix(rng, 30, 150, 0.15);
    const CompressedMatrix cm = compress_exact(m);
    for (std::uint32_t i = 1; i <= cm.n; ++i) CHECK(access_row(cm, i) == m.rows[i - 1]);
  }
}

TEST_CASE("access_column on raw terminals") {
  CompressedMatrix cm = raw_matrix({{3, 2}}, 5);  // positions 3, 5
  CHECK(access_column(cm, 5) == std::vector<std::uint32_t>{1});
  CHECK(access_column(cm, 3) == std::vector<std::uint32_t>{1});
  CHECK(access_column(cm, 4).empty());
  CHECK(access_column(cm, 1).empty());
  CHECK_THROWS_AS(access_column(cm, 0), std::out_of_range);
  CHECK_THROWS_AS(access_column(cm, 6), std::out_of_range);
}

TEST_CASE("access_column equals brute-force row expansion") {
  testutil::Rng rng(12);
  for (int it = 0; it < 10; ++it) {
    const FingerprintMatrix m = testutil::random_matrix(rng, 50, 40, 0.25);
    const CompressedMatrix cm = compress_exact(m, 4);
    for (std::uint32_t j = 1; j <= cm.d; ++j) {
      std::vector<std::uint32_t> expected;
      for (std::uint32_t i = 0; i < m.rows.size(); ++i)
        if (std::binary_search(m.rows[i].begin(), m.rows[i].end(), j))
          expected.push_back(i + 1);
      CHECK(access_column(cm, j) == expected);
    }
  }
}

TEST_CASE("row/column duality") {
  testutil::Rng rng(13);
  const FingerprintMatrix m = testutil::random_matrix(rng, 25, 30, 0.3);
  const CompressedMatrix cm = compress_exact(m);
  for (std::uint32_t j = 1; j <= cm.d; ++j) {
    const auto column = access_column(cm, j);
    for (std::uint32_t i = 1; i <= cm.n; ++i) {
      const auto row = access_row(cm, i);
      const bool in_row = std::binary_search(row.begin(), row.end(), j);
      const bool in_col = std::binary_search(column.begin(), column.end(), i);
      CHECK(in_row == in_col);
    }
  }
}

TEST_CASE("deep rule chains expand iteratively") {
  // Z_k -> (Z_{k-1}, 1) nested 60000 deep; recursion would overflow here.
  constexpr std::uint32_t kDepth = 60000;
  CompressedMatrix cm;
  cm.grammar.terminal_bound = 1;
  Symbol prev = 1;
  for (std::uint32_t i = 0; i < kDepth; ++i) prev = cm.grammar.add_rule(prev, 1);
  cm.n = 1;
  cm.d = kDepth + 1;
  cm.sequences = {{prev}};
  cm.rebuild_weights();

  const PositionRow row = access_row(cm, 1);
  REQUIRE(row.size() == kDepth + 1);
  CHECK(row.front() == 1);
  CHECK(row.back() == kDepth + 1);
  CHECK(access_column(cm, 1) == std::vector<std::uint32_t>{1});
  CHECK(access_column(cm, kDepth + 1) == std::vector<std::uint32_t>{1});
}

TEST_CASE("matvec gathers row sums") {
  testutil::Rng rng(14);
  const FingerprintMatrix m = testutil::random_matrix(rng, 40, 80, 0.2);
  const CompressedMatrix cm = compress_exact(m);

  SUBCASE("all-ones weight counts the row") {
    const std::vector<double> ones(cm.d, 1.0);
    const auto out = matvec(cm, ones);
    for (std::uint32_t i = 0; i < cm.n; ++i)
      CHECK(out[i] == doctest::Approx(static_cast<double>(m.rows[i].size())));
  }
  SUBCASE("unit vector matches access_column") {
    for (std::uint32_t j = 1; j <= std::min<std::uint32_t>(cm.d, 10); ++j) {
      std::vector<double> e(cm.d, 0.0);
      e[j - 1] = 1.0;
      const auto out = matvec(cm, e);
      const auto col = access_column(cm, j);
      for (std::uint32_t i = 1; i <= cm.n; ++i) {
        const bool hit = std::binary_search(col.begin(), col.end(), i);
        CHECK(out[i - 1] == (hit ? 1.0 : 0.0));
      }
    }
  }
  SUBCASE("random weights match the dense oracle") {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> w(cm.d);
    for (auto& v : w) v = gauss(rng);
    const auto out = matvec(cm, w);
    const auto expected = testutil::dense_matvec(testutil::densify(m), w);
    for (std::uint32_t i = 0; i < cm.n; ++i)
      CHECK(out[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
  SUBCASE("dimension mismatch throws") {
    CHECK_THROWS_AS(matvec(cm, std::vector<double>(cm.d + 1, 0.0)),
                    std::invalid_argument);
  }
}

TEST_CASE("tmatvec strategies agree with the oracle and each other") {
  testutil::Rng rng(15);
  const FingerprintMatrix m = testutil::random_matrix(rng, 40, 80, 0.2);
  const CompressedMatrix cm = compress_exact(m);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> r(cm.n);
  for (auto& v : r) v = gauss(rng);

  const auto row_scan = tmatvec(cm, r, TmatvecStrategy::kRowScan);
  const auto col_scan = tmatvec(cm, r, TmatvecStrategy::kColumnScan);
  const auto expected = testutil::dense_tmatvec(testutil::densify(m), r);
  for (std::uint32_t j = 0; j < cm.d; ++j) {
    CHECK(row_scan[j] == doctest::Approx(expected[j]).epsilon(1e-12));
    CHECK(row_scan[j] == doctest::Approx(col_scan[j]).epsilon(1e-12));
  }

  SUBCASE("unit r picks out one row") {
    std::vector<double> e(cm.n, 0.0);
    e[0] = 1.0;
    const auto out = tmatvec(cm, e);
    for (std::uint32_t j = 1; j <= cm.d; ++j) {
      const bool hit = std::binary_search(m.rows[0].begin(), m.rows[0].end(), j);
      CHECK(out[j - 1] == (hit ? 1.0 : 0.0));
    }
  }
  SUBCASE("all-ones r yields column popcounts") {
    const std::vector<double> ones(cm.n, 1.0);
    const auto out = tmatvec(cm, ones);
    for (std::uint32_t j = 1; j <= cm.d; ++j)
      CHECK(out[j - 1] == doctest::Approx(static_cast<double>(access_column(cm, j).size())));
  }
  SUBCASE("dimension mismatch throws") {
    CHECK_THROWS_AS(tmatvec(cm, std::vector<double>(cm.n + 1, 0.0)),
                    std::invalid_argument);
  }
}

TEST_CASE("threaded products match the serial path") {
  testutil::Rng rng(16);
  const FingerprintMatrix m = testutil::random_matrix(rng, 60, 100, 0.2);
  const CompressedMatrix cm = compress_exact(m);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> w(cm.d), r(cm.n);
  for (auto& v : w) v = gauss(rng);
  for (auto& v : r) v = gauss(rng);

  const auto mv1 = matvec(cm, w, 1);
  const auto mv4 = matvec(cm, w, 4);
  CHECK(mv1 == mv4);  // disjoint writes, identical order per entry

  const auto tv1 = tmatvec(cm, r, TmatvecStrategy::kRowScan, 1);
  const auto tv4 = tmatvec(cm, r, TmatvecStrategy::kRowScan, 4);
  for (std::uint32_t j = 0; j < cm.d; ++j)
    CHECK(tv1[j] == doctest::Approx(tv4[j]).epsilon(1e-12));

  const auto cv1 = tmatvec(cm, r, TmatvecStrategy::kColumnScan, 1);
  const auto cv4 = tmatvec(cm, r, TmatvecStrategy::kColumnScan, 4);
  CHECK(cv1 == cv4);
}

TEST_CASE("gcmx round-trip is bit-stable") {
  testutil::Rng rng(17);
  const FingerprintMatrix m = testutil::random_matrix(rng, 30, 90, 0.2);
  const CompressedMatrix cm = compress_exact(m);

  std::ostringstream a, b;
  write_gcmx(cm, a);
  write_gcmx(cm, b);
  CHECK(a.str() == b.str());
  CHECK(a.str().substr(0, 5) == "GCMX1");

  std::istringstream in(a.str());
  const CompressedMatrix back = read_gcmx(in);
  CHECK(back.grammar == cm.grammar);
  CHECK(back.sequences == cm.sequences);
  CHECK(back.n == cm.n);
  CHECK(back.d == cm.d);
  CHECK(back.weights == cm.weights);
}

TEST_CASE("gcmx loader rejects corrupt input") {
  {
    std::istringstream in("NOPE!");
    CHECK_THROWS_AS(read_gcmx(in), IoError);
  }
  {
    std::istringstream in("GCMX1\x01");  // truncated header
    CHECK_THROWS_AS(read_gcmx(in), IoError);
  }
  {
    // valid header, sequence references symbol 0
    CompressedMatrix cm = raw_matrix({{2, 1}}, 3);
    std::ostringstream out;
    write_gcmx(cm, out);
    std::string bytes = out.str();
    bytes[bytes.size() - 4] = 0;  // clobber the last symbol id
    std::istringstream in(bytes);
    CHECK_THROWS_AS(read_gcmx(in), IoError);
  }
}

TEST_CASE("save_gcmx writes atomically") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "gcpls_test_io";
  fs::create_directories(dir);
  const auto path = (dir / "m.gcmx").string();
  testutil::Rng rng(18);
  const FingerprintMatrix m = testutil::random_matrix(rng, 10, 40, 0.2);
  const CompressedMatrix cm = compress_exact(m);
  save_gcmx(cm, path);
  CHECK_FALSE(fs::exists(path + ".tmp"));
  const CompressedMatrix back = load_gcmx(path);
  CHECK(back.sequences == cm.sequences);
  fs::remove_all(dir);
}

TEST_CASE("stats count rules, symbols and nonzeros") {
  FingerprintMatrix m;
  m.dim = 40;
  const PositionRow row{2, 4, 9, 13, 20, 24, 29, 33};
  for (int i = 0; i < 6; ++i) m.rows.push_back(row);
  const CompressedMatrix cm = compress_exact(m, 2);
  const CompressionStats s = compute_stats(cm);
  CHECK(s.n == 6);
  CHECK(s.d == 40);
  CHECK(s.nnz == 48);
  CHECK(s.num_rules == cm.grammar.num_rules());
  std::uint64_t symbols = 0;
  for (const auto& seq : cm.sequences) symbols += seq.size();
  CHECK(s.compressed_symbols == symbols);
  CHECK(s.ratio_vs_raw32() ==
        doctest::Approx((2.0 * s.num_rules + symbols) / 48.0));
}
