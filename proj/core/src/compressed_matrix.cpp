#include "gcpls/compressed_matrix.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "binary_io.hpp"

namespace gcpls {

namespace {

// Applies fn(gap) to every terminal in the expansion of `seq`, left to
// right. Iterative: grammar depth may be proportional to corpus length.
template <class F>
void for_each_gap(const Grammar& g, const std::vector<Symbol>& seq, F&& fn) {
  std::vector<Symbol> stack;
  for (Symbol root : seq) {
    stack.push_back(root);
    while (!stack.empty()) {
      Symbol s = stack.back();
      stack.pop_back();
      if (g.is_terminal(s)) {
        fn(s);
      } else {
        const Rule& r = g.rule_for(s);
        stack.push_back(r.right);
        stack.push_back(r.left);
      }
    }
  }
}

// Runs fn(begin, end, shard) over a partition of [0, count); shard order is
// fixed so reductions that merge per-shard results stay deterministic.
template <class F>
void parallel_chunks(std::size_t count, unsigned threads, F&& fn) {
  if (threads <= 1 || count < 2) {
    fn(std::size_t{0}, count, 0u);
    return;
  }
  const unsigned t = static_cast<unsigned>(
      std::min<std::size_t>(threads, count));
  const std::size_t chunk = (count + t - 1) / t;
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (unsigned s = 0; s < t; ++s) {
    const std::size_t b = s * chunk;
    const std::size_t e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e, s] { fn(b, e, s); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

WeightArray build_weight_array(const Grammar& g) {
  WeightArray weights;
  weights.reserve(g.rules.size());
  auto weight_of = [&](Symbol s, Symbol id) -> std::uint64_t {
    if (s == 0 || s >= id)
      throw IoError("grammar rule " + std::to_string(id) +
                    " references symbol " + std::to_string(s) +
                    " out of creation order");
    return g.is_terminal(s) ? s : weights[s - g.terminal_bound - 1];
  };
  for (std::size_t i = 0; i < g.rules.size(); ++i) {
    const Symbol id = g.terminal_bound + 1 + static_cast<Symbol>(i);
    weights.push_back(weight_of(g.rules[i].left, id) +
                      weight_of(g.rules[i].right, id));
  }
  return weights;
}

GapSequence expand_gaps(const CompressedMatrix& cm, std::uint32_t i) {
  if (i == 0 || i > cm.n) throw std::out_of_range("row index " + std::to_string(i));
  GapSequence gaps;
  for_each_gap(cm.grammar, cm.sequences[i - 1], [&](Symbol t) { gaps.push_back(t); });
  return gaps;
}

PositionRow access_row(const CompressedMatrix& cm, std::uint32_t i) {
  if (i == 0 || i > cm.n) throw std::out_of_range("row index " + std::to_string(i));
  PositionRow row;
  std::uint64_t pos = 0;
  for_each_gap(cm.grammar, cm.sequences[i - 1], [&](Symbol t) {
    pos += t;
    row.push_back(static_cast<std::uint32_t>(pos));
  });
  return row;
}

std::vector<std::uint32_t> access_column(const CompressedMatrix& cm, std::uint32_t j) {
  if (j == 0 || j > cm.d) throw std::out_of_range("column index " + std::to_string(j));
  std::vector<std::uint32_t> result;
  const Grammar& g = cm.grammar;
  for (std::uint32_t i = 0; i < cm.n; ++i) {
    std::uint64_t u = 0;
    for (Symbol s : cm.sequences[i]) {
      const std::uint64_t w = symbol_weight(cm, s);
      if (j <= u + w) {
        // The span of s covers j; descend the grammar tree.
        Symbol z = s;
        while (!g.is_terminal(z)) {
          const Rule& r = g.rule_for(z);
          const std::uint64_t wl = symbol_weight(cm, r.left);
          if (u + wl > j) {
            z = r.left;
          } else {
            u += wl;
            z = r.right;
          }
        }
        if (u + z == j) result.push_back(i + 1);
        break;
      }
      u += w;
    }
  }
  return result;
}

std::vector<double> matvec(const CompressedMatrix& cm, const std::vector<double>& w,
                           unsigned threads) {
  if (w.size() != cm.d)
    throw std::invalid_argument("matvec: vector length " + std::to_string(w.size()) +
                                " != d = " + std::to_string(cm.d));
  std::vector<double> out(cm.n, 0.0);
  parallel_chunks(cm.n, threads, [&](std::size_t b, std::size_t e, unsigned) {
    for (std::size_t i = b; i < e; ++i) {
      double acc = 0.0;
      std::uint64_t pos = 0;
      for_each_gap(cm.grammar, cm.sequences[i], [&](Symbol t) {
        pos += t;
        acc += w[pos - 1];
      });
      out[i] = acc;
    }
  });
  return out;
}

std::vector<double> tmatvec(const CompressedMatrix& cm, const std::vector<double>& r,
                            TmatvecStrategy strategy, unsigned threads) {
  if (r.size() != cm.n)
    throw std::invalid_argument("tmatvec: vector length " + std::to_string(r.size()) +
                                " != n = " + std::to_string(cm.n));
  std::vector<double> out(cm.d, 0.0);
  if (strategy == TmatvecStrategy::kRowScan) {
    if (threads <= 1) {
      for (std::size_t i = 0; i < cm.n; ++i) {
        const double ri = r[i];
        std::uint64_t pos = 0;
        for_each_gap(cm.grammar, cm.sequences[i], [&](Symbol t) {
          pos += t;
          out[pos - 1] += ri;
        });
      }
    } else {
      const unsigned t = static_cast<unsigned>(
          std::min<std::size_t>(threads, std::max<std::size_t>(cm.n, 1)));
      std::vector<std::vector<double>> partial(t, std::vector<double>(cm.d, 0.0));
      parallel_chunks(cm.n, t, [&](std::size_t b, std::size_t e, unsigned shard) {
        auto& local = partial[shard];
        for (std::size_t i = b; i < e; ++i) {
          const double ri = r[i];
          std::uint64_t pos = 0;
          for_each_gap(cm.grammar, cm.sequences[i], [&](Symbol sym) {
            pos += sym;
            local[pos - 1] += ri;
          });
        }
      });
      for (const auto& local : partial)
        for (std::size_t j = 0; j < cm.d; ++j) out[j] += local[j];
    }
  } else {
    parallel_chunks(cm.d, threads, [&](std::size_t b, std::size_t e, unsigned) {
      for (std::size_t j = b; j < e; ++j) {
        double acc = 0.0;
        for (std::uint32_t i : access_column(cm, static_cast<std::uint32_t>(j + 1)))
          acc += r[i - 1];
        out[j] = acc;
      }
    });
  }
  return out;
}

namespace {

constexpr char kMagic[5] = {'G', 'C', 'M', 'X', '1'};

using detail::get_u32;
using detail::get_u64;
using detail::put_u32;
using detail::put_u64;

}  // namespace

void write_gcmx(const CompressedMatrix& cm, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  put_u64(out, cm.n);
  put_u64(out, cm.d);
  put_u64(out, cm.grammar.terminal_bound);
  put_u64(out, cm.grammar.rules.size());
  for (const Rule& r : cm.grammar.rules) {
    put_u32(out, r.left);
    put_u32(out, r.right);
  }
  for (const auto& seq : cm.sequences) {
    put_u32(out, static_cast<std::uint32_t>(seq.size()));
    for (Symbol s : seq) put_u32(out, s);
  }
}

void save_gcmx(const CompressedMatrix& cm, const std::string& path) {
  detail::atomic_write(path, [&](std::ostream& out) { write_gcmx(cm, out); });
}

CompressedMatrix read_gcmx(std::istream& in) {
  char magic[5];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw IoError("not a GCMX1 file");
  CompressedMatrix cm;
  const std::uint64_t n = get_u64(in);
  const std::uint64_t d = get_u64(in);
  const std::uint64_t g = get_u64(in);
  const std::uint64_t nrules = get_u64(in);
  const std::uint64_t limit = std::numeric_limits<std::uint32_t>::max();
  if (n > limit || d > limit || g > limit || g + nrules > limit)
    throw IoError("GCMX1 header out of range");
  cm.n = static_cast<std::uint32_t>(n);
  cm.d = static_cast<std::uint32_t>(d);
  cm.grammar.terminal_bound = static_cast<Symbol>(g);
  cm.grammar.rules.reserve(nrules);
  for (std::uint64_t i = 0; i < nrules; ++i) {
    Rule r;
    r.left = get_u32(in);
    r.right = get_u32(in);
    cm.grammar.rules.push_back(r);
  }
  const Symbol max_symbol = static_cast<Symbol>(g + nrules);
  cm.sequences.resize(cm.n);
  for (std::uint32_t i = 0; i < cm.n; ++i) {
    const std::uint32_t len = get_u32(in);
    auto& seq = cm.sequences[i];
    seq.reserve(len);
    for (std::uint32_t q = 0; q < len; ++q) {
      const Symbol s = get_u32(in);
      if (s == 0 || s > max_symbol)
        throw IoError("sequence symbol " + std::to_string(s) + " out of range");
      seq.push_back(s);
    }
  }
  cm.rebuild_weights();  // also validates rule ordering
  return cm;
}

CompressedMatrix load_gcmx(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_gcmx(in);
}

double CompressionStats::ratio_vs_raw32() const {
  if (nnz == 0) return 0.0;
  return static_cast<double>(2 * num_rules + compressed_symbols) /
         static_cast<double>(nnz);
}

CompressionStats compute_stats(const CompressedMatrix& cm) {
  CompressionStats s;
  s.n = cm.n;
  s.d = cm.d;
  s.num_rules = cm.grammar.rules.size();
  // expansion length per rule (count of terminals, not their sum)
  std::vector<std::uint64_t> lengths;
  lengths.reserve(cm.grammar.rules.size());
  auto len_of = [&](Symbol sym) -> std::uint64_t {
    return cm.grammar.is_terminal(sym) ? 1
                                       : lengths[sym - cm.grammar.terminal_bound - 1];
  };
  for (const Rule& r : cm.grammar.rules)
    lengths.push_back(len_of(r.left) + len_of(r.right));
  for (const auto& seq : cm.sequences) {
    s.compressed_symbols += seq.size();
    for (Symbol sym : seq) s.nnz += len_of(sym);
  }
  return s;
}

}  // namespace gcpls
