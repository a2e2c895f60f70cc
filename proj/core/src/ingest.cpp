#include "gcpls/ingest.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string_view>

namespace gcpls {

ResponseVector ResponseVector::centered(const std::vector<double>& raw) {
  ResponseVector r;
  r.values = raw;
  if (!raw.empty()) {
    r.mean = std::accumulate(raw.begin(), raw.end(), 0.0) / raw.size();
    for (double& v : r.values) v -= r.mean;
  }
  return r;
}

namespace {

bool parse_u32(std::string_view s, std::uint32_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_label(std::string_view s, double& out) {
  std::string tmp(s);
  char* end = nullptr;
  errno = 0;
  out = std::strtod(tmp.c_str(), &end);
  return errno == 0 && end == tmp.c_str() + tmp.size() && !tmp.empty();
}

void maybe_remap_binary_labels(FingerprintMatrix& m) {
  if (m.labels.empty()) return;
  bool all_01 = true, any_zero = false;
  for (double y : m.labels) {
    if (y == 0.0)
      any_zero = true;
    else if (y != 1.0)
      all_01 = false;
  }
  if (all_01 && any_zero) {
    for (double& y : m.labels) y = (y == 0.0) ? -1.0 : 1.0;
    m.labels_remapped = true;
  }
}

}  // namespace

FingerprintMatrix parse_sparse_stream(std::istream& in,
                                      std::optional<std::uint32_t> expected_dim) {
  FingerprintMatrix m;
  std::uint32_t max_idx = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // whitespace-only line

    double label;
    if (!parse_label(tok, label))
      throw ParseError(lineno, "malformed label '" + tok + "'");

    PositionRow row;
    std::uint32_t prev = 0;
    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 >= tok.size())
        throw ParseError(lineno, "malformed feature '" + tok + "'");
      std::uint32_t idx;
      if (!parse_u32(std::string_view(tok).substr(0, colon), idx) || idx == 0)
        throw ParseError(lineno, "malformed feature index in '" + tok + "'");
      std::string_view val = std::string_view(tok).substr(colon + 1);
      if (val != "1")
        throw ParseError(lineno, "feature value must be 1, got '" + std::string(val) + "'");
      if (idx == prev)
        throw ParseError(lineno, "duplicate feature index " + std::to_string(idx));
      if (idx < prev)
        throw ParseError(lineno, "feature indices out of ascending order at " +
                                     std::to_string(idx));
      if (expected_dim && idx > *expected_dim)
        throw ParseError(lineno, "feature index " + std::to_string(idx) +
                                     " exceeds dimension " + std::to_string(*expected_dim));
      row.push_back(idx);
      prev = idx;
    }
    max_idx = std::max(max_idx, prev);
    m.rows.push_back(std::move(row));
    m.labels.push_back(label);
  }
  m.dim = expected_dim ? *expected_dim : max_idx;
  maybe_remap_binary_labels(m);
  return m;
}

FingerprintMatrix parse_sparse_file(const std::string& path,
                                    std::optional<std::uint32_t> expected_dim) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return parse_sparse_stream(in, expected_dim);
}

void write_sparse_stream(const FingerprintMatrix& m, std::ostream& out) {
  char buf[64];
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    double label = i < m.labels.size() ? m.labels[i] : 0.0;
    std::snprintf(buf, sizeof buf, "%.17g", label);
    out << buf;
    for (std::uint32_t p : m.rows[i]) out << ' ' << p << ":1";
    out << '\n';
  }
}

void write_sparse_file(const FingerprintMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_sparse_stream(m, out);
  if (!out) throw IoError("write to '" + path + "' failed");
}

GapSequence to_gap_sequence(const PositionRow& row) {
  GapSequence gaps;
  gaps.reserve(row.size());
  std::uint32_t prev = 0;
  for (std::uint32_t p : row) {
    gaps.push_back(p - prev);
    prev = p;
  }
  return gaps;
}

PositionRow from_gap_sequence(const GapSequence& gaps, std::uint32_t dim) {
  PositionRow row;
  row.reserve(gaps.size());
  std::uint64_t pos = 0;
  for (std::uint32_t g : gaps) {
    if (g == 0) throw IoError("zero gap in gap sequence");
    pos += g;
    if (pos > dim)
      throw IoError("gap prefix sum " + std::to_string(pos) +
                    " exceeds dimension " + std::to_string(dim));
    row.push_back(static_cast<std::uint32_t>(pos));
  }
  return row;
}

}  // namespace gcpls
