#include "gcpls/pls.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>
#include <stdexcept>

#include "binary_io.hpp"
#include "gcpls/ingest.hpp"

namespace gcpls {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// t -= sum_j (t_j . t) t_j over the stored latent vectors
void gs_project(std::vector<double>& t, const std::vector<std::vector<double>>& latent) {
  for (const auto& tj : latent) {
    const double c = dot(tj, t);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] -= c * tj[i];
  }
}

// In-place lower Cholesky of the symmetric matrix g (m x m, row-major);
// returns the failing pivot (0-based) or nullopt on success.
std::optional<std::size_t> cholesky(std::vector<double>& g, std::size_t m) {
  for (std::size_t k = 0; k < m; ++k) {
    double pivot = g[k * m + k];
    for (std::size_t i = 0; i < k; ++i) pivot -= g[k * m + i] * g[k * m + i];
    if (!(pivot > 0.0) || !std::isfinite(pivot)) return k;
    const double lkk = std::sqrt(pivot);
    g[k * m + k] = lkk;
    for (std::size_t r = k + 1; r < m; ++r) {
      double v = g[r * m + k];
      for (std::size_t i = 0; i < k; ++i) v -= g[r * m + i] * g[k * m + i];
      g[r * m + k] = v / lkk;
    }
  }
  return std::nullopt;
}

void cholesky_solve(const std::vector<double>& l, std::size_t m, std::vector<double>& x) {
  for (std::size_t i = 0; i < m; ++i) {  // L z = x
    double v = x[i];
    for (std::size_t k = 0; k < i; ++k) v -= l[i * m + k] * x[k];
    x[i] = v / l[i * m + i];
  }
  for (std::size_t ii = m; ii-- > 0;) {  // L^T x = z
    double v = x[ii];
    for (std::size_t k = ii + 1; k < m; ++k) v -= l[k * m + ii] * x[k];
    x[ii] = v / l[ii * m + ii];
  }
}

// Weight vectors are sign-indeterminate; make the first nonzero entry of
// each non-negative (and flip the matching coefficient) so rankings and
// serialized models are deterministic.
void fix_signs(std::vector<std::vector<double>>& weights, std::vector<double>& alpha) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (double v : weights[i]) {
      if (v == 0.0) continue;
      if (v < 0.0) {
        for (double& w : weights[i]) w = -w;
        if (i < alpha.size()) alpha[i] = -alpha[i];
      }
      break;
    }
  }
}

void finish_model(PlsModel& model, std::vector<std::vector<double>>&& weights,
                  std::vector<double>&& alpha, const FitConfig& config) {
  model.components = static_cast<std::uint32_t>(weights.size());
  model.weights = std::move(weights);
  model.alpha = std::move(alpha);
  fix_signs(model.weights, model.alpha);
  model.feature_rankings = extract_features(model.weights, config.top_features);
}

}  // namespace

DenseMatrix::DenseMatrix(const FingerprintMatrix& m)
    : n_(m.rows.size()), d_(m.dim), a_(n_ * d_, 0.0) {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::uint32_t p : m.rows[i]) at(i, p - 1) = 1.0;
}

void DenseMatrix::apply(const std::vector<double>& w, std::vector<double>& out) const {
  if (w.size() != d_) throw std::invalid_argument("dense apply: length mismatch");
  out.assign(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = a_.data() + i * d_;
    double s = 0.0;
    for (std::size_t j = 0; j < d_; ++j) s += row[j] * w[j];
    out[i] = s;
  }
}

void DenseMatrix::apply_transpose(const std::vector<double>& r,
                                  std::vector<double>& out) const {
  if (r.size() != n_) throw std::invalid_argument("dense apply_transpose: length mismatch");
  out.assign(d_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = a_.data() + i * d_;
    const double ri = r[i];
    for (std::size_t j = 0; j < d_; ++j) out[j] += row[j] * ri;
  }
}

void DenseMatrix::deflate(const std::vector<double>& t) {
  std::vector<double> v;
  apply_transpose(t, v);  // v = X^T t
  for (std::size_t i = 0; i < n_; ++i) {
    double* row = a_.data() + i * d_;
    const double ti = t[i];
    for (std::size_t j = 0; j < d_; ++j) row[j] -= ti * v[j];
  }
}

void CompressedOps::apply(const std::vector<double>& w, std::vector<double>& out) const {
  out = matvec(*cm_, w, threads_);
}

void CompressedOps::apply_transpose(const std::vector<double>& r,
                                    std::vector<double>& out) const {
  out = tmatvec(*cm_, r, strategy_, threads_);
}

std::vector<double> compute_alpha(const MatrixOps& x,
                                  const std::vector<std::vector<double>>& weights,
                                  const std::vector<double>& y_centered) {
  const std::size_t m = weights.size();
  if (m == 0) return {};
  // XW column by column (each column via a row access product)
  std::vector<std::vector<double>> xw(m);
  for (std::size_t i = 0; i < m; ++i) x.apply(weights[i], xw[i]);

  std::vector<double> gram(m * m, 0.0), rhs(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = dot(xw[i], xw[j]);
      gram[i * m + j] = v;
      gram[j * m + i] = v;
    }
    rhs[i] = dot(xw[i], y_centered);
  }

  std::vector<double> factor = gram;
  std::vector<double> alpha = rhs;
  auto fail = cholesky(factor, m);
  if (fail) {
    double trace = 0.0;
    for (std::size_t i = 0; i < m; ++i) trace += gram[i * m + i];
    const double jitter = 1e-10 * trace / static_cast<double>(m);
    factor = gram;
    for (std::size_t i = 0; i < m; ++i) factor[i * m + i] += jitter;
    alpha = rhs;
    fail = cholesky(factor, m);
    if (fail)
      throw NumericError("Gram matrix singular after jitter at component " +
                             std::to_string(*fail + 1),
                         static_cast<int>(*fail + 1));
  }
  cholesky_solve(factor, m, alpha);
  return alpha;
}

PlsModel nipals_fit(const FingerprintMatrix& matrix, const std::vector<double>& y,
                    const FitConfig& config, FitDiagnostics* diag) {
  if (matrix.rows.empty() || matrix.dim == 0)
    throw std::invalid_argument("nipals_fit: empty matrix");
  if (y.size() != matrix.rows.size())
    throw std::invalid_argument("nipals_fit: label count != row count");

  const ResponseVector yc = ResponseVector::centered(y);
  DenseMatrix original(matrix);
  DenseMatrix work = original;

  PlsModel model;
  model.dim = matrix.dim;
  model.y_mean = yc.mean;

  std::vector<std::vector<double>> weights, latent;
  std::vector<double> w, t;
  for (std::uint32_t i = 0; i < config.components; ++i) {
    work.apply_transpose(yc.values, w);  // w_i = X^T y on the deflated matrix
    work.apply(w, t);
    const double nrm = norm2(t);
    if (nrm < config.norm_tolerance) {
      model.truncated = true;
      break;
    }
    for (double& v : t) v /= nrm;
    work.deflate(t);
    weights.push_back(w);
    latent.push_back(t);
  }

  std::vector<double> alpha = compute_alpha(original, weights, yc.values);
  if (diag) {
    diag->latent = latent;
    diag->truncated = model.truncated;
    diag->residual_latent_dot.clear();
    // NIPALS keeps no explicit residual; reconstruct r_{i+1} = y - sum_j (y.t_j) t_j
    std::vector<double> r = yc.values;
    for (const auto& tj : latent) {
      const double c = dot(yc.values, tj);
      for (std::size_t q = 0; q < r.size(); ++q) r[q] -= c * tj[q];
      diag->residual_latent_dot.push_back(std::abs(dot(r, tj)));
    }
  }
  finish_model(model, std::move(weights), std::move(alpha), config);
  return model;
}

PlsModel cpls_fit(const CompressedMatrix& cm, const std::vector<double>& y,
                  const FitConfig& config, FitDiagnostics* diag,
                  TmatvecStrategy strategy, unsigned threads) {
  if (cm.n == 0 || cm.d == 0) throw std::invalid_argument("cpls_fit: empty matrix");
  if (y.size() != cm.n)
    throw std::invalid_argument("cpls_fit: label count != row count");

  const ResponseVector yc = ResponseVector::centered(y);
  CompressedOps ops(cm, strategy, threads);

  PlsModel model;
  model.dim = cm.d;
  model.y_mean = yc.mean;

  std::vector<std::vector<double>> weights, latent;
  std::vector<double> r = yc.values;
  std::vector<double> w, t;
  if (diag) diag->residual_latent_dot.clear();

  for (std::uint32_t i = 0; i < config.components; ++i) {
    ops.apply_transpose(r, w);  // w_i = X^T r_i
    ops.apply(w, t);            // X w_i
    if (!latent.empty()) {
      gs_project(t, latent);
      // Classical single-pass Gram-Schmidt loses orthogonality in floating
      // point; re-run it when the request is large or residual overlap
      // survives the first pass.
      bool second_pass = config.components > 30;
      if (!second_pass) {
        const double nrm0 = norm2(t);
        double max_overlap = 0.0;
        for (const auto& tj : latent)
          max_overlap = std::max(max_overlap, std::abs(dot(tj, t)));
        second_pass = max_overlap > 1e-10 * nrm0;
      }
      if (second_pass) gs_project(t, latent);
    }
    const double nrm = norm2(t);
    if (nrm < config.norm_tolerance) {
      model.truncated = true;
      break;
    }
    for (double& v : t) v /= nrm;
    const double yt = dot(yc.values, t);
    for (std::size_t q = 0; q < r.size(); ++q) r[q] -= yt * t[q];  // r_{i+1}
    if (diag) diag->residual_latent_dot.push_back(std::abs(dot(r, t)));
    weights.push_back(w);
    latent.push_back(t);
  }

  std::vector<double> alpha = compute_alpha(ops, weights, yc.values);
  if (diag) {
    diag->latent = latent;
    diag->truncated = model.truncated;
  }
  finish_model(model, std::move(weights), std::move(alpha), config);
  return model;
}

double predict(const PlsModel& model, const PositionRow& x) {
  for (std::uint32_t p : x)
    if (p == 0 || p > model.dim)
      throw std::out_of_range("predict: position " + std::to_string(p) +
                              " outside model dimension " + std::to_string(model.dim));
  double score = model.y_mean;
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    double s = 0.0;
    for (std::uint32_t p : x) s += model.weights[i][p - 1];
    score += model.alpha[i] * s;
  }
  return score;
}

std::vector<std::vector<FeatureWeight>> extract_features(
    const std::vector<std::vector<double>>& weights, std::size_t u) {
  std::vector<std::vector<FeatureWeight>> rankings;
  rankings.reserve(weights.size());
  for (const auto& w : weights) {
    std::vector<FeatureWeight> ranked;
    for (std::size_t j = 0; j < w.size(); ++j)
      if (w[j] != 0.0) ranked.push_back({static_cast<std::uint32_t>(j + 1), w[j]});
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      const double ma = std::abs(a.weight), mb = std::abs(b.weight);
      if (ma != mb) return ma > mb;
      return a.feature < b.feature;
    });
    if (ranked.size() > u) ranked.resize(u);
    rankings.push_back(std::move(ranked));
  }
  return rankings;
}

namespace {
constexpr char kModelMagic[5] = {'G', 'C', 'P', 'M', '1'};
}

void save_model(const PlsModel& model, const std::string& path) {
  detail::atomic_write(path, [&](std::ostream& out) {
    out.write(kModelMagic, sizeof kModelMagic);
    detail::put_u64(out, model.components);
    detail::put_u64(out, model.dim);
    detail::put_f64(out, model.y_mean);
    for (double a : model.alpha) detail::put_f64(out, a);
    for (const auto& w : model.weights)
      for (double v : w) detail::put_f64(out, v);
    std::uint64_t count = 0;
    for (const auto& r : model.feature_rankings) count += r.size();
    detail::put_u64(out, count);
    for (std::size_t c = 0; c < model.feature_rankings.size(); ++c) {
      for (const FeatureWeight& fw : model.feature_rankings[c]) {
        detail::put_u32(out, static_cast<std::uint32_t>(c + 1));
        detail::put_u32(out, fw.feature);
        detail::put_f64(out, fw.weight);
      }
    }
  });
}

PlsModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  char magic[5];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kModelMagic, sizeof magic) != 0)
    throw IoError("not a GCPM1 file");
  PlsModel model;
  const std::uint64_t m = detail::get_u64(in);
  const std::uint64_t d = detail::get_u64(in);
  if (m > (1u << 20) || d > 0xffffffffull) throw IoError("GCPM1 header out of range");
  model.components = static_cast<std::uint32_t>(m);
  model.dim = static_cast<std::uint32_t>(d);
  model.y_mean = detail::get_f64(in);
  model.alpha.resize(m);
  for (double& a : model.alpha) a = detail::get_f64(in);
  model.weights.assign(m, std::vector<double>(d));
  for (auto& w : model.weights)
    for (double& v : w) v = detail::get_f64(in);
  const std::uint64_t count = detail::get_u64(in);
  model.feature_rankings.assign(m, {});
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t comp = detail::get_u32(in);
    FeatureWeight fw;
    fw.feature = detail::get_u32(in);
    fw.weight = detail::get_f64(in);
    if (comp == 0 || comp > m || fw.feature == 0 || fw.feature > d)
      throw IoError("GCPM1 ranking entry out of range");
    model.feature_rankings[comp - 1].push_back(fw);
  }
  return model;
}

}  // namespace gcpls
