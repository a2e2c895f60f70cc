#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcpls/compressed_matrix.hpp"
#include "gcpls/types.hpp"

namespace gcpls {

// Minimal matrix interface the PLS solvers need: products with X and X^T.
class MatrixOps {
 public:
  virtual ~MatrixOps() = default;
  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  // out[rows()] = X w, w of length cols()
  virtual void apply(const std::vector<double>& w, std::vector<double>& out) const = 0;
  // out[cols()] = X^T r, r of length rows()
  virtual void apply_transpose(const std::vector<double>& r, std::vector<double>& out) const = 0;
};

// Row-major dense matrix; the NIPALS reference operates on a mutable copy
// of this. Intended for small instances.
class DenseMatrix : public MatrixOps {
 public:
  DenseMatrix(std::size_t n, std::size_t d) : n_(n), d_(d), a_(n * d, 0.0) {}
  explicit DenseMatrix(const FingerprintMatrix& m);

  std::size_t rows() const override { return n_; }
  std::size_t cols() const override { return d_; }
  double& at(std::size_t i, std::size_t j) { return a_[i * d_ + j]; }
  double at(std::size_t i, std::size_t j) const { return a_[i * d_ + j]; }

  void apply(const std::vector<double>& w, std::vector<double>& out) const override;
  void apply_transpose(const std::vector<double>& r, std::vector<double>& out) const override;

  // X -= t (t^T X), t of length n. Destroys the matrix structure; this is
  // exactly what the compressed path avoids.
  void deflate(const std::vector<double>& t);

 private:
  std::size_t n_, d_;
  std::vector<double> a_;
};

// MatrixOps over a grammar-compressed matrix; no decompression happens.
class CompressedOps : public MatrixOps {
 public:
  explicit CompressedOps(const CompressedMatrix& cm,
                         TmatvecStrategy strategy = TmatvecStrategy::kRowScan,
                         unsigned threads = 1)
      : cm_(&cm), strategy_(strategy), threads_(threads) {}

  std::size_t rows() const override { return cm_->n; }
  std::size_t cols() const override { return cm_->d; }
  void apply(const std::vector<double>& w, std::vector<double>& out) const override;
  void apply_transpose(const std::vector<double>& r, std::vector<double>& out) const override;

 private:
  const CompressedMatrix* cm_;
  TmatvecStrategy strategy_;
  unsigned threads_;
};

struct FitConfig {
  std::uint32_t components = 10;    // m
  std::uint32_t top_features = 10;  // u, per component
  double norm_tolerance = 1e-12;    // latent vector declared degenerate below this
};

struct FeatureWeight {
  std::uint32_t feature = 0;  // 1-based column index
  double weight = 0.0;

  friend bool operator==(const FeatureWeight&, const FeatureWeight&) = default;
};

// Fitted PLS model: f(x) = y_mean + sum_i alpha[i] * <W[i], x>.
// The first nonzero entry of each weight vector is non-negative so feature
// rankings are deterministic across implementations.
struct PlsModel {
  std::uint32_t components = 0;  // fitted count (may be below the request)
  std::uint32_t dim = 0;
  double y_mean = 0.0;
  std::vector<std::vector<double>> weights;  // components x dim
  std::vector<double> alpha;
  std::vector<std::vector<FeatureWeight>> feature_rankings;
  bool truncated = false;
};

// Per-fit diagnostics for invariant checks: the orthonormalized latent
// vectors (natural sign) and |r_{i+1}^T t_i| per iteration.
struct FitDiagnostics {
  std::vector<std::vector<double>> latent;
  std::vector<double> residual_latent_dot;
  bool truncated = false;
};

// Reference NIPALS with explicit deflation X <- X - t t^T X, on a dense
// copy. y is centered internally. Serves as the oracle for cpls_fit.
PlsModel nipals_fit(const FingerprintMatrix& matrix, const std::vector<double>& y,
                    const FitConfig& config, FitDiagnostics* diag = nullptr);

// Non-deflation PLS on the compressed matrix: w_i = X^T r_i,
// t_i = orthogonalized X w_i, r_{i+1} = r_i - (y^T t_i) t_i. Never deflates
// or decompresses. Learns the same model as the dense reference.
PlsModel cpls_fit(const CompressedMatrix& cm, const std::vector<double>& y,
                  const FitConfig& config, FitDiagnostics* diag = nullptr,
                  TmatvecStrategy strategy = TmatvecStrategy::kRowScan,
                  unsigned threads = 1);

// Coefficients via (W^T X^T X W) alpha = W^T X^T y, forming XW column by
// column. SPD solve with a one-shot ridge jitter (1e-10 * trace/m) if the
// factorization fails; throws NumericError with the offending component
// otherwise. y must already be centered.
std::vector<double> compute_alpha(const MatrixOps& x,
                                  const std::vector<std::vector<double>>& weights,
                                  const std::vector<double>& y_centered);

// y_mean + sum_i alpha[i] * sum_{p in x} weights[i][p-1]. Classification
// callers threshold the score at 0.
double predict(const PlsModel& model, const PositionRow& x);

// Per component, the u features with largest |weight| (zero weights are
// never ranked), ties broken by smaller index.
std::vector<std::vector<FeatureWeight>> extract_features(
    const std::vector<std::vector<double>>& weights, std::size_t u);

// GCPM1 model container, little-endian:
//   magic "GCPM1"
//   u64 m, u64 d, f64 y_mean
//   m x f64 alpha
//   m x d x f64 weights (row-major)
//   u64 ranking_count, then { u32 component, u32 feature, f64 weight }
// Components and features are 1-based in the triples.
void save_model(const PlsModel& model, const std::string& path);
PlsModel load_model(const std::string& path);

}  // namespace gcpls
