#include "gcpls/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gcpls {

EvalResult auc(const std::vector<double>& scores, const std::vector<double>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("auc: length mismatch");
  std::size_t positives = 0, negatives = 0;
  for (double y : labels) {
    if (y == 1.0)
      ++positives;
    else if (y == -1.0)
      ++negatives;
    else
      throw std::invalid_argument("auc: labels must be -1 or +1");
  }
  if (positives == 0 || negatives == 0) return {0.5, true};

  // Rank statistic with midranks, so tied scores count one half.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>((i + 1) + (j + 1));
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 1.0) positive_rank_sum += midrank;
    i = j + 1;
  }
  const double p = static_cast<double>(positives), q = static_cast<double>(negatives);
  return {(positive_rank_sum - p * (p + 1) / 2.0) / (p * q), false};
}

EvalResult pcc(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("pcc: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw std::invalid_argument("pcc: need at least 2 values");
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return {0.0, true};  // undefined, reported as 0
  return {sab / std::sqrt(saa * sbb), false};
}

EvalResult evaluate(const std::vector<double>& predictions,
                    const std::vector<double>& truth, Task task) {
  if (predictions.size() != truth.size())
    throw std::invalid_argument("evaluate: length mismatch");
  if (predictions.size() < 2)
    throw std::invalid_argument("evaluate: need at least 2 samples");
  return task == Task::kClassification ? auc(predictions, truth)
                                       : pcc(predictions, truth);
}

}  // namespace gcpls
