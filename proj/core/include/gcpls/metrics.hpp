#pragma once

#include <vector>

#include "gcpls/types.hpp"

namespace gcpls {

enum class Task { kClassification, kRegression };

// value is the metric; degenerate flags an undefined case reported as the
// random-inference value (AUC 0.5 with one class, PCC 0 under constant
// inputs).
struct EvalResult {
  double value = 0.0;
  bool degenerate = false;
};

// Area under the ROC curve by the rank statistic; tied scores contribute
// one half. labels must be in {-1, +1}.
EvalResult auc(const std::vector<double>& scores, const std::vector<double>& labels);

// Pearson correlation coefficient.
EvalResult pcc(const std::vector<double>& a, const std::vector<double>& b);

// AUC for classification, PCC for regression. Lengths must match and be
// at least 2.
EvalResult evaluate(const std::vector<double>& predictions,
                    const std::vector<double>& truth, Task task);

}  // namespace gcpls
