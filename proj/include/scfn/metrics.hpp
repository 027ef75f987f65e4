#pragma once

#include <optional>
#include <string>
#include <vector>

namespace scfn {

struct Confusion {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  long total() const { return tp + fp + tn + fn; }
};

/// Test-set evaluation summary. auc is empty when the sample set contains
/// a single category (the statistic is undefined there).
struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  std::optional<double> auc;
  Confusion confusion;
};

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

/// Points run from (0,0) to (1,1); fpr and tpr are non-decreasing.
struct RocCurve {
  std::vector<RocPoint> points;
};

/// Fraction of samples whose thresholded prediction matches the label.
/// A score exactly at the threshold predicts the positive category.
double accuracy(const std::vector<double>& scores, const std::vector<int>& labels,
                double threshold = 0.5);

Confusion confusion_counts(const std::vector<double>& scores,
                           const std::vector<int>& labels, double threshold = 0.5);

/// One point per distinct score, threshold descending, prediction positive
/// iff score >= threshold, preceded by the (0,0) anchor (whose recorded
/// threshold is max score + 1). Requires both categories present.
RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels);

/// Mann-Whitney statistic: fraction of (positive, negative) pairs with
/// score_pos > score_neg, ties counted 0.5. Equals the trapezoidal area
/// under roc_curve. Requires both categories present.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Trapezoidal area under the curve, for cross-checking auc().
double trapezoid_area(const RocCurve& curve);

/// Writes "threshold,fpr,tpr" then one comma-separated line per point,
/// at least 6 significant digits.
void write_roc_csv(const RocCurve& curve, const std::string& path);

}  // namespace scfn
