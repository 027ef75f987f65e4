#include "scfn/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace scfn {

namespace {

void check_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("metrics: scores and labels differ in length");
  if (scores.empty()) throw std::invalid_argument("metrics: empty sample set");
  for (int y : labels)
    if (y != 0 && y != 1) throw std::invalid_argument("metrics: labels must be 0 or 1");
}

void check_both_classes(const std::vector<int>& labels, const char* what) {
  long pos = std::count(labels.begin(), labels.end(), 1);
  if (pos == 0 || pos == static_cast<long>(labels.size()))
    throw std::invalid_argument(std::string(what) +
                                " requires at least one sample of each category");
}

}  // namespace

Confusion confusion_counts(const std::vector<double>& scores,
                           const std::vector<int>& labels, double threshold) {
  check_pairs(scores, labels);
  Confusion c;
  for (size_t i = 0; i < scores.size(); ++i) {
    bool pred = scores[i] >= threshold;
    if (labels[i] == 1)
      (pred ? c.tp : c.fn)++;
    else
      (pred ? c.fp : c.tn)++;
  }
  return c;
}

double accuracy(const std::vector<double>& scores, const std::vector<int>& labels,
                double threshold) {
  Confusion c = confusion_counts(scores, labels, threshold);
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_pairs(scores, labels);
  check_both_classes(labels, "roc_curve");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  double p = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  double n = static_cast<double>(labels.size()) - p;

  RocCurve curve;
  curve.points.push_back({scores[order.front()] + 1.0, 0.0, 0.0});
  long tp = 0, fp = 0;
  size_t i = 0;
  while (i < order.size()) {
    double s = scores[order[i]];
    // consume the whole tie group: one ROC point per distinct score
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? tp : fp)++;
      ++i;
    }
    curve.points.push_back({s, static_cast<double>(fp) / n, static_cast<double>(tp) / p});
  }
  return curve;
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_pairs(scores, labels);
  check_both_classes(labels, "auc");
  double wins = 0.0;
  long p = 0, n = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    ++p;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] == 1) continue;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  n = static_cast<long>(scores.size()) - p;
  return wins / (static_cast<double>(p) * static_cast<double>(n));
}

double trapezoid_area(const RocCurve& curve) {
  double area = 0.0;
  for (size_t i = 1; i < curve.points.size(); ++i) {
    const RocPoint& a = curve.points[i - 1];
    const RocPoint& b = curve.points[i];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  return area;
}

void write_roc_csv(const RocCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "threshold,fpr,tpr\n";
  char line[128];
  for (const RocPoint& pt : curve.points) {
    std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g\n", pt.threshold, pt.fpr, pt.tpr);
    out << line;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace scfn
