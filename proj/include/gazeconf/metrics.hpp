#pragma once

// ROC curve, AUC, operating-point selection and confusion-matrix rates.
// Positive class is `confused`.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "gazeconf/core.hpp"

namespace gazeconf {

class MetricError : public DataError {
 public:
  using DataError::DataError;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // predict confused iff score >= threshold

  bool operator==(const RocPoint&) const = default;
};

// Thresholds descend from +inf (the (0,0) point) through every distinct
// score; the lowest score gives (1,1).
struct RocCurve {
  std::vector<RocPoint> points;
};

inline RocCurve roc_curve(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw ContractViolation("roc_curve: size mismatch");
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::confused));
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) throw MetricError("roc_curve: both classes must be present");
  if (!std::all_of(scores.begin(), scores.end(), [](double s) { return std::isfinite(s); }))
    throw NumericError("roc_curve: non-finite score");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == Label::confused ? tp : fp) += 1;
      ++i;
    }
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives), s});
  }
  return curve;
}

// Trapezoidal area under the curve.
inline double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  return area;
}

inline double roc_auc(std::span<const double> scores, std::span<const Label> labels) {
  return auc(roc_curve(scores, labels));
}

// Point nearest (fpr, tpr) = (0, 1); ties go to the higher threshold.
inline RocPoint pick_threshold_point(const RocCurve& curve) {
  if (curve.points.empty()) throw MetricError("pick_threshold: empty curve");
  const RocPoint* best = &curve.points.front();
  double best_d2 = std::numeric_limits<double>::infinity();
  for (const auto& p : curve.points) {
    const double d2 = p.fpr * p.fpr + (1.0 - p.tpr) * (1.0 - p.tpr);
    // points come in descending threshold order, so strict < keeps the
    // higher threshold on ties
    if (d2 < best_d2 - 1e-12) {
      best_d2 = d2;
      best = &p;
    }
  }
  return *best;
}

inline double pick_threshold(const RocCurve& curve) { return pick_threshold_point(curve).threshold; }

struct ConfusionCounts {
  int tp = 0;
  int fp = 0;
  int tn = 0;
  int fn = 0;

  bool operator==(const ConfusionCounts&) const = default;
};

struct ConfusionRates {
  double sensitivity = 0.0;
  double specificity = 0.0;
  ConfusionCounts counts;
};

inline ConfusionRates rates_from_counts(const ConfusionCounts& c) {
  ConfusionRates r;
  r.counts = c;
  if (c.tp + c.fn == 0 || c.tn + c.fp == 0) throw MetricError("confusion_metrics: both classes must be present");
  r.sensitivity = static_cast<double>(c.tp) / (c.tp + c.fn);
  r.specificity = static_cast<double>(c.tn) / (c.tn + c.fp);
  return r;
}

inline ConfusionRates confusion_metrics(std::span<const Label> predicted, std::span<const Label> truth) {
  if (predicted.size() != truth.size()) throw ContractViolation("confusion_metrics: size mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] == Label::confused;
    if (truth[i] == Label::confused)
      (p ? c.tp : c.fn) += 1;
    else
      (p ? c.fp : c.tn) += 1;
  }
  return rates_from_counts(c);
}

inline std::vector<Label> apply_threshold(std::span<const double> scores, double threshold) {
  std::vector<Label> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(s >= threshold ? Label::confused : Label::not_confused);
  return out;
}

}  // namespace gazeconf
