#include "specaudit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace specaudit::metrics {

using nn::Label;

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::LengthMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
  if (a == 0) {
    throw Error(ErrorCode::Empty, std::string(what) + ": no examples");
  }
}

struct ClassTotals {
  index_t positives = 0;
  index_t negatives = 0;
};

ClassTotals count_classes(const std::vector<Label>& truth, Label positive) {
  ClassTotals t;
  for (Label l : truth) (l == positive ? t.positives : t.negatives) += 1;
  return t;
}

/** Indices ordered by score descending; equal scores form contiguous groups. */
std::vector<std::size_t> descending_order(const std::vector<scalar_t>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return order;
}

}  // namespace

ConfusionCounts confusion(const std::vector<Label>& truth,
                          const std::vector<Label>& predicted,
                          Label positive) {
  check_lengths(truth.size(), predicted.size(), "confusion labels");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool actual = truth[i] == positive;
    const bool guessed = predicted[i] == positive;
    if (actual && guessed) c.tp += 1;
    else if (actual) c.fn += 1;
    else if (guessed) c.fp += 1;
    else c.tn += 1;
  }
  return c;
}

ConfusionCounts swap_classes(const ConfusionCounts& c) {
  return ConfusionCounts{c.tn, c.fn, c.tp, c.fp};
}

ClassPrf prf_of_positive(const ConfusionCounts& c) {
  ClassPrf r;
  const index_t pred_pos = c.tp + c.fp;
  const index_t actual_pos = c.tp + c.fn;
  if (pred_pos > 0) {
    r.precision = static_cast<scalar_t>(c.tp) / static_cast<scalar_t>(pred_pos);
  } else {
    r.degenerate = true;
  }
  if (actual_pos > 0) {
    r.recall = static_cast<scalar_t>(c.tp) / static_cast<scalar_t>(actual_pos);
  } else {
    r.degenerate = true;
  }
  if (r.precision + r.recall > 0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

ClassPrf prf1(const ConfusionCounts& c, Averaging) {
  const ClassPrf pos = prf_of_positive(c);
  const ClassPrf neg = prf_of_positive(swap_classes(c));
  ClassPrf macro;
  macro.precision = 0.5 * (pos.precision + neg.precision);
  macro.recall = 0.5 * (pos.recall + neg.recall);
  macro.f1 = 0.5 * (pos.f1 + neg.f1);
  macro.degenerate = pos.degenerate || neg.degenerate;
  return macro;
}

CurvePoints roc_curve(const std::vector<scalar_t>& scores,
                      const std::vector<Label>& truth,
                      Label positive) {
  check_lengths(scores.size(), truth.size(), "roc inputs");
  const ClassTotals totals = count_classes(truth, positive);
  if (totals.positives == 0 || totals.negatives == 0) {
    throw Error(ErrorCode::SingleClass, "roc curve needs both classes in the ground truth");
  }

  CurvePoints curve;
  curve.kind = CurveKind::Roc;
  curve.x.push_back(0.0);
  curve.y.push_back(0.0);
  curve.threshold.push_back(std::numeric_limits<scalar_t>::infinity());

  const std::vector<std::size_t> order = descending_order(scores);
  index_t tp = 0;
  index_t fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const scalar_t level = scores[order[i]];
    while (i < order.size() && scores[order[i]] == level) {
      (truth[order[i]] == positive ? tp : fp) += 1;
      ++i;
    }
    curve.x.push_back(static_cast<scalar_t>(fp) / static_cast<scalar_t>(totals.negatives));
    curve.y.push_back(static_cast<scalar_t>(tp) / static_cast<scalar_t>(totals.positives));
    curve.threshold.push_back(level);
  }
  return curve;
}

CurvePoints pr_curve(const std::vector<scalar_t>& scores,
                     const std::vector<Label>& truth,
                     Label positive) {
  check_lengths(scores.size(), truth.size(), "pr inputs");
  const ClassTotals totals = count_classes(truth, positive);
  if (totals.positives == 0 || totals.negatives == 0) {
    throw Error(ErrorCode::SingleClass, "pr curve needs both classes in the ground truth");
  }

  CurvePoints curve;
  curve.kind = CurveKind::Pr;

  const std::vector<std::size_t> order = descending_order(scores);
  index_t tp = 0;
  index_t fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const scalar_t level = scores[order[i]];
    while (i < order.size() && scores[order[i]] == level) {
      (truth[order[i]] == positive ? tp : fp) += 1;
      ++i;
    }
    curve.x.push_back(static_cast<scalar_t>(tp) / static_cast<scalar_t>(totals.positives));
    curve.y.push_back(static_cast<scalar_t>(tp) / static_cast<scalar_t>(tp + fp));
    curve.threshold.push_back(level);
  }
  return curve;
}

scalar_t auc_trapezoid(const CurvePoints& curve) {
  if (curve.size() < 2) {
    throw Error(ErrorCode::TooFewPoints,
                "curve has " + std::to_string(curve.size()) + " points, need at least 2");
  }
  scalar_t area = 0.0;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const scalar_t dx = curve.x[i + 1] - curve.x[i];
    if (dx < 0.0) {
      throw Error(ErrorCode::UnsortedX, "x decreases at point " + std::to_string(i + 1));
    }
    area += dx * 0.5 * (curve.y[i] + curve.y[i + 1]);
  }
  return area;
}

MetricsReport compute_report(const std::vector<scalar_t>& positive_scores,
                             const std::vector<Label>& truth,
                             const std::vector<Label>& predicted,
                             Label positive) {
  check_lengths(truth.size(), predicted.size(), "report labels");
  check_lengths(positive_scores.size(), truth.size(), "report scores");

  MetricsReport report;
  report.positive_class = positive;
  report.confusion = confusion(truth, predicted, positive);
  report.accuracy = static_cast<scalar_t>(report.confusion.tp + report.confusion.tn) /
                    static_cast<scalar_t>(report.confusion.total());
  const ClassPrf macro = prf1(report.confusion);
  report.precision = macro.precision;
  report.recall = macro.recall;
  report.f1 = macro.f1;
  report.degenerate_denominator = macro.degenerate;
  for (Label l : truth) {
    (l == Label::Genuine ? report.n_genuine : report.n_synthesized) += 1;
  }

  const ClassTotals totals = count_classes(truth, positive);
  if (totals.positives > 0 && totals.negatives > 0) {
    report.curves_valid = true;
    report.roc = roc_curve(positive_scores, truth, positive);
    report.pr = pr_curve(positive_scores, truth, positive);
    report.roc_auc = auc_trapezoid(report.roc);
    // When every score ties there is only one distinct threshold, so the PR
    // sweep is a single point and its area is undefined.
    report.pr_auc = report.pr.size() >= 2
                        ? auc_trapezoid(report.pr)
                        : std::numeric_limits<scalar_t>::quiet_NaN();
  } else {
    report.curves_valid = false;
    report.roc.kind = CurveKind::Roc;
    report.pr.kind = CurveKind::Pr;
    report.roc_auc = std::numeric_limits<scalar_t>::quiet_NaN();
    report.pr_auc = std::numeric_limits<scalar_t>::quiet_NaN();
  }
  return report;
}

}  // namespace specaudit::metrics
