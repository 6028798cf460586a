#pragma once

#include <vector>

#include "specaudit/error.hpp"
#include "specaudit/net.hpp"
#include "specaudit/types.hpp"

namespace specaudit::metrics {

/** Standard binary confusion counts relative to a chosen positive class. */
struct ConfusionCounts {
  index_t tp = 0;
  index_t fp = 0;
  index_t tn = 0;
  index_t fn = 0;

  index_t total() const { return tp + fp + tn + fn; }
};

enum class CurveKind { Roc, Pr };

/** Polyline with one threshold per point.
 *  Roc: x = false-positive rate, y = true-positive rate.
 *  Pr:  x = recall,              y = precision.
 */
struct CurvePoints {
  CurveKind kind = CurveKind::Roc;
  std::vector<scalar_t> x;
  std::vector<scalar_t> y;
  std::vector<scalar_t> threshold;  ///< score at/above which the prediction is positive

  std::size_t size() const { return x.size(); }
};

/** Precision/recall/F1 for one class (or a macro average of both).
 *  `degenerate` marks that some denominator was zero and the 0.0 convention fired.
 */
struct ClassPrf {
  scalar_t precision = 0.0;
  scalar_t recall = 0.0;
  scalar_t f1 = 0.0;
  bool degenerate = false;
};

enum class Averaging { Macro };

/** Everything `evaluate`/`baseline` report for one scored label set.
 *  Curves and AUCs require both classes to be present in the ground truth;
 *  otherwise `curves_valid` is false, the curves are empty and the AUCs NaN.
 */
struct MetricsReport {
  nn::Label positive_class = nn::Label::Genuine;
  ConfusionCounts confusion;
  scalar_t accuracy = 0.0;
  scalar_t precision = 0.0;  ///< macro-averaged over both classes
  scalar_t recall = 0.0;
  scalar_t f1 = 0.0;
  bool degenerate_denominator = false;
  index_t n_genuine = 0;
  index_t n_synthesized = 0;
  bool curves_valid = false;
  CurvePoints roc;
  CurvePoints pr;
  scalar_t roc_auc = 0.0;
  scalar_t pr_auc = 0.0;
};

/** Counts agreements/disagreements; throws LengthMismatch or Empty. */
ConfusionCounts confusion(const std::vector<nn::Label>& truth,
                          const std::vector<nn::Label>& predicted,
                          nn::Label positive = nn::Label::Genuine);

/** The same counts with the class roles exchanged. */
ConfusionCounts swap_classes(const ConfusionCounts& c);

/** Precision/recall/F1 of the positive class; zero denominators yield 0. */
ClassPrf prf_of_positive(const ConfusionCounts& c);

/** Macro-averaged precision/recall/F1 (unweighted mean of both classes). */
ClassPrf prf1(const ConfusionCounts& c, Averaging averaging = Averaging::Macro);

/** Threshold sweep over every distinct score, descending, ties grouped.
 *  Emits (0,0) followed by one (FPR, TPR) point per distinct score; the last
 *  point is always (1,1). Throws LengthMismatch, Empty, SingleClass.
 */
CurvePoints roc_curve(const std::vector<scalar_t>& scores,
                      const std::vector<nn::Label>& truth,
                      nn::Label positive = nn::Label::Genuine);

/** One (recall, precision) point per distinct score, descending; the final
 *  point has recall 1. Throws LengthMismatch, Empty, SingleClass.
 */
CurvePoints pr_curve(const std::vector<scalar_t>& scores,
                     const std::vector<nn::Label>& truth,
                     nn::Label positive = nn::Label::Genuine);

/** Trapezoidal area under a curve with non-decreasing x.
 *  Throws TooFewPoints (< 2 points) or UnsortedX.
 */
scalar_t auc_trapezoid(const CurvePoints& curve);

/** Assembles the full report from per-example scores, truths, and predictions. */
MetricsReport compute_report(const std::vector<scalar_t>& positive_scores,
                             const std::vector<nn::Label>& truth,
                             const std::vector<nn::Label>& predicted,
                             nn::Label positive = nn::Label::Genuine);

}  // namespace specaudit::metrics
