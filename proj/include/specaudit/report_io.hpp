#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "specaudit/metrics.hpp"
#include "specaudit/pipeline.hpp"

namespace specaudit::io {

/// Schema-1 metrics document (2-space indent, trailing newline). Curve AUCs
/// are null when the ground truth held a single class.
std::string metrics_json(const metrics::MetricsReport& report);
void write_metrics_json(const metrics::MetricsReport& report,
                        const std::filesystem::path& path);

/// "x,y,threshold" rows, 9 significant digits. The (0,0) ROC endpoint
/// carries threshold "inf".
void write_curve_csv(const metrics::CurvePoints& curve,
                     const std::filesystem::path& path);

/// Self-contained 640x480 line plot: axes, ticks, labels, no external
/// resources. Byte-identical for identical curves.
std::string curve_svg(const metrics::CurvePoints& curve);
void write_curve_svg(const metrics::CurvePoints& curve,
                     const std::filesystem::path& path);

/// "track_id,label,predicted,p_genuine" rows; labels are genuine/synthesized.
void write_scores_csv(const std::vector<pipeline::ScoreRow>& rows,
                      const std::filesystem::path& path);
std::vector<pipeline::ScoreRow> read_scores_csv(const std::filesystem::path& path);

/// Per-epoch table: epoch,train_loss,train_acc,val_acc.
void write_train_report_csv(const pipeline::TrainReport& report,
                            const std::filesystem::path& path);

/// Run summary (settings + final-epoch stats). Wall-clock time is omitted so
/// reruns with one seed write identical bytes.
void write_train_report_json(const pipeline::TrainReport& report,
                             const std::filesystem::path& path);

}  // namespace specaudit::io
