#include "specaudit/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "specaudit/image_io.hpp"

namespace specaudit::io {

namespace fs = std::filesystem;
using nn::Label;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::MalformedContainer, "cannot write '" + path.string() + "'");
  }
  return out;
}

Label parse_label(const std::string& text, const std::string& context) {
  if (text == "genuine") return Label::Genuine;
  if (text == "synthesized") return Label::Synthesized;
  throw Error(ErrorCode::UnknownKey, context + ": unknown label '" + text + "'");
}

std::string tick_label(double v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

constexpr const char* kScoresHeader = "track_id,label,predicted,p_genuine";

}  // namespace

std::string metrics_json(const metrics::MetricsReport& report) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["positive_class"] = nn::label_name(report.positive_class);
  j["n_genuine"] = static_cast<std::int64_t>(report.n_genuine);
  j["n_synthesized"] = static_cast<std::int64_t>(report.n_synthesized);
  nlohmann::ordered_json c;
  c["tp"] = static_cast<std::int64_t>(report.confusion.tp);
  c["fp"] = static_cast<std::int64_t>(report.confusion.fp);
  c["tn"] = static_cast<std::int64_t>(report.confusion.tn);
  c["fn"] = static_cast<std::int64_t>(report.confusion.fn);
  j["confusion"] = c;
  j["accuracy"] = report.accuracy;
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f1"] = report.f1;
  j["degenerate_denominator"] = report.degenerate_denominator;
  j["curves_valid"] = report.curves_valid;
  // Undefined areas (single-class split, or an all-tied PR sweep) are null.
  if (report.curves_valid && !std::isnan(report.roc_auc)) {
    j["roc_auc"] = report.roc_auc;
  } else {
    j["roc_auc"] = nullptr;
  }
  if (report.curves_valid && !std::isnan(report.pr_auc)) {
    j["pr_auc"] = report.pr_auc;
  } else {
    j["pr_auc"] = nullptr;
  }
  return j.dump(2) + "\n";
}

void write_metrics_json(const metrics::MetricsReport& report, const fs::path& path) {
  open_out(path) << metrics_json(report);
}

void write_curve_csv(const metrics::CurvePoints& curve, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "x,y,threshold\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << format_g9(curve.x[i]) << "," << format_g9(curve.y[i]) << ","
        << format_g9(curve.threshold[i]) << "\n";
  }
}

std::string curve_svg(const metrics::CurvePoints& curve) {
  const bool roc = curve.kind == metrics::CurveKind::Roc;
  const char* title = roc ? "ROC curve" : "PR curve";
  const char* x_label = roc ? "False positive rate" : "Recall";
  const char* y_label = roc ? "True positive rate" : "Precision";

  const double left = 70.0, bottom = 430.0, width = 540.0, height = 400.0;
  const auto px = [&](double v) { return format_g9(left + width * v); };
  const auto py = [&](double v) { return format_g9(bottom - height * v); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
       "viewBox=\"0 0 640 480\" font-family=\"sans-serif\">\n";
  s += "  <rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
  s += std::string("  <text x=\"340\" y=\"20\" text-anchor=\"middle\" "
                   "font-size=\"16\">") + title + "</text>\n";
  s += "  <rect x=\"70\" y=\"30\" width=\"540\" height=\"400\" fill=\"none\" "
       "stroke=\"#444444\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double v = static_cast<double>(i) / 5.0;
    const std::string label = tick_label(v);
    s += "  <line x1=\"" + px(v) + "\" y1=\"430\" x2=\"" + px(v) +
         "\" y2=\"436\" stroke=\"#444444\"/>\n";
    s += "  <text x=\"" + px(v) +
         "\" y=\"452\" text-anchor=\"middle\" font-size=\"12\">" + label +
         "</text>\n";
    s += "  <line x1=\"64\" y1=\"" + py(v) + "\" x2=\"70\" y2=\"" + py(v) +
         "\" stroke=\"#444444\"/>\n";
    s += "  <text x=\"58\" y=\"" + format_g9(bottom - height * v + 4.0) +
         "\" text-anchor=\"end\" font-size=\"12\">" + label + "</text>\n";
  }

  if (roc) {
    s += "  <line x1=\"70\" y1=\"430\" x2=\"610\" y2=\"30\" stroke=\"#999999\" "
         "stroke-dasharray=\"6 4\"/>\n";
  }

  s += "  <polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (i > 0) s += " ";
    s += px(curve.x[i]) + "," + py(curve.y[i]);
  }
  s += "\"/>\n";

  s += std::string("  <text x=\"340\" y=\"474\" text-anchor=\"middle\" "
                   "font-size=\"14\">") + x_label + "</text>\n";
  s += std::string("  <text x=\"16\" y=\"230\" text-anchor=\"middle\" "
                   "font-size=\"14\" transform=\"rotate(-90 16 230)\">") +
       y_label + "</text>\n";
  s += "</svg>\n";
  return s;
}

void write_curve_svg(const metrics::CurvePoints& curve, const fs::path& path) {
  open_out(path) << curve_svg(curve);
}

void write_scores_csv(const std::vector<pipeline::ScoreRow>& rows, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << kScoresHeader << "\n";
  for (const pipeline::ScoreRow& row : rows) {
    out << row.track_id << "," << nn::label_name(row.truth) << ","
        << nn::label_name(row.predicted) << "," << format_g9(row.p_genuine) << "\n";
  }
}

std::vector<pipeline::ScoreRow> read_scores_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::MalformedContainer, "cannot open '" + path.string() + "'");
  }

  const auto context = [&path](std::size_t line_no) {
    return path.filename().string() + ":" + std::to_string(line_no);
  };

  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::MalformedLine, context(1) + ": missing header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kScoresHeader) {
    throw Error(ErrorCode::MalformedLine,
                context(1) + ": expected header '" + kScoresHeader + "'");
  }

  std::vector<pipeline::ScoreRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::istringstream cells(line);
    std::string track, truth, predicted, score, extra;
    if (!std::getline(cells, track, ',') || !std::getline(cells, truth, ',') ||
        !std::getline(cells, predicted, ',') || !std::getline(cells, score, ',') ||
        std::getline(cells, extra, ',')) {
      throw Error(ErrorCode::MalformedLine, context(line_no) + ": expected 4 columns");
    }

    pipeline::ScoreRow row;
    row.track_id = track;
    row.truth = parse_label(truth, context(line_no));
    row.predicted = parse_label(predicted, context(line_no));
    char* end = nullptr;
    row.p_genuine = std::strtod(score.c_str(), &end);
    if (end == score.c_str() || *end != '\0') {
      throw Error(ErrorCode::MalformedLine,
                  context(line_no) + ": bad p_genuine '" + score + "'");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_train_report_csv(const pipeline::TrainReport& report, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "epoch,train_loss,train_acc,val_acc\n";
  for (const pipeline::EpochStats& e : report.epochs) {
    out << e.epoch << "," << format_g9(e.train_loss) << ","
        << format_g9(e.train_accuracy) << "," << format_g9(e.val_accuracy) << "\n";
  }
}

void write_train_report_json(const pipeline::TrainReport& report, const fs::path& path) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["epochs"] = static_cast<std::int64_t>(report.epochs.size());
  j["batch_size"] = static_cast<std::int64_t>(report.batch_size);
  j["seed"] = report.seed;
  j["hop"] = static_cast<std::int64_t>(report.hop);
  j["window"] = dsp::window_name(report.window);
  j["train_examples"] = static_cast<std::int64_t>(report.train_examples);
  j["val_examples"] = static_cast<std::int64_t>(report.val_examples);
  if (report.epochs.empty()) {
    j["final_train_loss"] = nullptr;
    j["final_train_accuracy"] = nullptr;
    j["final_val_accuracy"] = nullptr;
  } else {
    const pipeline::EpochStats& last = report.epochs.back();
    j["final_train_loss"] = last.train_loss;
    j["final_train_accuracy"] = last.train_accuracy;
    j["final_val_accuracy"] = last.val_accuracy;
  }
  open_out(path) << j.dump(2) << "\n";
}

}  // namespace specaudit::io
