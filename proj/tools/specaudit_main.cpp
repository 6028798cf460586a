#include <cstdint>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specaudit/audio.hpp"
#include "specaudit/dsp.hpp"
#include "specaudit/error.hpp"
#include "specaudit/image_io.hpp"
#include "specaudit/metrics.hpp"
#include "specaudit/model_io.hpp"
#include "specaudit/net.hpp"
#include "specaudit/pipeline.hpp"
#include "specaudit/report_io.hpp"

namespace fs = std::filesystem;

using namespace specaudit;

namespace {

/// Option misuse that CLI11's declarative checks cannot express;
/// reported like a parse error (usage text, exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

dsp::Window parse_window(const std::string& name) {
  if (name == "hann") return dsp::Window::Hann;
  if (name == "rect") return dsp::Window::Rectangular;
  throw UsageError("BadValue: unknown window '" + name + "' (choose hann or rect)");
}

dsp::SpectroParams spectro_params(long long hop, const std::string& window) {
  dsp::SpectroParams p;
  p.hop = static_cast<index_t>(hop);
  p.window = parse_window(window);
  return p;
}

struct CorpusOptions {
  std::string protocol;
  std::string audio_root;
  std::string val_protocol;
  std::string toy_dir;
};

void add_corpus_flags(CLI::App* cmd, CorpusOptions& o, bool with_val) {
  cmd->add_option("--protocol", o.protocol, "five-field corpus protocol file");
  cmd->add_option("--audio-root", o.audio_root,
                  "directory holding one <track_id>.wav per protocol entry");
  if (with_val) {
    cmd->add_option("--val-protocol", o.val_protocol,
                    "validation protocol (defaults to the training protocol)");
  }
  cmd->add_option("--toy-dir", o.toy_dir,
                  "corpus directory produced by gen-toy (train split for "
                  "training, test split for validation/evaluation)");
}

void require_corpus(const CorpusOptions& o, const std::string& verb) {
  const bool proto = !o.protocol.empty();
  const bool toy = !o.toy_dir.empty();
  if (!proto && !toy) {
    throw UsageError("MissingRequired: " + verb +
                     " needs --toy-dir or --protocol with --audio-root");
  }
  if (proto && toy) {
    throw UsageError("BadValue: --toy-dir and --protocol are mutually exclusive");
  }
  if (proto && o.audio_root.empty()) {
    throw UsageError("MissingRequired: --protocol requires --audio-root");
  }
  if (toy && !o.audio_root.empty()) {
    throw UsageError("BadValue: --audio-root has no effect with --toy-dir");
  }
}

struct SpectroOptions {
  std::string wav;
  std::string out;
  long long hop = 1;
  std::string window = "hann";
  std::string csv;
};

int run_spectro(const SpectroOptions& o) {
  const audio::AudioClip clip = audio::load_wav(o.wav);
  audio::validate_clip(clip, audio::kRequiredRateHz);
  const dsp::Spectrogram spec =
      dsp::spectrogram_of(clip, spectro_params(o.hop, o.window));
  io::write_pgm(io::quantize(spec), o.out);
  if (!o.csv.empty()) {
    io::write_matrix_csv(matrix_t(spec.pixels), o.csv);
  }
  return 0;
}

struct GenToyOptions {
  std::string out_dir;
  long long n = 0;
  std::uint64_t seed = 0;
};

int run_gen_toy(const GenToyOptions& o) {
  const pipeline::ToyDataset toy =
      pipeline::build_toy_dataset(static_cast<index_t>(o.n), o.seed, o.out_dir);
  std::cout << "train entries: " << toy.train.entries.size() << " (genuine "
            << toy.train.count(nn::Label::Genuine) << ")\n";
  std::cout << "test entries: " << toy.test.entries.size() << " (genuine "
            << toy.test.count(nn::Label::Genuine) << ")\n";
  return 0;
}

struct TrainOptions {
  CorpusOptions corpus;
  std::string out_model;
  long long epochs = 10;
  long long batch_size = 32;
  std::uint64_t seed = 0;
  long long hop = 1;
  std::string window = "hann";
  std::string report;
};

int run_train(const TrainOptions& o) {
  require_corpus(o.corpus, "train");

  pipeline::DatasetSplit train_split;
  pipeline::DatasetSplit val_split;
  if (!o.corpus.toy_dir.empty()) {
    pipeline::ToyDataset toy = pipeline::load_toy_dataset(o.corpus.toy_dir);
    train_split = std::move(toy.train);
    val_split = std::move(toy.test);
  } else {
    train_split = pipeline::load_split(o.corpus.protocol, o.corpus.audio_root,
                                       pipeline::SplitName::Train);
    val_split = o.corpus.val_protocol.empty()
                    ? train_split
                    : pipeline::load_split(o.corpus.val_protocol, o.corpus.audio_root,
                                           pipeline::SplitName::Validation);
  }

  pipeline::TrainConfig config;
  config.epochs = static_cast<index_t>(o.epochs);
  config.batch_size = static_cast<index_t>(o.batch_size);
  config.seed = o.seed;
  config.hop = static_cast<index_t>(o.hop);
  config.window = parse_window(o.window);

  std::cerr << "training on " << train_split.entries.size() << " clips, validating on "
            << val_split.entries.size() << " (epochs " << config.epochs << ", batch "
            << config.batch_size << ", hop " << config.hop << ")\n";

  const pipeline::TrainResult result = pipeline::train(config, train_split, val_split);
  nn::save_model(result.model, o.out_model);

  for (const pipeline::EpochStats& e : result.report.epochs) {
    std::cout << "epoch " << e.epoch << "/" << config.epochs << " loss "
              << io::format_g9(e.train_loss) << " train_acc "
              << io::format_g9(e.train_accuracy) << " val_acc "
              << io::format_g9(e.val_accuracy) << "\n";
  }
  std::cerr << "wall clock: " << io::format_g9(result.report.wall_clock_seconds)
            << " s\n";

  if (!o.report.empty()) {
    fs::path csv = o.report;
    fs::path json = o.report;
    if (csv.extension() == ".json") {
      csv.replace_extension(".csv");
    } else {
      json.replace_extension(".json");
    }
    io::write_train_report_csv(result.report, csv);
    io::write_train_report_json(result.report, json);
  }
  return 0;
}

struct EvalOptions {
  std::string model;
  CorpusOptions corpus;
  std::string out_json;
  std::string curves_dir;
  long long hop = 1;
  std::string window = "hann";
};

int run_eval(const EvalOptions& o) {
  require_corpus(o.corpus, "eval");
  const nn::ModelParams model = nn::load_model(o.model);

  const pipeline::DatasetSplit split =
      !o.corpus.toy_dir.empty()
          ? pipeline::load_split(fs::path(o.corpus.toy_dir) / pipeline::kToyTestProtocol,
                                 o.corpus.toy_dir, pipeline::SplitName::Test)
          : pipeline::load_split(o.corpus.protocol, o.corpus.audio_root,
                                 pipeline::SplitName::Test);

  const pipeline::EvalResult result =
      pipeline::evaluate(model, split, spectro_params(o.hop, o.window));
  io::write_metrics_json(result.report, o.out_json);

  if (!o.curves_dir.empty()) {
    const fs::path dir = o.curves_dir;
    fs::create_directories(dir);
    io::write_scores_csv(result.rows, dir / "scores.csv");
    if (result.report.curves_valid) {
      io::write_curve_csv(result.report.roc, dir / "roc.csv");
      io::write_curve_svg(result.report.roc, dir / "roc.svg");
      io::write_curve_csv(result.report.pr, dir / "pr.csv");
      io::write_curve_svg(result.report.pr, dir / "pr.svg");
    }
  }

  std::cout << "accuracy " << io::format_g9(result.report.accuracy) << "\n";
  if (result.report.curves_valid) {
    std::cout << "roc_auc " << io::format_g9(result.report.roc_auc) << "\n";
    std::cout << "pr_auc " << io::format_g9(result.report.pr_auc) << "\n";
  }
  return 0;
}

struct PredictOptions {
  std::string model;
  std::vector<std::string> wavs;
  long long hop = 1;
  std::string window = "hann";
};

int run_predict(const PredictOptions& o) {
  const nn::ModelParams model = nn::load_model(o.model);
  const dsp::SpectroParams params = spectro_params(o.hop, o.window);
  for (const std::string& wav : o.wavs) {
    try {
      const audio::AudioClip clip = audio::load_wav(wav);
      audio::validate_clip(clip, audio::kRequiredRateHz);
      const nn::ClassScores scores =
          nn::forward(model, pipeline::input_from_clip(clip, params), nn::Mode::Infer);
      std::cout << clip.source_id << "\t" << nn::label_name(nn::predict(scores))
                << "\t" << io::format_g9(scores.p_genuine) << "\n";
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()).substr(
                                std::string(error_name(e.code())).size() + 2) +
                                " [" + wav + "]");
    }
  }
  return 0;
}

struct BaselineOptions {
  std::string protocol;
  std::string toy_dir;
  std::uint64_t seed = 0;
  std::string out_json;
};

int run_baseline(const BaselineOptions& o) {
  const bool proto = !o.protocol.empty();
  const bool toy = !o.toy_dir.empty();
  if (proto == toy) {
    throw UsageError(proto
                         ? "BadValue: --toy-dir and --protocol are mutually exclusive"
                         : "MissingRequired: baseline needs --protocol or --toy-dir");
  }

  pipeline::DatasetSplit split;
  if (toy) {
    split = pipeline::load_split(fs::path(o.toy_dir) / pipeline::kToyTestProtocol,
                                 o.toy_dir, pipeline::SplitName::Test);
  } else {
    // The baseline never opens audio, so the protocol alone suffices.
    split.name = pipeline::SplitName::Test;
    split.entries = pipeline::parse_protocol(o.protocol);
    if (split.entries.empty()) {
      throw Error(ErrorCode::ProtocolError,
                  "protocol file " + o.protocol + " lists no tracks");
    }
  }

  const metrics::MetricsReport report = pipeline::baseline_random(split, o.seed);
  io::write_metrics_json(report, o.out_json);
  std::cout << "accuracy " << io::format_g9(report.accuracy) << "\n";
  if (report.curves_valid) {
    std::cout << "roc_auc " << io::format_g9(report.roc_auc) << "\n";
    std::cout << "pr_auc " << io::format_g9(report.pr_auc) << "\n";
  }
  return 0;
}

struct CurvesOptions {
  std::string scores;
  std::string out_dir;
};

int run_curves(const CurvesOptions& o) {
  const std::vector<pipeline::ScoreRow> rows = io::read_scores_csv(o.scores);
  std::vector<scalar_t> scores;
  std::vector<nn::Label> truths;
  scores.reserve(rows.size());
  truths.reserve(rows.size());
  for (const pipeline::ScoreRow& row : rows) {
    scores.push_back(row.p_genuine);
    truths.push_back(row.truth);
  }

  const metrics::CurvePoints roc = metrics::roc_curve(scores, truths);
  const metrics::CurvePoints pr = metrics::pr_curve(scores, truths);

  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  io::write_curve_csv(roc, dir / "roc.csv");
  io::write_curve_svg(roc, dir / "roc.svg");
  io::write_curve_csv(pr, dir / "pr.csv");
  io::write_curve_svg(pr, dir / "pr.svg");

  std::cout << "roc_auc " << io::format_g9(metrics::auc_trapezoid(roc)) << "\n";
  std::cout << "pr_auc " << io::format_g9(metrics::auc_trapezoid(pr)) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"specaudit: genuine-vs-synthesized speech screening over "
               "spectrogram images"};
  app.require_subcommand(1);

  SpectroOptions spectro_opts;
  CLI::App* spectro = app.add_subcommand(
      "spectro", "Render a clip's 50x34 dB spectrogram to a PGM image");
  spectro->add_option("wav", spectro_opts.wav, "input WAV (16 kHz PCM16 mono)")
      ->required();
  spectro->add_option("--out", spectro_opts.out, "output PGM path")->required();
  spectro->add_option("--hop", spectro_opts.hop, "STFT hop in samples")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  spectro->add_option("--window", spectro_opts.window, "analysis window")
      ->capture_default_str()
      ->check(CLI::IsMember({"hann", "rect"}));
  spectro->add_option("--csv", spectro_opts.csv,
                      "also write the pixel matrix as CSV (row 0 = lowest band)");

  GenToyOptions gen_toy_opts;
  CLI::App* gen_toy = app.add_subcommand(
      "gen-toy", "Synthesize a labeled toy corpus with 80/20 train/test protocols");
  gen_toy->add_option("--out-dir", gen_toy_opts.out_dir, "corpus directory")
      ->required();
  gen_toy->add_option("--n", gen_toy_opts.n, "clips per class (>= 10)")
      ->required()
      ->check(CLI::PositiveNumber);
  gen_toy->add_option("--seed", gen_toy_opts.seed, "generator seed")->required();

  TrainOptions train_opts;
  CLI::App* train = app.add_subcommand("train", "Train the CNN classifier");
  add_corpus_flags(train, train_opts.corpus, true);
  train->add_option("--out-model", train_opts.out_model, "trained model path")
      ->required();
  train->add_option("--epochs", train_opts.epochs, "training epochs")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_option("--batch-size", train_opts.batch_size, "mini-batch size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_option("--seed", train_opts.seed, "run seed (init/shuffle/dropout)")
      ->capture_default_str();
  train->add_option("--hop", train_opts.hop, "STFT hop in samples")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_option("--window", train_opts.window, "analysis window")
      ->capture_default_str()
      ->check(CLI::IsMember({"hann", "rect"}));
  train->add_option("--report", train_opts.report,
                    "write the per-epoch report here (CSV) plus a .json summary");

  EvalOptions eval_opts;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a model on a labeled split");
  eval->add_option("--model", eval_opts.model, "model file from train")->required();
  add_corpus_flags(eval, eval_opts.corpus, false);
  eval->add_option("--out-json", eval_opts.out_json, "metrics JSON path")->required();
  eval->add_option("--curves-dir", eval_opts.curves_dir,
                   "write roc/pr CSV+SVG and scores.csv here");
  eval->add_option("--hop", eval_opts.hop, "STFT hop in samples")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  eval->add_option("--window", eval_opts.window, "analysis window")
      ->capture_default_str()
      ->check(CLI::IsMember({"hann", "rect"}));

  PredictOptions predict_opts;
  CLI::App* predict = app.add_subcommand(
      "predict", "Classify WAV files; prints track_id, label, p_genuine");
  predict->add_option("--model", predict_opts.model, "model file from train")
      ->required();
  predict->add_option("wavs", predict_opts.wavs, "WAV files to classify")
      ->required();
  predict->add_option("--hop", predict_opts.hop, "STFT hop in samples")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  predict->add_option("--window", predict_opts.window, "analysis window")
      ->capture_default_str()
      ->check(CLI::IsMember({"hann", "rect"}));

  BaselineOptions baseline_opts;
  CLI::App* baseline = app.add_subcommand(
      "baseline", "Random-guess baseline metrics over a protocol");
  baseline->add_option("--protocol", baseline_opts.protocol,
                       "five-field corpus protocol file");
  baseline->add_option("--toy-dir", baseline_opts.toy_dir,
                       "gen-toy directory (uses its test split)");
  baseline->add_option("--seed", baseline_opts.seed, "guessing seed")->required();
  baseline->add_option("--out-json", baseline_opts.out_json, "metrics JSON path")
      ->required();

  CurvesOptions curves_opts;
  CLI::App* curves = app.add_subcommand(
      "curves", "Rebuild ROC/PR curve files from a scores CSV");
  curves->add_option("--scores", curves_opts.scores,
                     "CSV written by eval (track_id,label,predicted,p_genuine)")
      ->required();
  curves->add_option("--out-dir", curves_opts.out_dir, "curve output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (spectro->parsed()) return run_spectro(spectro_opts);
    if (gen_toy->parsed()) return run_gen_toy(gen_toy_opts);
    if (train->parsed()) return run_train(train_opts);
    if (eval->parsed()) return run_eval(eval_opts);
    if (predict->parsed()) return run_predict(predict_opts);
    if (baseline->parsed()) return run_baseline(baseline_opts);
    if (curves->parsed()) return run_curves(curves_opts);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "run 'specaudit <verb> --help' for usage\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
