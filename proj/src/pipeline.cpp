#include "specaudit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "specaudit/image_io.hpp"

namespace specaudit::pipeline {

namespace fs = std::filesystem;
using nn::Label;

namespace {

// Fixed salts deriving independent substreams from one user seed.
constexpr std::uint64_t kInitSalt = 0x696e697470617261ULL;
constexpr std::uint64_t kShuffleSalt = 0x73687566666c6531ULL;
constexpr std::uint64_t kDropoutSalt = 0x64726f706f757431ULL;
constexpr std::uint64_t kDurationSalt = 0x6475726174696f6eULL;

std::string line_context(const fs::path& path, std::size_t line_no) {
  return path.filename().string() + ":" + std::to_string(line_no);
}

}  // namespace

const char* split_display_name(SplitName name) {
  switch (name) {
    case SplitName::Train: return "train";
    case SplitName::Validation: return "validation";
    case SplitName::Test: return "test";
  }
  return "?";
}

index_t DatasetSplit::count(Label label) const {
  return static_cast<index_t>(
      std::count_if(entries.begin(), entries.end(),
                    [label](const ProtocolEntry& e) { return e.label == label; }));
}

fs::path DatasetSplit::audio_path(const ProtocolEntry& entry) const {
  return audio_root / (entry.track_id + ".wav");
}

std::vector<ProtocolEntry> parse_protocol(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ProtocolError, "cannot open protocol file " + path.string());
  }

  std::vector<ProtocolEntry> entries;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::istringstream fields(line);
    ProtocolEntry entry;
    std::string unused, key, extra;
    if (!(fields >> entry.speaker_id)) continue;  // blank line
    if (!(fields >> entry.track_id >> unused >> entry.system_id >> key) ||
        (fields >> extra)) {
      throw Error(ErrorCode::MalformedLine,
                  line_context(path, line_no) + ": expected 5 space-separated fields");
    }
    if (key == "bonafide") {
      entry.label = Label::Genuine;
    } else if (key == "spoof") {
      entry.label = Label::Synthesized;
    } else {
      throw Error(ErrorCode::UnknownKey,
                  line_context(path, line_no) + ": unknown key '" + key + "'");
    }
    if (!seen.insert(entry.track_id).second) {
      throw Error(ErrorCode::DuplicateTrack,
                  line_context(path, line_no) + ": track '" + entry.track_id +
                      "' appears twice");
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

DatasetSplit load_split(const fs::path& protocol_path, const fs::path& audio_root,
                        SplitName name) {
  DatasetSplit split;
  split.name = name;
  split.audio_root = audio_root;
  split.entries = parse_protocol(protocol_path);
  if (split.entries.empty()) {
    throw Error(ErrorCode::ProtocolError,
                "protocol file " + protocol_path.string() + " lists no tracks");
  }

  std::vector<std::string> missing;
  for (const ProtocolEntry& entry : split.entries) {
    if (!fs::exists(split.audio_path(entry))) missing.push_back(entry.track_id);
  }
  if (!missing.empty()) {
    std::string detail = std::to_string(missing.size()) + " of " +
                         std::to_string(split.entries.size()) +
                         " tracks have no WAV under " + audio_root.string() + ":";
    const std::size_t shown = std::min<std::size_t>(missing.size(), 5);
    for (std::size_t i = 0; i < shown; ++i) detail += " " + missing[i];
    if (missing.size() > shown) {
      detail += " (and " + std::to_string(missing.size() - shown) + " more)";
    }
    throw Error(ErrorCode::MissingAudio, detail);
  }
  return split;
}

ToyDataset build_toy_dataset(index_t n_per_class, std::uint64_t seed,
                             const fs::path& out_dir) {
  if (n_per_class < 10) {
    throw Error(ErrorCode::TooFew, "need at least 10 clips per class, got " +
                                       std::to_string(n_per_class));
  }
  fs::create_directories(out_dir);

  struct ToyClip {
    ProtocolEntry entry;
    audio::ToyKind kind = audio::ToyKind::Harmonic;
    std::uint64_t clip_seed = 0;
    double duration_s = 0.0;
  };

  const std::uint64_t base = splitmix64(seed);
  SeededRng duration_rng(splitmix64(seed ^ kDurationSalt));
  std::vector<ToyClip> clips;
  clips.reserve(static_cast<std::size_t>(2 * n_per_class));

  char track[32];
  for (index_t i = 0; i < n_per_class; ++i) {
    ToyClip clip;
    std::snprintf(track, sizeof(track), "TOY_H_%04lld", static_cast<long long>(i));
    clip.entry = ProtocolEntry{"TOY_SPK_H", track, "-", Label::Genuine};
    clip.kind = audio::ToyKind::Harmonic;
    clip.clip_seed = splitmix64(base + static_cast<std::uint64_t>(2 * i));
    clip.duration_s = 0.9 + 0.2 * duration_rng.uniform01();
    clips.push_back(std::move(clip));
  }
  for (index_t i = 0; i < n_per_class; ++i) {
    ToyClip clip;
    std::snprintf(track, sizeof(track), "TOY_N_%04lld", static_cast<long long>(i));
    clip.entry = ProtocolEntry{"TOY_SPK_N", track, "TOYA1", Label::Synthesized};
    clip.kind = audio::ToyKind::ModulatedNoise;
    clip.clip_seed = splitmix64(base + static_cast<std::uint64_t>(2 * i + 1));
    clip.duration_s = 0.9 + 0.2 * duration_rng.uniform01();
    clips.push_back(std::move(clip));
  }

  for (const ToyClip& clip : clips) {
    audio::AudioClip wav =
        audio::synthesize_toy_clip(clip.kind, clip.duration_s, clip.clip_seed);
    wav.source_id = clip.entry.track_id;
    audio::save_wav(wav, out_dir / (clip.entry.track_id + ".wav"));
  }

  const index_t n_train = n_per_class * 8 / 10;
  const auto protocol_line = [](const ProtocolEntry& e) {
    const char* key = e.label == Label::Genuine ? "bonafide" : "spoof";
    return e.speaker_id + " " + e.track_id + " - " + e.system_id + " " + key + "\n";
  };

  std::ofstream train_file(out_dir / kToyTrainProtocol);
  std::ofstream test_file(out_dir / kToyTestProtocol);
  if (!train_file || !test_file) {
    throw Error(ErrorCode::ProtocolError,
                "cannot write protocol files under " + out_dir.string());
  }
  for (index_t c = 0; c < 2; ++c) {
    for (index_t i = 0; i < n_per_class; ++i) {
      const ToyClip& clip = clips[static_cast<std::size_t>(c * n_per_class + i)];
      (i < n_train ? train_file : test_file) << protocol_line(clip.entry);
    }
  }
  train_file.close();
  test_file.close();

  return load_toy_dataset(out_dir);
}

ToyDataset load_toy_dataset(const fs::path& dir) {
  ToyDataset toy;
  toy.train = load_split(dir / kToyTrainProtocol, dir, SplitName::Train);
  toy.test = load_split(dir / kToyTestProtocol, dir, SplitName::Test);
  return toy;
}

void TrainConfig::validate() const {
  if (epochs < 1) {
    throw Error(ErrorCode::BadValue, "epochs must be >= 1, got " + std::to_string(epochs));
  }
  if (batch_size < 1) {
    throw Error(ErrorCode::BadValue,
                "batch size must be >= 1, got " + std::to_string(batch_size));
  }
  if (hop < 1) {
    throw Error(ErrorCode::BadHop, "hop must be >= 1, got " + std::to_string(hop));
  }
  if (!(adam.lr > 0.0) || !(adam.epsilon > 0.0)) {
    throw Error(ErrorCode::BadValue, "adam learning rate and epsilon must be positive");
  }
}

dsp::SpectroParams TrainConfig::spectro() const {
  dsp::SpectroParams p;
  p.hop = hop;
  p.window = window;
  p.floor_db = floor_db;
  return p;
}

std::optional<fs::path> cache_dir_from_env() {
  const char* dir = std::getenv("SPECAUDIT_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return fs::path(dir);
}

SpectrogramProvider::SpectrogramProvider(const dsp::SpectroParams& params)
    : SpectrogramProvider(params, cache_dir_from_env()) {}

SpectrogramProvider::SpectrogramProvider(const dsp::SpectroParams& params,
                                         std::optional<fs::path> cache_dir)
    : params_(params), cache_dir_(std::move(cache_dir)) {
  if (cache_dir_) fs::create_directories(*cache_dir_);
}

namespace {

nlohmann::ordered_json cache_metadata(const std::string& track_id,
                                      const dsp::SpectroParams& p) {
  nlohmann::ordered_json meta;
  meta["track_id"] = track_id;
  meta["block_len"] = static_cast<std::int64_t>(p.block_len);
  meta["hop"] = static_cast<std::int64_t>(p.hop);
  meta["window"] = dsp::window_name(p.window);
  meta["floor_db"] = p.floor_db;
  return meta;
}

}  // namespace

const dsp::Spectrogram& SpectrogramProvider::pixels(const DatasetSplit& split,
                                                    const ProtocolEntry& entry) {
  const auto it = memo_.find(entry.track_id);
  if (it != memo_.end()) return it->second;

  std::optional<dsp::Spectrogram> spec;
  if (cache_dir_) {
    const fs::path pgm = *cache_dir_ / (entry.track_id + ".pgm");
    const fs::path meta_path = *cache_dir_ / (entry.track_id + ".json");
    if (fs::exists(pgm) && fs::exists(meta_path)) {
      try {
        std::ifstream meta_in(meta_path);
        const auto meta = nlohmann::ordered_json::parse(meta_in);
        if (meta == cache_metadata(entry.track_id, params_)) {
          spec = io::dequantize(io::read_pgm(pgm));
        }
      } catch (...) {
        // Unreadable or stale cache entries are recomputed and overwritten.
        spec.reset();
      }
    }
  }

  if (!spec) {
    try {
      const audio::AudioClip clip = audio::load_wav(split.audio_path(entry));
      audio::validate_clip(clip, audio::kRequiredRateHz);
      const io::PixelGrid grid = io::quantize(dsp::spectrogram_of(clip, params_));
      if (cache_dir_) {
        io::write_pgm(grid, *cache_dir_ / (entry.track_id + ".pgm"));
        std::ofstream meta_out(*cache_dir_ / (entry.track_id + ".json"));
        meta_out << cache_metadata(entry.track_id, params_).dump(2) << "\n";
      }
      spec = io::dequantize(grid);
    } catch (const Error& e) {
      throw Error(ErrorCode::AudioError,
                  "track " + entry.track_id + ": " + e.what());
    }
  }
  return memo_.emplace(entry.track_id, *spec).first->second;
}

namespace {

nn::Tensor to_input_tensor(const dsp::Spectrogram& spec) {
  nn::Tensor input({dsp::kSpectroRows, dsp::kSpectroCols, 1});
  for (index_t i = 0; i < dsp::kSpectroRows; ++i) {
    for (index_t j = 0; j < dsp::kSpectroCols; ++j) {
      input(i, j, 0) = spec.pixels(i, j);
    }
  }
  return input;
}

}  // namespace

nn::Tensor SpectrogramProvider::input_tensor(const DatasetSplit& split,
                                             const ProtocolEntry& entry) {
  return to_input_tensor(pixels(split, entry));
}

nn::Tensor input_from_clip(const audio::AudioClip& clip,
                           const dsp::SpectroParams& params) {
  return to_input_tensor(
      io::dequantize(io::quantize(dsp::spectrogram_of(clip, params))));
}

TrainResult train(const TrainConfig& config, const DatasetSplit& train_split,
                  const DatasetSplit& val_split) {
  config.validate();
  if (train_split.entries.empty()) {
    throw Error(ErrorCode::EmptySplit, "training split has no entries");
  }
  if (val_split.entries.empty()) {
    throw Error(ErrorCode::EmptySplit, "validation split has no entries");
  }

  const auto started = std::chrono::steady_clock::now();
  SpectrogramProvider provider(config.spectro());

  // Warm the spectrogram memo in protocol order; any audio problem
  // surfaces here, before optimization time is spent.
  for (const ProtocolEntry& entry : train_split.entries) {
    provider.pixels(train_split, entry);
  }
  for (const ProtocolEntry& entry : val_split.entries) {
    provider.pixels(val_split, entry);
  }

  nn::ModelParams model = nn::init_params(splitmix64(config.seed ^ kInitSalt));
  nn::AdamState adam_state = nn::AdamState::zeros(model.arch);
  SeededRng shuffle_rng(splitmix64(config.seed ^ kShuffleSalt));
  SeededRng dropout_rng(splitmix64(config.seed ^ kDropoutSalt));

  const std::size_t n = train_split.entries.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainReport report;
  report.batch_size = config.batch_size;
  report.seed = config.seed;
  report.hop = config.hop;
  report.window = config.window;
  report.train_examples = static_cast<index_t>(n);
  report.val_examples = static_cast<index_t>(val_split.entries.size());

  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
  for (index_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(order[i], order[shuffle_rng.below(i + 1)]);
    }

    scalar_t loss_sum = 0.0;
    index_t train_correct = 0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t stop = std::min(n, start + batch_size);
      nn::ParamBlock grads = nn::ParamBlock::zeros(model.arch);
      for (std::size_t k = start; k < stop; ++k) {
        const ProtocolEntry& entry = train_split.entries[order[k]];
        const nn::Tensor input = provider.input_tensor(train_split, entry);
        nn::ForwardCache cache;
        const nn::ClassScores scores =
            nn::forward(model, input, nn::Mode::Train, &dropout_rng, &cache);
        loss_sum += nn::cross_entropy(scores, entry.label);
        train_correct += nn::predict(scores) == entry.label ? 1 : 0;
        nn::axpy(grads, nn::backward(model, cache, entry.label), 1.0);
      }
      nn::scale(grads, 1.0 / static_cast<scalar_t>(stop - start));
      nn::adam_step(model, grads, adam_state, config.adam);
    }

    index_t val_correct = 0;
    for (const ProtocolEntry& entry : val_split.entries) {
      const nn::Tensor input = provider.input_tensor(val_split, entry);
      const nn::ClassScores scores = nn::forward(model, input, nn::Mode::Infer);
      val_correct += nn::predict(scores) == entry.label ? 1 : 0;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<scalar_t>(n);
    stats.train_accuracy =
        static_cast<scalar_t>(train_correct) / static_cast<scalar_t>(n);
    stats.val_accuracy = static_cast<scalar_t>(val_correct) /
                         static_cast<scalar_t>(val_split.entries.size());
    report.epochs.push_back(stats);
  }

  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return TrainResult{std::move(model), std::move(report)};
}

EvalResult evaluate(const nn::ModelParams& model, const DatasetSplit& split,
                    const dsp::SpectroParams& spectro_params, Label positive) {
  if (split.entries.empty()) {
    throw Error(ErrorCode::EmptySplit, "evaluation split has no entries");
  }

  SpectrogramProvider provider(spectro_params);
  std::vector<scalar_t> scores;
  std::vector<Label> truths;
  std::vector<Label> preds;
  EvalResult result;
  scores.reserve(split.entries.size());
  truths.reserve(split.entries.size());
  preds.reserve(split.entries.size());
  result.rows.reserve(split.entries.size());

  for (const ProtocolEntry& entry : split.entries) {
    const nn::Tensor input = provider.input_tensor(split, entry);
    const nn::ClassScores s = nn::forward(model, input, nn::Mode::Infer);
    const Label predicted = nn::predict(s);
    scores.push_back(s.of(positive));
    truths.push_back(entry.label);
    preds.push_back(predicted);
    result.rows.push_back(ScoreRow{entry.track_id, entry.label, predicted, s.p_genuine});
  }

  result.report = metrics::compute_report(scores, truths, preds, positive);
  return result;
}

metrics::MetricsReport baseline_random(const DatasetSplit& split, std::uint64_t seed) {
  if (split.entries.empty()) {
    throw Error(ErrorCode::EmptySplit, "baseline split has no entries");
  }

  SeededRng rng(seed);
  std::vector<scalar_t> scores;
  std::vector<Label> truths;
  std::vector<Label> preds;
  scores.reserve(split.entries.size());
  truths.reserve(split.entries.size());
  preds.reserve(split.entries.size());
  for (const ProtocolEntry& entry : split.entries) {
    preds.push_back(rng.below(2) == 0 ? Label::Genuine : Label::Synthesized);
    scores.push_back(rng.uniform01());
    truths.push_back(entry.label);
  }
  return metrics::compute_report(scores, truths, preds, Label::Genuine);
}

}  // namespace specaudit::pipeline
