#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specaudit/audio.hpp"
#include "specaudit/dsp.hpp"
#include "specaudit/error.hpp"
#include "specaudit/metrics.hpp"
#include "specaudit/net.hpp"
#include "specaudit/rng.hpp"
#include "specaudit/tensor.hpp"
#include "specaudit/types.hpp"

namespace specaudit::pipeline {

/** One line of a five-field corpus protocol file. */
struct ProtocolEntry {
  std::string speaker_id;
  std::string track_id;
  std::string system_id;  ///< "-" for genuine tracks
  nn::Label label = nn::Label::Genuine;
};

enum class SplitName { Train, Validation, Test };

const char* split_display_name(SplitName name);

struct DatasetSplit {
  SplitName name = SplitName::Train;
  std::vector<ProtocolEntry> entries;
  std::filesystem::path audio_root;

  index_t count(nn::Label label) const;
  std::filesystem::path audio_path(const ProtocolEntry& entry) const;
};

/** Parses a 5-field protocol file: speaker track unused system key.
 *  Keys: bonafide -> genuine, spoof -> synthesized.
 *  Throws ProtocolError (unreadable), MalformedLine, UnknownKey, DuplicateTrack.
 */
std::vector<ProtocolEntry> parse_protocol(const std::filesystem::path& path);

/** Parses the protocol and verifies every track's WAV exists under audio_root.
 *  Throws ProtocolError (empty protocol) and MissingAudio (absent tracks listed).
 */
DatasetSplit load_split(const std::filesystem::path& protocol_path,
                        const std::filesystem::path& audio_root,
                        SplitName name);

inline constexpr const char* kToyTrainProtocol = "toy_train.txt";
inline constexpr const char* kToyTestProtocol = "toy_test.txt";

struct ToyDataset {
  DatasetSplit train;
  DatasetSplit test;
};

/** Synthesizes a balanced two-class corpus under out_dir (WAVs plus the two
 *  protocol files) and returns the 80/20 train/test splits. Harmonic clips are
 *  labeled genuine, modulated-noise clips synthesized. Deterministic in seed.
 *  Throws TooFew when n_per_class < 10.
 */
ToyDataset build_toy_dataset(index_t n_per_class, std::uint64_t seed,
                             const std::filesystem::path& out_dir);

/** Loads the splits of a directory previously produced by build_toy_dataset. */
ToyDataset load_toy_dataset(const std::filesystem::path& dir);

struct TrainConfig {
  index_t epochs = 10;
  index_t batch_size = 32;
  nn::AdamConfig adam;
  std::uint64_t seed = 0;
  index_t hop = 1;
  dsp::Window window = dsp::Window::Hann;
  scalar_t floor_db = dsp::kDefaultFloorDb;

  /** Throws BadValue / BadHop when a field is out of range. */
  void validate() const;

  dsp::SpectroParams spectro() const;
};

struct EpochStats {
  index_t epoch = 0;  ///< 1-based
  scalar_t train_loss = 0.0;
  scalar_t train_accuracy = 0.0;
  scalar_t val_accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  index_t batch_size = 0;
  std::uint64_t seed = 0;
  index_t hop = 0;
  dsp::Window window = dsp::Window::Hann;
  index_t train_examples = 0;
  index_t val_examples = 0;
  /** Kept in memory for operator feedback; excluded from written reports so
   *  identical runs produce identical files. */
  scalar_t wall_clock_seconds = 0.0;
};

struct TrainResult {
  nn::ModelParams model;
  TrainReport report;
};

/** Computes 50x34 spectrogram inputs, memoizing per track. Pixel values are
 *  quantized to 8-bit grayscale before use, so round-tripping through the
 *  optional on-disk PGM cache (directory named by the SPECAUDIT_CACHE_DIR
 *  environment variable) is lossless and caching never changes results.
 */
class SpectrogramProvider {
 public:
  explicit SpectrogramProvider(const dsp::SpectroParams& params);
  SpectrogramProvider(const dsp::SpectroParams& params,
                      std::optional<std::filesystem::path> cache_dir);

  /** 8-bit-quantized spectrogram pixels for one entry. Audio problems are
   *  rethrown as AudioError carrying the track id. */
  const dsp::Spectrogram& pixels(const DatasetSplit& split, const ProtocolEntry& entry);

  /** The same pixels shaped as the rows x cols x 1 network input. */
  nn::Tensor input_tensor(const DatasetSplit& split, const ProtocolEntry& entry);

  const dsp::SpectroParams& params() const { return params_; }

 private:
  dsp::SpectroParams params_;
  std::optional<std::filesystem::path> cache_dir_;
  std::map<std::string, dsp::Spectrogram> memo_;
};

/** Reads SPECAUDIT_CACHE_DIR; empty/unset disables the disk cache. */
std::optional<std::filesystem::path> cache_dir_from_env();

/** Network input for one clip: spectrogram, 8-bit quantization, rows x cols x 1
 *  tensor. The single conversion path shared by training, evaluation, and the
 *  predict command. The clip must already satisfy validate_clip.
 */
nn::Tensor input_from_clip(const audio::AudioClip& clip,
                           const dsp::SpectroParams& params);

/** Trains the CNN: per epoch, a seeded shuffle, mean-gradient mini-batches,
 *  one adam_step per batch, then a validation pass. Deterministic in config.
 *  Throws EmptySplit and AudioError (with track context).
 */
TrainResult train(const TrainConfig& config, const DatasetSplit& train_split,
                  const DatasetSplit& val_split);

/** Per-track evaluation record. */
struct ScoreRow {
  std::string track_id;
  nn::Label truth = nn::Label::Genuine;
  nn::Label predicted = nn::Label::Genuine;
  scalar_t p_genuine = 0.0;
};

struct EvalResult {
  metrics::MetricsReport report;
  std::vector<ScoreRow> rows;  ///< in split order
};

/** Infer-mode forward over every entry; metrics via compute_report.
 *  Throws EmptySplit and AudioError.
 */
EvalResult evaluate(const nn::ModelParams& model, const DatasetSplit& split,
                    const dsp::SpectroParams& spectro_params,
                    nn::Label positive = nn::Label::Genuine);

/** Uniform random predicted label and uniform(0,1) positive score per entry,
 *  pushed through the same metrics path as evaluate. Throws EmptySplit.
 */
metrics::MetricsReport baseline_random(const DatasetSplit& split, std::uint64_t seed);

}  // namespace specaudit::pipeline
