#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "specaudit/rng.hpp"
#include "specaudit/tensor.hpp"
#include "specaudit/types.hpp"

namespace specaudit::nn {

enum class Label { Genuine, Synthesized };

inline constexpr int kNumClasses = 2;

/// Class index order is [genuine, synthesized] everywhere.
constexpr int class_index(Label l) { return l == Label::Genuine ? 0 : 1; }
constexpr const char* label_name(Label l) {
  return l == Label::Genuine ? "genuine" : "synthesized";
}
constexpr Label other_class(Label l) {
  return l == Label::Genuine ? Label::Synthesized : Label::Genuine;
}

/// Two softmax detection scores; they sum to 1.
struct ClassScores {
  scalar_t p_genuine = 0.0;
  scalar_t p_synthesized = 0.0;

  scalar_t of(Label l) const {
    return l == Label::Genuine ? p_genuine : p_synthesized;
  }
};

/// Network geometry: conv(3x3) -> conv(3x3) -> maxpool(2x2) -> dropout ->
/// flatten -> dense -> dropout -> dense(2) -> softmax. Convolutions are
/// valid (unpadded), stride 1, ReLU. Defaults are the full-size model;
/// tests also instantiate a reduced geometry.
struct Arch {
  index_t input_rows = 50;
  index_t input_cols = 34;
  index_t conv1_filters = 32;
  index_t conv2_filters = 64;
  index_t dense1_units = 128;
  scalar_t dropout1_rate = 0.25;
  scalar_t dropout2_rate = 0.5;

  static constexpr index_t kKernel = 3;

  index_t conv1_rows() const { return input_rows - 2; }
  index_t conv1_cols() const { return input_cols - 2; }
  index_t conv2_rows() const { return input_rows - 4; }
  index_t conv2_cols() const { return input_cols - 4; }
  index_t pool_rows() const { return conv2_rows() / 2; }
  index_t pool_cols() const { return conv2_cols() / 2; }
  index_t flatten_size() const {
    return pool_rows() * pool_cols() * conv2_filters;
  }

  bool operator==(const Arch&) const = default;

  /// Compact architecture tag stored in model files.
  std::string tag() const;
};

/// All learnable parameters, in update/serialization order.
struct ParamBlock {
  Tensor conv1_w, conv1_b;    // (3,3,1,K1), (K1)
  Tensor conv2_w, conv2_b;    // (3,3,K1,K2), (K2)
  Tensor dense1_w, dense1_b;  // (flatten,D), (D)
  Tensor dense2_w, dense2_b;  // (D,2), (2)

  static ParamBlock zeros(const Arch& arch);

  template <class F>
  void for_each(F&& f) {
    f(conv1_w); f(conv1_b); f(conv2_w); f(conv2_b);
    f(dense1_w); f(dense1_b); f(dense2_w); f(dense2_b);
  }
  template <class F>
  void for_each(F&& f) const {
    f(conv1_w); f(conv1_b); f(conv2_w); f(conv2_b);
    f(dense1_w); f(dense1_b); f(dense2_w); f(dense2_b);
  }

  index_t total_size() const;
  bool all_finite() const;
};

/// Learnable weights plus architecture metadata.
struct ModelParams {
  Arch arch;
  ParamBlock params;

  /// Per-layer learnable parameter counts: conv1, conv2, dense1, dense2.
  std::array<index_t, 4> per_layer_parameter_counts() const;
  index_t total_parameter_count() const;
  std::string arch_version() const { return arch.tag(); }
};

/// Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases.
/// Deterministic in the seed.
ModelParams init_params(std::uint64_t seed, const Arch& arch = {});

enum class Mode { Train, Infer };
enum class Activation { Relu, None };

/// Valid 3x3 convolution, stride 1, ReLU. input (H,W,C) with kernels
/// (3,3,C,K) and bias (K) -> (H-2,W-2,K).
Tensor conv2d_forward(const Tensor& input, const Tensor& kernels,
                      const Tensor& bias);

/// 2x2 max pooling per channel; odd trailing row/column dropped.
/// argmax_out, when given, receives the flat input index of each winner.
Tensor maxpool2x2_forward(const Tensor& input,
                          std::vector<index_t>* argmax_out = nullptr);

/// Inverted dropout: train mode zeroes entries with probability `rate` and
/// scales survivors by 1/(1-rate); infer mode is the identity.
/// mask_out, when given, receives the applied scale factors.
Tensor dropout(const Tensor& input, scalar_t rate, Mode mode, SeededRng* rng,
               Tensor* mask_out = nullptr);

/// out = act(x . W + b) for a flat input of n, weights (n,m), bias (m).
Tensor dense_forward(const Tensor& input, const Tensor& weights,
                     const Tensor& bias, Activation activation);

/// Numerically stable two-way softmax (max-subtracted).
ClassScores softmax(const Tensor& logits);

/// -log(p_true) with p clamped to >= 1e-12.
scalar_t cross_entropy(const ClassScores& scores, Label true_label);

/// Larger probability wins; an exact tie is called synthesized.
Label predict(const ClassScores& scores);

/// Activations retained by a train-mode forward pass for backprop.
struct ForwardCache {
  Mode mode = Mode::Infer;
  bool valid = false;
  Tensor input;
  Tensor conv1_out;
  Tensor conv2_out;
  Tensor pool_out;
  std::vector<index_t> pool_argmax;
  Tensor drop1_mask;
  Tensor flat;        // pooled+dropped activations, flattened
  Tensor dense1_out;
  Tensor drop2_mask;
  Tensor drop2_out;
  Tensor logits;
  ClassScores scores;
};

/// Full pipeline over a (rows, cols, 1) input tensor. Train mode needs a
/// dropout stream and retains activations in `cache` when provided.
ClassScores forward(const ModelParams& model, const Tensor& input, Mode mode,
                    SeededRng* dropout_rng = nullptr,
                    ForwardCache* cache = nullptr);

/// Analytic gradients of the cross-entropy loss w.r.t. every parameter.
/// Requires a cache produced by a train-mode forward pass.
ParamBlock backward(const ModelParams& model, const ForwardCache& cache,
                    Label true_label);

/// acc += s * g over every tensor; used for batch gradient accumulation.
void axpy(ParamBlock& acc, const ParamBlock& g, scalar_t s);
void scale(ParamBlock& block, scalar_t s);

struct AdamConfig {
  scalar_t lr = 0.001;
  scalar_t beta1 = 0.9;
  scalar_t beta2 = 0.999;
  scalar_t epsilon = 1e-8;
};

/// First/second moment estimates plus the step count.
struct AdamState {
  ParamBlock m, v;
  std::int64_t step = 0;

  static AdamState zeros(const Arch& arch);
};

/// One bias-corrected update:
///   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
///   theta <- theta - lr * mhat / (sqrt(vhat) + eps)
void adam_step(ModelParams& model, const ParamBlock& gradients,
               AdamState& state, const AdamConfig& config = {});

}  // namespace specaudit::nn
