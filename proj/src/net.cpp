#include "specaudit/net.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "specaudit/error.hpp"

namespace specaudit::nn {
namespace {

using RowMajorMatrix =
    Eigen::Matrix<scalar_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<matrix_t>;
using ConstMatrixMap = Eigen::Map<const matrix_t>;
using RowMajorMap = Eigen::Map<RowMajorMatrix>;
using ConstRowMajorMap = Eigen::Map<const RowMajorMatrix>;
using VectorMap = Eigen::Map<vector_t>;
using ConstVectorMap = Eigen::Map<const vector_t>;

constexpr index_t kK = Arch::kKernel;  // 3x3 kernels throughout

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
}

/// Patch matrix for a valid 3x3 convolution: column p = (i*outW + j) holds
/// the flattened (di, dj, c) patch at output position (i, j).
matrix_t im2col(const Tensor& input) {
  const index_t h = input.dim(0), w = input.dim(1), c = input.dim(2);
  const index_t oh = h - kK + 1, ow = w - kK + 1;
  matrix_t patches(kK * kK * c, oh * ow);
  const scalar_t* src = input.data();
  for (index_t i = 0; i < oh; ++i) {
    for (index_t j = 0; j < ow; ++j) {
      scalar_t* col = patches.col(i * ow + j).data();
      for (index_t di = 0; di < kK; ++di) {
        for (index_t dj = 0; dj < kK; ++dj) {
          std::memcpy(col + (di * kK + dj) * c,
                      src + ((i + di) * w + (j + dj)) * c,
                      static_cast<std::size_t>(c) * sizeof(scalar_t));
        }
      }
    }
  }
  return patches;
}

/// Adjoint of im2col: scatter-add patch gradients back onto the input grid.
void col2im_add(const matrix_t& dpatches, Tensor& dinput) {
  const index_t h = dinput.dim(0), w = dinput.dim(1), c = dinput.dim(2);
  const index_t oh = h - kK + 1, ow = w - kK + 1;
  scalar_t* dst = dinput.data();
  for (index_t i = 0; i < oh; ++i) {
    for (index_t j = 0; j < ow; ++j) {
      const scalar_t* col = dpatches.col(i * ow + j).data();
      for (index_t di = 0; di < kK; ++di) {
        for (index_t dj = 0; dj < kK; ++dj) {
          scalar_t* d = dst + ((i + di) * w + (j + dj)) * c;
          const scalar_t* s = col + (di * kK + dj) * c;
          for (index_t ch = 0; ch < c; ++ch) d[ch] += s[ch];
        }
      }
    }
  }
}

void check_conv_shapes(const Tensor& input, const Tensor& kernels,
                       const Tensor& bias) {
  require(input.rank() == 3, "conv input must be rank 3, got " + input.shape_string());
  require(kernels.rank() == 4 && kernels.dim(0) == kK && kernels.dim(1) == kK,
          "conv kernels must be (3,3,C,K), got " + kernels.shape_string());
  require(kernels.dim(2) == input.dim(2),
          "conv kernel channels " + std::to_string(kernels.dim(2)) +
              " do not match input channels " + std::to_string(input.dim(2)));
  require(bias.rank() == 1 && bias.dim(0) == kernels.dim(3),
          "conv bias must have one entry per filter");
  require(input.dim(0) >= kK && input.dim(1) >= kK,
          "conv input " + input.shape_string() + " smaller than the kernel");
}

struct ConvGrads {
  Tensor dkernels, dbias, dinput;
};

/// Shared backward for both conv layers. `out` is the post-ReLU forward
/// output; its sign pattern doubles as the ReLU mask.
ConvGrads conv2d_backward(const Tensor& input, const Tensor& kernels,
                          const Tensor& out, const Tensor& dout,
                          bool need_input_grad) {
  const index_t c = input.dim(2);
  const index_t k = kernels.dim(3);
  const index_t positions = out.dim(0) * out.dim(1);

  ConstMatrixMap out_m(out.data(), k, positions);
  ConstMatrixMap dout_m(dout.data(), k, positions);
  matrix_t masked =
      (dout_m.array() * (out_m.array() > 0.0).cast<scalar_t>()).matrix();

  ConvGrads g;
  g.dbias = Tensor({k});
  VectorMap(g.dbias.data(), k) = masked.rowwise().sum();

  const matrix_t patches = im2col(input);
  g.dkernels = Tensor::zeros_like(kernels);
  RowMajorMap dk(g.dkernels.data(), kK * kK * c, k);
  dk.noalias() = patches * masked.transpose();

  if (need_input_grad) {
    ConstRowMajorMap w(kernels.data(), kK * kK * c, k);
    matrix_t dpatches(kK * kK * c, positions);
    dpatches.noalias() = w * masked;
    g.dinput = Tensor::zeros_like(input);
    col2im_add(dpatches, g.dinput);
  }
  return g;
}

}  // namespace

std::string Arch::tag() const {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "cnn-in%ldx%ld-c%ld-c%ld-d%ld-p%g-p%g",
                static_cast<long>(input_rows), static_cast<long>(input_cols),
                static_cast<long>(conv1_filters), static_cast<long>(conv2_filters),
                static_cast<long>(dense1_units), dropout1_rate, dropout2_rate);
  return buf;
}

ParamBlock ParamBlock::zeros(const Arch& arch) {
  ParamBlock p;
  p.conv1_w = Tensor({kK, kK, 1, arch.conv1_filters});
  p.conv1_b = Tensor({arch.conv1_filters});
  p.conv2_w = Tensor({kK, kK, arch.conv1_filters, arch.conv2_filters});
  p.conv2_b = Tensor({arch.conv2_filters});
  p.dense1_w = Tensor({arch.flatten_size(), arch.dense1_units});
  p.dense1_b = Tensor({arch.dense1_units});
  p.dense2_w = Tensor({arch.dense1_units, index_t{kNumClasses}});
  p.dense2_b = Tensor({index_t{kNumClasses}});
  return p;
}

index_t ParamBlock::total_size() const {
  index_t total = 0;
  for_each([&total](const Tensor& t) { total += t.size(); });
  return total;
}

bool ParamBlock::all_finite() const {
  bool ok = true;
  for_each([&ok](const Tensor& t) { ok = ok && t.all_finite(); });
  return ok;
}

std::array<index_t, 4> ModelParams::per_layer_parameter_counts() const {
  return {params.conv1_w.size() + params.conv1_b.size(),
          params.conv2_w.size() + params.conv2_b.size(),
          params.dense1_w.size() + params.dense1_b.size(),
          params.dense2_w.size() + params.dense2_b.size()};
}

index_t ModelParams::total_parameter_count() const {
  return params.total_size();
}

ModelParams init_params(std::uint64_t seed, const Arch& arch) {
  ModelParams model;
  model.arch = arch;
  model.params = ParamBlock::zeros(arch);

  SeededRng rng(seed);
  const auto glorot_fill = [&rng](Tensor& t, index_t fan_in, index_t fan_out) {
    const scalar_t limit =
        std::sqrt(6.0 / static_cast<scalar_t>(fan_in + fan_out));
    for (index_t i = 0; i < t.size(); ++i) {
      t[i] = rng.uniform(-limit, limit);
    }
  };
  ParamBlock& p = model.params;
  glorot_fill(p.conv1_w, kK * kK * 1, kK * kK * arch.conv1_filters);
  glorot_fill(p.conv2_w, kK * kK * arch.conv1_filters,
              kK * kK * arch.conv2_filters);
  glorot_fill(p.dense1_w, arch.flatten_size(), arch.dense1_units);
  glorot_fill(p.dense2_w, arch.dense1_units, kNumClasses);
  return model;
}

Tensor conv2d_forward(const Tensor& input, const Tensor& kernels,
                      const Tensor& bias) {
  check_conv_shapes(input, kernels, bias);
  const index_t c = input.dim(2);
  const index_t k = kernels.dim(3);
  const index_t oh = input.dim(0) - kK + 1;
  const index_t ow = input.dim(1) - kK + 1;

  const matrix_t patches = im2col(input);
  Tensor out({oh, ow, k});
  // The (k, position) column-major view aliases the (oh, ow, k) row-major
  // tensor exactly, so the GEMM writes the output in place.
  MatrixMap out_m(out.data(), k, oh * ow);
  ConstRowMajorMap w(kernels.data(), kK * kK * c, k);
  out_m.noalias() = w.transpose() * patches;
  out_m.colwise() += ConstVectorMap(bias.data(), k);
  out_m = out_m.cwiseMax(scalar_t{0});
  return out;
}

Tensor maxpool2x2_forward(const Tensor& input,
                          std::vector<index_t>* argmax_out) {
  require(input.rank() == 3, "pool input must be rank 3, got " + input.shape_string());
  const index_t h = input.dim(0), w = input.dim(1), k = input.dim(2);
  require(h >= 2 && w >= 2, "pool input " + input.shape_string() + " smaller than 2x2");
  const index_t oh = h / 2, ow = w / 2;

  Tensor out({oh, ow, k});
  if (argmax_out) argmax_out->assign(static_cast<std::size_t>(out.size()), 0);
  const scalar_t* src = input.data();
  scalar_t* dst = out.data();
  for (index_t i = 0; i < oh; ++i) {
    for (index_t j = 0; j < ow; ++j) {
      for (index_t ch = 0; ch < k; ++ch) {
        index_t best = (2 * i * w + 2 * j) * k + ch;
        scalar_t best_v = src[best];
        for (index_t di = 0; di < 2; ++di) {
          for (index_t dj = 0; dj < 2; ++dj) {
            const index_t idx = ((2 * i + di) * w + (2 * j + dj)) * k + ch;
            if (src[idx] > best_v) {
              best_v = src[idx];
              best = idx;
            }
          }
        }
        const index_t q = (i * ow + j) * k + ch;
        dst[q] = best_v;
        if (argmax_out) (*argmax_out)[static_cast<std::size_t>(q)] = best;
      }
    }
  }
  return out;
}

Tensor dropout(const Tensor& input, scalar_t rate, Mode mode, SeededRng* rng,
               Tensor* mask_out) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(ErrorCode::BadValue,
                "dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (mode == Mode::Infer || rate == 0.0) {
    if (mask_out) {
      *mask_out = Tensor::zeros_like(input);
      mask_out->array().setOnes();
    }
    return input;
  }
  if (!rng) {
    throw std::invalid_argument("train-mode dropout needs a random stream");
  }
  const scalar_t keep_scale = 1.0 / (1.0 - rate);
  Tensor out = Tensor::zeros_like(input);
  Tensor mask = Tensor::zeros_like(input);
  for (index_t i = 0; i < input.size(); ++i) {
    const scalar_t m = rng->uniform01() < rate ? 0.0 : keep_scale;
    mask[i] = m;
    out[i] = input[i] * m;
  }
  if (mask_out) *mask_out = std::move(mask);
  return out;
}

Tensor dense_forward(const Tensor& input, const Tensor& weights,
                     const Tensor& bias, Activation activation) {
  require(input.rank() == 1, "dense input must be flat, got " + input.shape_string());
  require(weights.rank() == 2 && weights.dim(0) == input.dim(0),
          "dense weights " + weights.shape_string() + " do not accept input " +
              input.shape_string());
  require(bias.rank() == 1 && bias.dim(0) == weights.dim(1),
          "dense bias must have one entry per output unit");

  const index_t n = weights.dim(0), m = weights.dim(1);
  Tensor out({m});
  ConstRowMajorMap w(weights.data(), n, m);
  VectorMap(out.data(), m).noalias() =
      w.transpose() * ConstVectorMap(input.data(), n) +
      ConstVectorMap(bias.data(), m);
  if (activation == Activation::Relu) {
    out.array() = out.array().max(scalar_t{0});
  }
  return out;
}

ClassScores softmax(const Tensor& logits) {
  require(logits.rank() == 1 && logits.size() == kNumClasses,
          "softmax expects two logits, got " + logits.shape_string());
  const scalar_t z0 = logits[0], z1 = logits[1];
  const scalar_t zmax = std::max(z0, z1);
  const scalar_t e0 = std::exp(z0 - zmax);
  const scalar_t e1 = std::exp(z1 - zmax);
  const scalar_t sum = e0 + e1;
  return ClassScores{e0 / sum, e1 / sum};
}

scalar_t cross_entropy(const ClassScores& scores, Label true_label) {
  const scalar_t p = std::max(scores.of(true_label), scalar_t{1e-12});
  return -std::log(p);
}

Label predict(const ClassScores& scores) {
  return scores.p_genuine > scores.p_synthesized ? Label::Genuine
                                                 : Label::Synthesized;
}

ClassScores forward(const ModelParams& model, const Tensor& input, Mode mode,
                    SeededRng* dropout_rng, ForwardCache* cache) {
  const Arch& arch = model.arch;
  require(input.rank() == 3 && input.dim(0) == arch.input_rows &&
              input.dim(1) == arch.input_cols && input.dim(2) == 1,
          "network input must be (" + std::to_string(arch.input_rows) + ", " +
              std::to_string(arch.input_cols) + ", 1), got " +
              input.shape_string());
  const ParamBlock& p = model.params;

  Tensor conv1_out = conv2d_forward(input, p.conv1_w, p.conv1_b);
  Tensor conv2_out = conv2d_forward(conv1_out, p.conv2_w, p.conv2_b);
  std::vector<index_t> pool_argmax;
  Tensor pool_out = maxpool2x2_forward(conv2_out, cache ? &pool_argmax : nullptr);

  Tensor drop1_mask;
  Tensor drop1_out = dropout(pool_out, arch.dropout1_rate, mode, dropout_rng,
                             cache ? &drop1_mask : nullptr);

  Tensor flat({arch.flatten_size()});
  flat.array() = drop1_out.array();  // same row-major payload, new shape

  Tensor dense1_out = dense_forward(flat, p.dense1_w, p.dense1_b, Activation::Relu);

  Tensor drop2_mask;
  Tensor drop2_out = dropout(dense1_out, arch.dropout2_rate, mode, dropout_rng,
                             cache ? &drop2_mask : nullptr);

  Tensor logits = dense_forward(drop2_out, p.dense2_w, p.dense2_b, Activation::None);
  const ClassScores scores = softmax(logits);

  if (cache) {
    cache->mode = mode;
    cache->valid = true;
    cache->input = input;
    cache->conv1_out = std::move(conv1_out);
    cache->conv2_out = std::move(conv2_out);
    cache->pool_out = std::move(pool_out);
    cache->pool_argmax = std::move(pool_argmax);
    cache->drop1_mask = std::move(drop1_mask);
    cache->flat = std::move(flat);
    cache->dense1_out = std::move(dense1_out);
    cache->drop2_mask = std::move(drop2_mask);
    cache->drop2_out = std::move(drop2_out);
    cache->logits = std::move(logits);
    cache->scores = scores;
  }
  return scores;
}

ParamBlock backward(const ModelParams& model, const ForwardCache& cache,
                    Label true_label) {
  if (!cache.valid || cache.mode != Mode::Train) {
    throw Error(ErrorCode::StaleCache,
                "backward needs the cache of a train-mode forward pass");
  }
  const Arch& arch = model.arch;
  const ParamBlock& p = model.params;
  ParamBlock g = ParamBlock::zeros(arch);

  // Softmax + cross-entropy collapse to (scores - one_hot).
  Tensor dlogits({index_t{kNumClasses}});
  dlogits[0] = cache.scores.p_genuine;
  dlogits[1] = cache.scores.p_synthesized;
  dlogits[class_index(true_label)] -= 1.0;

  // dense2 (no activation)
  const index_t d = arch.dense1_units;
  {
    RowMajorMap dw(g.dense2_w.data(), d, kNumClasses);
    dw.noalias() = ConstVectorMap(cache.drop2_out.data(), d) *
                   ConstVectorMap(dlogits.data(), kNumClasses).transpose();
    g.dense2_b.array() = dlogits.array();
  }
  Tensor ddrop2({d});
  {
    ConstRowMajorMap w(p.dense2_w.data(), d, kNumClasses);
    VectorMap(ddrop2.data(), d).noalias() =
        w * ConstVectorMap(dlogits.data(), kNumClasses);
  }

  // dropout2, then ReLU of dense1
  Tensor ddense1({d});
  ddense1.array() = ddrop2.array() * cache.drop2_mask.array() *
                    (cache.dense1_out.array() > 0.0).cast<scalar_t>();

  // dense1
  const index_t f = arch.flatten_size();
  {
    RowMajorMap dw(g.dense1_w.data(), f, d);
    dw.noalias() = ConstVectorMap(cache.flat.data(), f) *
                   ConstVectorMap(ddense1.data(), d).transpose();
    g.dense1_b.array() = ddense1.array();
  }
  Tensor dflat({f});
  {
    ConstRowMajorMap w(p.dense1_w.data(), f, d);
    VectorMap(dflat.data(), f).noalias() =
        w * ConstVectorMap(ddense1.data(), d);
  }

  // dropout1 (the flatten is just a reshape)
  Tensor dpool = Tensor::zeros_like(cache.pool_out);
  dpool.array() = dflat.array() * cache.drop1_mask.array();

  // maxpool: route each cell's gradient to the winning input
  Tensor dconv2_out = Tensor::zeros_like(cache.conv2_out);
  for (index_t q = 0; q < dpool.size(); ++q) {
    dconv2_out[cache.pool_argmax[static_cast<std::size_t>(q)]] += dpool[q];
  }

  // conv2, then conv1
  ConvGrads c2 = conv2d_backward(cache.conv1_out, p.conv2_w, cache.conv2_out,
                                 dconv2_out, /*need_input_grad=*/true);
  g.conv2_w = std::move(c2.dkernels);
  g.conv2_b = std::move(c2.dbias);

  ConvGrads c1 = conv2d_backward(cache.input, p.conv1_w, cache.conv1_out,
                                 c2.dinput, /*need_input_grad=*/false);
  g.conv1_w = std::move(c1.dkernels);
  g.conv1_b = std::move(c1.dbias);
  return g;
}

AdamState AdamState::zeros(const Arch& arch) {
  AdamState s;
  s.m = ParamBlock::zeros(arch);
  s.v = ParamBlock::zeros(arch);
  s.step = 0;
  return s;
}

namespace {

template <class F>
void zip4(ParamBlock& a, const ParamBlock& b, ParamBlock& m, ParamBlock& v,
          F&& f) {
  f(a.conv1_w, b.conv1_w, m.conv1_w, v.conv1_w);
  f(a.conv1_b, b.conv1_b, m.conv1_b, v.conv1_b);
  f(a.conv2_w, b.conv2_w, m.conv2_w, v.conv2_w);
  f(a.conv2_b, b.conv2_b, m.conv2_b, v.conv2_b);
  f(a.dense1_w, b.dense1_w, m.dense1_w, v.dense1_w);
  f(a.dense1_b, b.dense1_b, m.dense1_b, v.dense1_b);
  f(a.dense2_w, b.dense2_w, m.dense2_w, v.dense2_w);
  f(a.dense2_b, b.dense2_b, m.dense2_b, v.dense2_b);
}

template <class F>
void zip2(ParamBlock& a, const ParamBlock& b, F&& f) {
  f(a.conv1_w, b.conv1_w);
  f(a.conv1_b, b.conv1_b);
  f(a.conv2_w, b.conv2_w);
  f(a.conv2_b, b.conv2_b);
  f(a.dense1_w, b.dense1_w);
  f(a.dense1_b, b.dense1_b);
  f(a.dense2_w, b.dense2_w);
  f(a.dense2_b, b.dense2_b);
}

}  // namespace

void axpy(ParamBlock& acc, const ParamBlock& g, scalar_t s) {
  zip2(acc, g, [s](Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
      throw Error(ErrorCode::ShapeMismatch, "parameter block shapes differ");
    }
    a.array() += s * b.array();
  });
}

void scale(ParamBlock& block, scalar_t s) {
  block.for_each([s](Tensor& t) { t.array() *= s; });
}

void adam_step(ModelParams& model, const ParamBlock& gradients,
               AdamState& state, const AdamConfig& config) {
  state.step += 1;
  const scalar_t bc1 = 1.0 - std::pow(config.beta1, static_cast<scalar_t>(state.step));
  const scalar_t bc2 = 1.0 - std::pow(config.beta2, static_cast<scalar_t>(state.step));
  zip4(model.params, gradients, state.m, state.v,
       [&](Tensor& theta, const Tensor& grad, Tensor& m, Tensor& v) {
         if (!theta.same_shape(grad) || !theta.same_shape(m) ||
             !theta.same_shape(v)) {
           throw Error(ErrorCode::ShapeMismatch,
                       "gradient/state shapes do not match the model");
         }
         m.array() = config.beta1 * m.array() + (1.0 - config.beta1) * grad.array();
         v.array() = config.beta2 * v.array() +
                     (1.0 - config.beta2) * grad.array().square();
         theta.array() -= config.lr * (m.array() / bc1) /
                          ((v.array() / bc2).sqrt() + config.epsilon);
       });
}

}  // namespace specaudit::nn
