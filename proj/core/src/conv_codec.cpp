/* Copyright 2026 The latentface Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "latentface/conv_codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

namespace latentface {
namespace {

using RMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RMat>;
using MMap = Eigen::Map<RMat>;

constexpr float kSlope = 0.2f;

// Activations are C x (B*H*W), row-major, column index b*H*W + y*W + x.
RMat im2col(const RMat& in, int batch, int h, int w) {
  const int c_in = static_cast<int>(in.rows());
  const Eigen::Index hw = static_cast<Eigen::Index>(h) * w;
  RMat col(c_in * 9, batch * hw);
  for (int c = 0; c < c_in; ++c)
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        float* dst = col.row(c * 9 + ky * 3 + kx).data();
        const float* src = in.row(c).data();
        for (int b = 0; b < batch; ++b)
          for (int y = 0; y < h; ++y) {
            const int sy = y + ky - 1;
            float* d = dst + b * hw + static_cast<Eigen::Index>(y) * w;
            if (sy < 0 || sy >= h) {
              std::fill(d, d + w, 0.0f);
              continue;
            }
            const float* s = src + b * hw + static_cast<Eigen::Index>(sy) * w;
            for (int x = 0; x < w; ++x) {
              const int sx = x + kx - 1;
              d[x] = (sx < 0 || sx >= w) ? 0.0f : s[sx];
            }
          }
      }
  return col;
}

RMat col2im(const RMat& col, int c_in, int batch, int h, int w) {
  const Eigen::Index hw = static_cast<Eigen::Index>(h) * w;
  RMat out = RMat::Zero(c_in, batch * hw);
  for (int c = 0; c < c_in; ++c)
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        const float* src = col.row(c * 9 + ky * 3 + kx).data();
        float* dst = out.row(c).data();
        for (int b = 0; b < batch; ++b)
          for (int y = 0; y < h; ++y) {
            const int sy = y + ky - 1;
            if (sy < 0 || sy >= h) continue;
            const float* s = src + b * hw + static_cast<Eigen::Index>(y) * w;
            float* d = dst + b * hw + static_cast<Eigen::Index>(sy) * w;
            for (int x = 0; x < w; ++x) {
              const int sx = x + kx - 1;
              if (sx >= 0 && sx < w) d[sx] += s[x];
            }
          }
      }
  return out;
}

void leaky_inplace(RMat& a) {
  a = a.unaryExpr([](float v) { return v >= 0.0f ? v : kSlope * v; });
}

void leaky_inplace(Eigen::MatrixXf& a) {
  a = a.unaryExpr([](float v) { return v >= 0.0f ? v : kSlope * v; });
}

// Gradient through leaky ReLU given its output (sign is preserved).
template <typename M>
void leaky_backward(const M& out, M& grad) {
  grad = (out.array() >= 0.0f).select(grad, grad * kSlope);
}

RMat maxpool(const RMat& in, int batch, int h, int w, std::vector<std::int32_t>* argmax) {
  const int oh = h / 2, ow = w / 2;
  const Eigen::Index hw = static_cast<Eigen::Index>(h) * w, ohw = static_cast<Eigen::Index>(oh) * ow;
  RMat out(in.rows(), batch * ohw);
  if (argmax) argmax->resize(out.size());
  for (Eigen::Index c = 0; c < in.rows(); ++c) {
    const float* s = in.row(c).data();
    float* d = out.row(c).data();
    for (int b = 0; b < batch; ++b)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
          Eigen::Index best = b * hw + static_cast<Eigen::Index>(2 * y) * w + 2 * x;
          for (const Eigen::Index cand : {best + 1, best + w, best + w + 1})
            if (s[cand] > s[best]) best = cand;
          const Eigen::Index o = b * ohw + static_cast<Eigen::Index>(y) * ow + x;
          d[o] = s[best];
          if (argmax) (*argmax)[c * out.cols() + o] = static_cast<std::int32_t>(best);
        }
  }
  return out;
}

RMat maxpool_backward(const RMat& grad_out, const std::vector<std::int32_t>& argmax, Eigen::Index in_cols) {
  RMat g = RMat::Zero(grad_out.rows(), in_cols);
  for (Eigen::Index c = 0; c < grad_out.rows(); ++c)
    for (Eigen::Index o = 0; o < grad_out.cols(); ++o) g(c, argmax[c * grad_out.cols() + o]) += grad_out(c, o);
  return g;
}

RMat upsample(const RMat& in, int batch, int h, int w) {
  const int oh = 2 * h, ow = 2 * w;
  const Eigen::Index hw = static_cast<Eigen::Index>(h) * w, ohw = static_cast<Eigen::Index>(oh) * ow;
  RMat out(in.rows(), batch * ohw);
  for (Eigen::Index c = 0; c < in.rows(); ++c) {
    const float* s = in.row(c).data();
    float* d = out.row(c).data();
    for (int b = 0; b < batch; ++b)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) d[b * ohw + static_cast<Eigen::Index>(y) * ow + x] = s[b * hw + (y / 2) * w + x / 2];
  }
  return out;
}

RMat upsample_backward(const RMat& grad_out, int batch, int h, int w) {
  const int oh = 2 * h, ow = 2 * w;
  const Eigen::Index hw = static_cast<Eigen::Index>(h) * w, ohw = static_cast<Eigen::Index>(oh) * ow;
  RMat g = RMat::Zero(grad_out.rows(), batch * hw);
  for (Eigen::Index c = 0; c < grad_out.rows(); ++c) {
    const float* s = grad_out.row(c).data();
    float* d = g.row(c).data();
    for (int b = 0; b < batch; ++b)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) d[b * hw + (y / 2) * w + x / 2] += s[b * ohw + static_cast<Eigen::Index>(y) * ow + x];
  }
  return g;
}

// C x (B*hw) <-> (C*hw) x B
Eigen::MatrixXf flatten(const RMat& a, int batch, Eigen::Index hw) {
  Eigen::MatrixXf f(a.rows() * hw, batch);
  for (Eigen::Index c = 0; c < a.rows(); ++c)
    for (int b = 0; b < batch; ++b)
      for (Eigen::Index p = 0; p < hw; ++p) f(c * hw + p, b) = a(c, b * hw + p);
  return f;
}

RMat unflatten(const Eigen::MatrixXf& f, Eigen::Index channels, Eigen::Index hw) {
  const auto batch = f.cols();
  RMat a(channels, batch * hw);
  for (Eigen::Index c = 0; c < channels; ++c)
    for (Eigen::Index b = 0; b < batch; ++b)
      for (Eigen::Index p = 0; p < hw; ++p) a(c, b * hw + p) = f(c * hw + p, b);
  return a;
}

}  // namespace

struct ConvAutoencoder::Trace {
  // encoder
  std::vector<RMat> enc_cols;      // conv inputs as columns
  std::vector<RMat> enc_acts;      // post-activation conv outputs
  std::vector<std::vector<std::int32_t>> pool_idx;
  Eigen::MatrixXf enc_flat;        // fc input
  // decoder
  Eigen::MatrixXf code;
  Eigen::MatrixXf dec_hidden;      // post-activation fc output
  std::vector<RMat> dec_cols;
  std::vector<RMat> dec_acts;      // post-activation (or logits for the head)
  RMat output;                     // probabilities
};

void CodecConfig::validate() const {
  require(modality == Modality::kMask || modality == Modality::kSketch, ErrorKind::kInvalidArgument,
          "conv codecs exist for mask and sketch only");
  require(is_power_of_two(height) && is_power_of_two(width), ErrorKind::kInvalidArgument,
          "codec grid sides must be powers of two");
  require(blocks >= 1 && (height >> blocks) >= 1 && (width >> blocks) >= 1, ErrorKind::kInvalidArgument,
          "too many down-sampling blocks for the grid size");
  require(modality != Modality::kMask || (num_classes >= 2 && num_classes <= kMaxMaskClasses),
          ErrorKind::kInvalidArgument, "mask codec needs 2..19 classes");
  require(code_dim >= 1 && base_channels >= 1, ErrorKind::kInvalidArgument, "codec widths must be positive");
}

nlohmann::json CodecConfig::to_json() const {
  return {{"modality", modality_name(modality)}, {"height", height},
          {"width", width},                      {"num_classes", num_classes},
          {"code_dim", code_dim},                {"base_channels", base_channels},
          {"blocks", blocks}};
}

CodecConfig CodecConfig::from_json(const nlohmann::json& j) {
  CodecConfig c;
  c.modality = parse_modality(j.value("modality", std::string("mask")));
  c.height = j.value("height", c.height);
  c.width = j.value("width", c.width);
  c.num_classes = j.value("num_classes", c.num_classes);
  c.code_dim = j.value("code_dim", c.code_dim);
  c.base_channels = j.value("base_channels", c.base_channels);
  c.blocks = j.value("blocks", c.blocks);
  c.validate();
  return c;
}

ConvAutoencoder::ConvAutoencoder(CodecConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  auto width_of = [&](int b) { return config_.base_channels * (1 << std::min(b, 2)); };
  Eigen::Index off = 0;
  auto add_conv = [&](int cin, int cout, int size) {
    ConvSpec s{cin, cout, size, off, off + static_cast<Eigen::Index>(cout) * cin * 9};
    off = s.b_off + cout;
    return s;
  };
  int cin = config_.in_channels();
  for (int b = 0; b < config_.blocks; ++b) {
    enc_convs_.push_back(add_conv(cin, width_of(b), config_.height >> b));
    cin = width_of(b);
  }
  bottleneck_channels_ = cin;
  bottleneck_h_ = config_.height >> config_.blocks;
  bottleneck_w_ = config_.width >> config_.blocks;
  const int flat = bottleneck_channels_ * bottleneck_h_ * bottleneck_w_;
  enc_fc_ = {flat, config_.code_dim, off, off + static_cast<Eigen::Index>(flat) * config_.code_dim};
  off = enc_fc_.b_off + config_.code_dim;
  dec_fc_ = {config_.code_dim, flat, off, off + static_cast<Eigen::Index>(flat) * config_.code_dim};
  off = dec_fc_.b_off + flat;
  const int out_channels = config_.modality == Modality::kMask ? config_.num_classes : 1;
  for (int b = config_.blocks - 1; b >= 0; --b) {
    const int cout = b > 0 ? width_of(b - 1) : out_channels;
    dec_convs_.push_back(add_conv(width_of(b), cout, config_.height >> b));
  }
  params_ = Eigen::VectorXf::Zero(off);

  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n01(0.0f, 1.0f);
  auto init = [&](Eigen::Index w_off, Eigen::Index count, int fan_in) {
    const float std = std::sqrt(2.0f / (1.0f + kSlope * kSlope) / static_cast<float>(fan_in));
    for (Eigen::Index i = 0; i < count; ++i) params_[w_off + i] = n01(rng) * std;
  };
  for (const auto& c : enc_convs_) init(c.w_off, static_cast<Eigen::Index>(c.cout) * c.cin * 9, c.cin * 9);
  init(enc_fc_.w_off, static_cast<Eigen::Index>(enc_fc_.in) * enc_fc_.out, enc_fc_.in);
  init(dec_fc_.w_off, static_cast<Eigen::Index>(dec_fc_.in) * dec_fc_.out, dec_fc_.in);
  for (const auto& c : dec_convs_) init(c.w_off, static_cast<Eigen::Index>(c.cout) * c.cin * 9, c.cin * 9);
}

void ConvAutoencoder::check_field(const ProbabilityField& f) const {
  require(f.height == config_.height && f.width == config_.width, ErrorKind::kShapeMismatch,
          "grid " + std::to_string(f.height) + "x" + std::to_string(f.width) + " does not match codec grid " +
              std::to_string(config_.height) + "x" + std::to_string(config_.width));
  require(f.channels == config_.in_channels(), ErrorKind::kShapeMismatch,
          "input has " + std::to_string(f.channels) + " channels, codec expects " +
              std::to_string(config_.in_channels()));
}

Eigen::MatrixXf ConvAutoencoder::pack(std::span<const ProbabilityField> inputs) const {
  const int c = config_.in_channels();
  const Eigen::Index hw = static_cast<Eigen::Index>(config_.height) * config_.width;
  RMat x(c, static_cast<Eigen::Index>(inputs.size()) * hw);
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    check_field(inputs[b]);
    for (int ch = 0; ch < c; ++ch)
      std::memcpy(x.row(ch).data() + b * hw, inputs[b].values.data() + ch * hw, sizeof(float) * hw);
  }
  return x;
}

Eigen::MatrixXf ConvAutoencoder::run_encoder(const Eigen::MatrixXf& input, int batch, Trace* trace) const {
  RMat x = input;
  for (std::size_t i = 0; i < enc_convs_.size(); ++i) {
    const ConvSpec& s = enc_convs_[i];
    const int h = config_.height >> i, w = config_.width >> i;
    RMat col = im2col(x, batch, h, w);
    const CMap wm(params_.data() + s.w_off, s.cout, s.cin * 9);
    const Eigen::Map<const Eigen::VectorXf> bias(params_.data() + s.b_off, s.cout);
    RMat a = wm * col;
    a.colwise() += bias;
    leaky_inplace(a);
    std::vector<std::int32_t> idx;
    x = maxpool(a, batch, h, w, trace ? &idx : nullptr);
    if (trace) {
      trace->enc_cols.push_back(std::move(col));
      trace->enc_acts.push_back(std::move(a));
      trace->pool_idx.push_back(std::move(idx));
    }
  }
  Eigen::MatrixXf flat = flatten(x, batch, static_cast<Eigen::Index>(bottleneck_h_) * bottleneck_w_);
  const Eigen::Map<const Eigen::MatrixXf> wf(params_.data() + enc_fc_.w_off, enc_fc_.out, enc_fc_.in);
  const Eigen::Map<const Eigen::VectorXf> bf(params_.data() + enc_fc_.b_off, enc_fc_.out);
  Eigen::MatrixXf code = wf * flat;
  code.colwise() += bf;
  if (trace) trace->enc_flat = std::move(flat);
  return code;
}

Eigen::MatrixXf ConvAutoencoder::run_decoder(const Eigen::MatrixXf& code, int batch, Trace* trace) const {
  const Eigen::Map<const Eigen::MatrixXf> wf(params_.data() + dec_fc_.w_off, dec_fc_.out, dec_fc_.in);
  const Eigen::Map<const Eigen::VectorXf> bf(params_.data() + dec_fc_.b_off, dec_fc_.out);
  Eigen::MatrixXf hidden = wf * code;
  hidden.colwise() += bf;
  leaky_inplace(hidden);
  RMat x = unflatten(hidden, bottleneck_channels_, static_cast<Eigen::Index>(bottleneck_h_) * bottleneck_w_);
  if (trace) {
    trace->code = code;
    trace->dec_hidden = std::move(hidden);
  }
  const int n = config_.blocks;
  for (int i = 0; i < n; ++i) {
    const ConvSpec& s = dec_convs_[i];
    const int level = n - 1 - i;  // output resolution level
    const int h = config_.height >> level, w = config_.width >> level;
    RMat up = upsample(x, batch, h / 2, w / 2);
    RMat col = im2col(up, batch, h, w);
    const CMap wm(params_.data() + s.w_off, s.cout, s.cin * 9);
    const Eigen::Map<const Eigen::VectorXf> bias(params_.data() + s.b_off, s.cout);
    RMat a = wm * col;
    a.colwise() += bias;
    if (i + 1 < n) leaky_inplace(a);
    x = a;
    if (trace) {
      trace->dec_cols.push_back(std::move(col));
      trace->dec_acts.push_back(std::move(a));
    }
  }
  // head
  if (config_.modality == Modality::kMask) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const float m = x.col(j).maxCoeff();
      x.col(j) = (x.col(j).array() - m).exp();
      x.col(j) /= x.col(j).sum();
    }
  } else {
    x = x.unaryExpr([](float v) { return 1.0f / (1.0f + std::exp(-v)); });
  }
  if (trace) trace->output = x;
  return x;
}

SpatialCode ConvAutoencoder::encode(const MaskImage& mask) const {
  require(config_.modality == Modality::kMask, ErrorKind::kInvalidArgument, "this codec does not encode masks");
  require(mask.num_classes == config_.num_classes, ErrorKind::kShapeMismatch,
          "mask has " + std::to_string(mask.num_classes) + " classes, codec expects " +
              std::to_string(config_.num_classes));
  require(mask.height == config_.height && mask.width == config_.width, ErrorKind::kShapeMismatch,
          "mask grid " + std::to_string(mask.height) + "x" + std::to_string(mask.width) +
              " does not match codec grid " + std::to_string(config_.height) + "x" + std::to_string(config_.width));
  const ProbabilityField f = one_hot(mask);
  return encode_batch(std::span(&f, 1)).front();
}

SpatialCode ConvAutoencoder::encode(const SketchImage& sketch) const {
  require(config_.modality == Modality::kSketch, ErrorKind::kInvalidArgument, "this codec does not encode sketches");
  require(sketch.height == config_.height && sketch.width == config_.width, ErrorKind::kShapeMismatch,
          "sketch grid " + std::to_string(sketch.height) + "x" + std::to_string(sketch.width) +
              " does not match codec grid " + std::to_string(config_.height) + "x" + std::to_string(config_.width));
  const ProbabilityField f = as_field(sketch);
  return encode_batch(std::span(&f, 1)).front();
}

std::vector<SpatialCode> ConvAutoencoder::encode_batch(std::span<const ProbabilityField> inputs) const {
  require(trained_, ErrorKind::kNotReady, "codec has not been trained or loaded");
  std::vector<SpatialCode> out;
  if (inputs.empty()) return out;
  const Eigen::MatrixXf code = run_encoder(pack(inputs), static_cast<int>(inputs.size()), nullptr);
  for (Eigen::Index b = 0; b < code.cols(); ++b) out.push_back({code.col(b).cast<double>(), config_.modality});
  return out;
}

ProbabilityField ConvAutoencoder::decode(const SpatialCode& code) const {
  require(code.modality == config_.modality, ErrorKind::kInvalidArgument,
          "cannot decode a " + std::string(modality_name(code.modality)) + " code with a " +
              std::string(modality_name(config_.modality)) + " codec");
  require(code.dim() == config_.code_dim, ErrorKind::kShapeMismatch, "code dimension does not match codec");
  const Eigen::MatrixXf c = code.values.cast<float>();
  const RMat out = run_decoder(c, 1, nullptr);
  ProbabilityField f(static_cast<int>(out.rows()), config_.height, config_.width);
  for (Eigen::Index ch = 0; ch < out.rows(); ++ch)
    std::memcpy(f.values.data() + ch * out.cols(), out.row(ch).data(), sizeof(float) * out.cols());
  return f;
}

double ConvAutoencoder::loss(std::span<const ProbabilityField> inputs) const {
  return forward_backward(inputs, nullptr);
}

double ConvAutoencoder::loss_and_gradient(std::span<const ProbabilityField> inputs, Eigen::VectorXf& grad) const {
  return forward_backward(inputs, &grad);
}

double ConvAutoencoder::forward_backward(std::span<const ProbabilityField> inputs, Eigen::VectorXf* grad) const {
  require(!inputs.empty(), ErrorKind::kInvalidArgument, "empty batch");
  const int batch = static_cast<int>(inputs.size());
  const Eigen::MatrixXf x = pack(inputs);
  Trace t;
  const Eigen::MatrixXf code = run_encoder(x, batch, &t);
  run_decoder(code, batch, &t);
  const RMat target = x;
  const RMat& p = t.output;

  double loss = 0.0;
  RMat dz;  // gradient w.r.t. head logits
  if (config_.modality == Modality::kMask) {
    loss = (p - target).cast<double>().array().square().sum() / batch;
    if (grad) {
      const RMat dp = (p - target) * (2.0f / batch);
      dz.resize(p.rows(), p.cols());
      for (Eigen::Index j = 0; j < p.cols(); ++j) {
        const float dot = p.col(j).dot(dp.col(j));
        dz.col(j) = p.col(j).cwiseProduct((dp.col(j).array() - dot).matrix());
      }
    }
  } else {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double q = std::clamp(static_cast<double>(p.data()[i]), kBceEpsilon, 1.0 - kBceEpsilon);
      loss -= target.data()[i] > 0.5f ? std::log(q) : std::log1p(-q);
    }
    loss /= batch;
    if (grad) dz = (p - target) * (1.0f / batch);
  }
  if (!grad) return loss;

  grad->setZero(params_.size());
  const int n = config_.blocks;
  RMat g = std::move(dz);
  for (int i = n - 1; i >= 0; --i) {
    const ConvSpec& s = dec_convs_[i];
    const int level = n - 1 - i;
    const int h = config_.height >> level, w = config_.width >> level;
    if (i + 1 < n) leaky_backward(t.dec_acts[i], g);
    MMap(grad->data() + s.w_off, s.cout, s.cin * 9).noalias() += g * t.dec_cols[i].transpose();
    Eigen::Map<Eigen::VectorXf>(grad->data() + s.b_off, s.cout) += g.rowwise().sum();
    const CMap wm(params_.data() + s.w_off, s.cout, s.cin * 9);
    const RMat dcol = wm.transpose() * g;
    const RMat dup = col2im(dcol, s.cin, batch, h, w);
    g = upsample_backward(dup, batch, h / 2, w / 2);
  }
  const Eigen::Index bhw = static_cast<Eigen::Index>(bottleneck_h_) * bottleneck_w_;
  Eigen::MatrixXf gh = flatten(g, batch, bhw);
  leaky_backward(t.dec_hidden, gh);
  Eigen::Map<Eigen::MatrixXf>(grad->data() + dec_fc_.w_off, dec_fc_.out, dec_fc_.in).noalias() += gh * t.code.transpose();
  Eigen::Map<Eigen::VectorXf>(grad->data() + dec_fc_.b_off, dec_fc_.out) += gh.rowwise().sum();
  const Eigen::Map<const Eigen::MatrixXf> wdf(params_.data() + dec_fc_.w_off, dec_fc_.out, dec_fc_.in);
  const Eigen::MatrixXf gcode = wdf.transpose() * gh;

  Eigen::Map<Eigen::MatrixXf>(grad->data() + enc_fc_.w_off, enc_fc_.out, enc_fc_.in).noalias() += gcode * t.enc_flat.transpose();
  Eigen::Map<Eigen::VectorXf>(grad->data() + enc_fc_.b_off, enc_fc_.out) += gcode.rowwise().sum();
  const Eigen::Map<const Eigen::MatrixXf> wef(params_.data() + enc_fc_.w_off, enc_fc_.out, enc_fc_.in);
  g = unflatten(wef.transpose() * gcode, bottleneck_channels_, bhw);
  for (int i = n - 1; i >= 0; --i) {
    const ConvSpec& s = enc_convs_[i];
    const int h = config_.height >> i, w = config_.width >> i;
    RMat ga = maxpool_backward(g, t.pool_idx[i], static_cast<Eigen::Index>(batch) * h * w);
    leaky_backward(t.enc_acts[i], ga);
    MMap(grad->data() + s.w_off, s.cout, s.cin * 9).noalias() += ga * t.enc_cols[i].transpose();
    Eigen::Map<Eigen::VectorXf>(grad->data() + s.b_off, s.cout) += ga.rowwise().sum();
    if (i > 0) {
      const CMap wm(params_.data() + s.w_off, s.cout, s.cin * 9);
      g = col2im(wm.transpose() * ga, s.cin, batch, h, w);
    }
  }
  return loss;
}

Checkpoint ConvAutoencoder::to_checkpoint() const {
  Checkpoint c;
  c.kind = "conv_codec";
  c.header = {{"config", config_.to_json()},
              {"architecture", "conv3x3-lrelu-maxpool2 blocks, linear bottleneck, nearest-up mirror decoder"},
              {"nonlinearity", "leaky_relu(0.2)"},
              {"head", config_.modality == Modality::kMask ? "softmax" : "sigmoid"},
              {"dtype", "float32"},
              {"param_count", params_.size()},
              {"trained", trained_}};
  c.payload.resize(sizeof(float) * params_.size());
  std::memcpy(c.payload.data(), params_.data(), c.payload.size());
  return c;
}

ConvAutoencoder ConvAutoencoder::from_checkpoint(const Checkpoint& ckpt) {
  require(ckpt.kind == "conv_codec", ErrorKind::kIo, "checkpoint is a '" + ckpt.kind + "', not a conv_codec");
  ConvAutoencoder codec(CodecConfig::from_json(ckpt.header.at("config")), 0);
  require(ckpt.header.value("param_count", Eigen::Index{-1}) == codec.params_.size() &&
              ckpt.payload.size() == sizeof(float) * codec.params_.size(),
          ErrorKind::kIo, "codec checkpoint parameter count does not match its architecture");
  std::memcpy(codec.params_.data(), ckpt.payload.data(), ckpt.payload.size());
  codec.trained_ = ckpt.header.value("trained", false);
  return codec;
}

}  // namespace latentface
