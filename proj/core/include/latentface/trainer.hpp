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

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latentface/conv_codec.hpp"
#include "latentface/embedding.hpp"
#include "latentface/generator.hpp"
#include "latentface/mapper.hpp"
#include "latentface/toy_world.hpp"

namespace latentface {

struct LossWeights {
  double lambda_dir = 10.0;
};

// Mean over coordinates of the squared difference.
double loss_abs(const LatentCode& w, const LatentCode& w_hat);
// 1 - cos(w, w_hat); both must be non-zero.
double loss_dir(const LatentCode& w, const LatentCode& w_hat);
// mean(loss_abs) + lambda * mean(loss_dir) over a non-empty batch.
double loss_total(std::span<const LatentCode> w, std::span<const LatentCode> w_hat, LossWeights weights = {});

struct LossTerms {
  double abs = 0.0;  // batch mean
  double dir = 0.0;  // batch mean
  double total = 0.0;
};

// Columns are batch entries. When `grad` is given it receives dL_total/dW_hat.
LossTerms loss_batch(const Mat& w, const Mat& w_hat, LossWeights weights, Mat* grad = nullptr);

// One aligned record of the toy world.
struct ToySample {
  std::uint64_t id = 0;
  Vec z;
  LatentCode w;
  ToyAttributes attrs;
  RgbImage image;
  MaskImage mask;
  SketchImage sketch;
  ThreeDMMParams params;
  std::string text;
};

// Sample i is drawn from z seeded by mix_seed(seed, i), so any index range can
// be produced independently and the result does not depend on sharding.
ToySample make_toy_sample(const ToyGenerator& gen, std::uint64_t seed, std::uint64_t index);
std::vector<ToySample> sample_toy_world(const ToyGenerator& gen, std::size_t n, std::uint64_t seed,
                                        std::uint64_t first_index = 0);

struct TrainingPair {
  EmbeddingVector f_img;
  SpatialCode f_spatial;
  LatentCode w_gt;
  std::uint64_t source_id = 0;
};

// Frozen spatial encoders used to turn samples into codes.
struct SpatialEncoders {
  const ConvAutoencoder* mask = nullptr;
  const ConvAutoencoder* sketch = nullptr;
};

SpatialCode encode_spatial(const ToySample& sample, Modality modality, const SpatialEncoders& encoders);

std::vector<TrainingPair> build_corpus(std::span<const ToySample> samples, const JointEncoder& encoder,
                                       Modality modality, const SpatialEncoders& encoders);
std::vector<TrainingPair> build_corpus(const ToyGenerator& gen, const JointEncoder& encoder, Modality modality,
                                       const SpatialEncoders& encoders, std::size_t n, std::uint64_t seed);

std::uint64_t corpus_digest(std::span<const TrainingPair> corpus);
std::uint64_t corpus_digest(std::span<const ToySample> samples);

// Writes image/mask/sketch PNGs, 3DMM text rows, latent files and a
// manifest.json describing every record.
void dump_corpus(std::span<const ToySample> samples, const std::filesystem::path& dir);

template <typename V>
class Adam {
 public:
  explicit Adam(Eigen::Index n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : m_(V::Zero(n)), v_(V::Zero(n)), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(V& params, const V& grad, double lr) {
    using S = typename V::Scalar;
    ++t_;
    m_ = static_cast<S>(beta1_) * m_ + static_cast<S>(1.0 - beta1_) * grad;
    v_ = static_cast<S>(beta2_) * v_ + static_cast<S>(1.0 - beta2_) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1_, t_);
    const double c2 = 1.0 - std::pow(beta2_, t_);
    const S a = static_cast<S>(lr * std::sqrt(c2) / c1);
    params.array() -= a * m_.array() / (v_.array().sqrt() + static_cast<S>(eps_ * std::sqrt(c2)));
  }

  long steps() const { return t_; }

 private:
  V m_, v_;
  double beta1_, beta2_, eps_;
  long t_ = 0;
};

// lr * 0.5 * (1 + cos(pi * step / total)).
double cosine_lr(double base, long step, long total);

struct EpochLog {
  int epoch = 0;
  long step = 0;
  double train_loss = 0.0;
  double train_abs = 0.0;
  double train_dir = 0.0;
  double val_loss = std::nan("");
  double val_abs = std::nan("");
  double val_dir = std::nan("");
};

void write_loss_csv(const std::filesystem::path& path, std::span<const EpochLog> curve);

struct MapperTrainOptions {
  int epochs = 100;
  long max_steps = -1;  // caps the step count across epochs when >= 0
  int batch_size = 32;
  double lr = 1e-3;
  bool cosine_decay = true;
  bool pteg = true;
  double val_fraction = 0.1;
  LossWeights weights;
  std::uint64_t seed = 1;
  int divergence_patience = 3;
  std::function<void(const EpochLog&)> on_epoch;
};

struct MapperTrainResult {
  MappingNet net;
  std::vector<EpochLog> curve;
  long steps = 0;
  std::size_t train_size = 0, val_size = 0;
};

// Adam on loss_batch. With pteg each step replaces every f_img by a fresh
// pseudo_text_embedding(f_img, eps); without it f_img is fed as is. The last
// ceil(val_fraction * n) pairs are held out for logging. Throws kDiverged when
// the loss is non-finite for divergence_patience consecutive steps.
MapperTrainResult train_mapper(std::span<const TrainingPair> corpus, const MapperConfig& config,
                               const MapperTrainOptions& options);

// Eval-mode loss of `net` over a corpus with the raw f_img as conditioning.
LossTerms evaluate_mapper(const MappingNet& net, std::span<const TrainingPair> corpus, LossWeights weights = {});

struct CodecTrainOptions {
  int epochs = 30;
  int batch_size = 16;
  double lr = 2e-3;
  bool cosine_decay = true;
  double val_fraction = 0.0;
  std::uint64_t seed = 1;
  std::function<void(const EpochLog&)> on_epoch;
};

struct CodecTrainResult {
  ConvAutoencoder codec;
  std::vector<EpochLog> curve;
};

CodecTrainResult train_codec(const CodecConfig& config, std::span<const ProbabilityField> fields,
                             const CodecTrainOptions& options);

std::vector<ProbabilityField> codec_inputs(std::span<const ToySample> samples, Modality modality);

// Mean pixel accuracy of argmax(decode(encode(x))) (masks) or the 0.5
// binarization (sketches) over a sample set, in [0, 1].
double codec_accuracy(const ConvAutoencoder& codec, std::span<const ToySample> samples);

}  // namespace latentface
