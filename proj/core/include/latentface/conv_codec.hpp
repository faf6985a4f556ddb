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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"

#include "latentface/checkpoint.hpp"
#include "latentface/spatial.hpp"

namespace latentface {

struct CodecConfig {
  Modality modality = Modality::kMask;
  int height = 64;
  int width = 64;
  int num_classes = 5;  // mask only
  int code_dim = 64;
  int base_channels = 8;
  int blocks = 4;

  int in_channels() const { return modality == Modality::kMask ? num_classes : 1; }
  void validate() const;
  nlohmann::json to_json() const;
  static CodecConfig from_json(const nlohmann::json& j);
};

// Convolutional autoencoder for mask and sketch conditioning.
//
// Encoder: `blocks` x (conv 3x3 same-padding, leaky ReLU 0.2, max-pool 2x2),
// then flatten and a linear layer to code_dim. Channel widths are
// base, 2*base, 4*base, 4*base, ... Decoder mirrors it with a linear layer,
// nearest-neighbour 2x upsampling and 3x3 convs; the output head is a
// per-pixel softmax over classes (mask) or a sigmoid (sketch).
//
// Parameters live in one flat float vector so the optimizer and checkpoints
// can treat them uniformly.
class ConvAutoencoder {
 public:
  ConvAutoencoder(CodecConfig config, std::uint64_t seed);

  const CodecConfig& config() const { return config_; }
  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }

  // Both throw kNotReady on an untrained codec and kShapeMismatch on a grid
  // whose shape differs from the configured one.
  SpatialCode encode(const MaskImage& mask) const;
  SpatialCode encode(const SketchImage& sketch) const;
  std::vector<SpatialCode> encode_batch(std::span<const ProbabilityField> inputs) const;

  // Per-pixel probabilities (simplex over classes for masks). Total for any
  // finite code; throws on a modality mismatch.
  ProbabilityField decode(const SpatialCode& code) const;

  // Reconstruction loss of a batch (MSE on one-hot fields for masks, BCE for
  // sketches) and its gradient with respect to parameters().
  double loss_and_gradient(std::span<const ProbabilityField> inputs, Eigen::VectorXf& grad) const;
  double loss(std::span<const ProbabilityField> inputs) const;

  Eigen::VectorXf& parameters() { return params_; }
  const Eigen::VectorXf& parameters() const { return params_; }

  Checkpoint to_checkpoint() const;
  static ConvAutoencoder from_checkpoint(const Checkpoint& ckpt);
  void save(const std::filesystem::path& path) const { to_checkpoint().save(path); }
  static ConvAutoencoder load(const std::filesystem::path& path) { return from_checkpoint(Checkpoint::load(path)); }

 private:
  struct ConvSpec {
    int cin, cout, size;  // size = spatial side length (square grids use height)
    Eigen::Index w_off, b_off;
  };
  struct LinearSpec {
    int in, out;
    Eigen::Index w_off, b_off;
  };
  struct Trace;

  void check_field(const ProbabilityField& f) const;
  Eigen::MatrixXf pack(std::span<const ProbabilityField> inputs) const;
  Eigen::MatrixXf run_encoder(const Eigen::MatrixXf& x, int batch, Trace* trace) const;
  Eigen::MatrixXf run_decoder(const Eigen::MatrixXf& code, int batch, Trace* trace) const;
  double forward_backward(std::span<const ProbabilityField> inputs, Eigen::VectorXf* grad) const;

  CodecConfig config_;
  std::vector<ConvSpec> enc_convs_, dec_convs_;
  LinearSpec enc_fc_{}, dec_fc_{};
  int bottleneck_channels_ = 0;
  int bottleneck_h_ = 0, bottleneck_w_ = 0;
  Eigen::VectorXf params_;
  bool trained_ = false;
};

}  // namespace latentface
