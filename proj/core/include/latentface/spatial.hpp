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

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "latentface/common.hpp"
#include "latentface/image.hpp"

namespace latentface {

enum class Modality { kMask, kSketch, kThreeDMM };

std::string_view modality_name(Modality m);
Modality parse_modality(std::string_view name);

struct SpatialCode {
  Vec values;
  Modality modality = Modality::kMask;

  int dim() const { return static_cast<int>(values.size()); }
};

inline constexpr int kThreeDMMShapeDim = 100;
inline constexpr int kThreeDMMExpressionDim = 50;
inline constexpr int kThreeDMMPoseDim = 9;
inline constexpr int kThreeDMMDim = kThreeDMMShapeDim + kThreeDMMExpressionDim + kThreeDMMPoseDim;

struct ThreeDMMParams {
  Vec shape = Vec::Zero(kThreeDMMShapeDim);
  Vec expression = Vec::Zero(kThreeDMMExpressionDim);
  Vec pose = Vec::Zero(kThreeDMMPoseDim);
};

// shape || expression || pose, no learned transform.
SpatialCode pack_3dmm(const ThreeDMMParams& p);
ThreeDMMParams unpack_3dmm(const SpatialCode& code);

// 159 floats, whitespace separated (text) or little-endian float32 row (binary, 636 bytes).
void write_3dmm_text(const std::filesystem::path& path, const ThreeDMMParams& p);
void write_3dmm_binary(const std::filesystem::path& path, const ThreeDMMParams& p);
ThreeDMMParams read_3dmm(const std::filesystem::path& path);

// Per-pixel channel field, channel-major (C x H x W). A mask reconstruction is
// a per-pixel simplex over classes; a sketch reconstruction has one channel of
// stroke probabilities.
struct ProbabilityField {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;

  ProbabilityField() = default;
  ProbabilityField(int c, int h, int w)
      : channels(c), height(h), width(w), values(static_cast<std::size_t>(c) * h * w, 0.0f) {}

  float& at(int c, int y, int x) { return values[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  float at(int c, int y, int x) const {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  bool same_shape(const ProbabilityField& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

ProbabilityField one_hot(const MaskImage& mask);
ProbabilityField as_field(const SketchImage& sketch);
MaskImage argmax(const ProbabilityField& field);
SketchImage binarize(const ProbabilityField& field, float threshold = 0.5f);

// (1/n) sum_i sum_j (x_ij - xhat_ij)^2 over a batch of fields; j runs over every
// pixel and channel.
double mse_field_loss(std::span<const ProbabilityField> x, std::span<const ProbabilityField> xhat);
double mask_reconstruction_loss(const MaskImage& x, const ProbabilityField& xhat);

inline constexpr double kBceEpsilon = 1e-7;

// -(1/n) sum_i sum_j [x log xhat + (1 - x) log(1 - xhat)], xhat clamped to [eps, 1 - eps].
double sketch_reconstruction_loss(std::span<const SketchImage> x, std::span<const ProbabilityField> xhat);
double sketch_reconstruction_loss(const SketchImage& x, const ProbabilityField& xhat);

// Fraction of cells whose reconstruction matches, in [0, 1].
double pixel_accuracy(const MaskImage& a, const MaskImage& b);
double pixel_accuracy(const SketchImage& a, const SketchImage& b);

}  // namespace latentface
