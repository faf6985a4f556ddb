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
#include <vector>

#include "latentface/common.hpp"

namespace latentface {

// Interleaved H x W x 3, values in [0, 1].
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<float> pixels;

  RgbImage() = default;
  RgbImage(int h, int w) : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * 3, 0.0f) {}

  float& at(int y, int x, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  float at(int y, int x, int c) const { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::size_t num_pixels() const { return static_cast<std::size_t>(height) * width; }
  bool empty() const { return pixels.empty(); }
  bool all_finite() const;
  std::uint64_t digest() const;

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

inline constexpr int kMaxMaskClasses = 19;

// Integer label grid. Invariant: every label < num_classes <= 19.
struct MaskImage {
  int height = 0;
  int width = 0;
  int num_classes = 0;
  std::vector<std::uint8_t> labels;

  MaskImage() = default;
  MaskImage(int h, int w, int classes)
      : height(h), width(w), num_classes(classes), labels(static_cast<std::size_t>(h) * w, 0) {}

  std::uint8_t& at(int y, int x) { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return labels.size(); }

  // Throws kInvalidArgument when the invariant does not hold.
  void validate() const;
  std::uint64_t digest() const;

  friend bool operator==(const MaskImage&, const MaskImage&) = default;
};

// Strictly binary grid (0 background, 1 stroke).
struct SketchImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;

  SketchImage() = default;
  SketchImage(int h, int w) : height(h), width(w), pixels(static_cast<std::size_t>(h) * w, 0) {}

  std::uint8_t& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return pixels.size(); }

  void validate() const;
  std::uint64_t digest() const;

  // Load-time normalization: accepts {0,1} or {0,255} storage, rejects anything else.
  static SketchImage from_raw(int h, int w, const std::vector<std::uint8_t>& raw);

  friend bool operator==(const SketchImage&, const SketchImage&) = default;
};

}  // namespace latentface
