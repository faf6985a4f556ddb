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

#include "latentface/image.hpp"

#include <cmath>

namespace latentface {

bool RgbImage::all_finite() const {
  for (float v : pixels)
    if (!std::isfinite(v)) return false;
  return true;
}

std::uint64_t RgbImage::digest() const {
  Digest d;
  d.pod(height).pod(width).span(std::span<const float>(pixels));
  return d.value();
}

void MaskImage::validate() const {
  require(height > 0 && width > 0, ErrorKind::kInvalidArgument, "mask has empty shape");
  require(num_classes >= 1 && num_classes <= kMaxMaskClasses, ErrorKind::kInvalidArgument,
          "mask num_classes must be in [1, 19], got " + std::to_string(num_classes));
  require(labels.size() == static_cast<std::size_t>(height) * width, ErrorKind::kShapeMismatch,
          "mask label buffer does not match its shape");
  for (auto l : labels)
    require(l < num_classes, ErrorKind::kInvalidArgument,
            "mask label " + std::to_string(l) + " out of range for " + std::to_string(num_classes) +
                " classes");
}

std::uint64_t MaskImage::digest() const {
  Digest d;
  d.pod(height).pod(width).pod(num_classes).span(std::span<const std::uint8_t>(labels));
  return d.value();
}

void SketchImage::validate() const {
  require(height > 0 && width > 0, ErrorKind::kInvalidArgument, "sketch has empty shape");
  require(pixels.size() == static_cast<std::size_t>(height) * width, ErrorKind::kShapeMismatch,
          "sketch buffer does not match its shape");
  for (auto p : pixels)
    require(p <= 1, ErrorKind::kInvalidArgument, "sketch pixels must be binary");
}

std::uint64_t SketchImage::digest() const {
  Digest d;
  d.pod(height).pod(width).span(std::span<const std::uint8_t>(pixels));
  return d.value();
}

SketchImage SketchImage::from_raw(int h, int w, const std::vector<std::uint8_t>& raw) {
  require(raw.size() == static_cast<std::size_t>(h) * w, ErrorKind::kShapeMismatch,
          "sketch buffer does not match its shape");
  SketchImage s(h, w);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto v = raw[i];
    require(v == 0 || v == 1 || v == 255, ErrorKind::kInvalidArgument,
            "sketch pixel value " + std::to_string(v) + " is not in {0, 1, 255}");
    s.pixels[i] = v == 0 ? 0 : 1;
  }
  return s;
}

}  // namespace latentface
