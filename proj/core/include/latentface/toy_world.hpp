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

#include <array>
#include <string>
#include <string_view>

#include "latentface/image.hpp"
#include "latentface/image_io.hpp"
#include "latentface/spatial.hpp"

namespace latentface {

// Procedural face world used as the desk-scale oracle. Every attribute is a
// normalized scalar in [0, 1]; the renderer, the parser and the text format
// are all defined in terms of these.
enum class Attr : int {
  kFaceX,
  kFaceY,
  kFaceWidth,
  kFaceHeight,
  kHairVolume,
  kHairLength,
  kEyeSpacing,
  kEyeHeight,
  kEyeSize,
  kMouthHeight,
  kMouthWidth,
  kMouthOpen,
  kHairTone,
  kSkinTone,
  kBackgroundTone,
  kLipTone,
};

inline constexpr int kNumAttrs = 16;
inline constexpr int kNumGeometryAttrs = 12;

std::string_view attr_key(Attr a);

struct ToyAttributes {
  std::array<double, kNumAttrs> u{};

  static ToyAttributes neutral();
  double& operator[](Attr a) { return u[static_cast<int>(a)]; }
  double operator[](Attr a) const { return u[static_cast<int>(a)]; }
  friend bool operator==(const ToyAttributes&, const ToyAttributes&) = default;
};

// Class ids emitted by the toy parser.
enum class ToyClass : std::uint8_t { kBackground = 0, kSkin = 1, kHair = 2, kEyes = 3, kMouth = 4 };
inline constexpr int kToyNumClasses = 5;

class ToyWorld {
 public:
  explicit ToyWorld(int resolution = 64);

  int resolution() const { return resolution_; }

  RgbImage render(const ToyAttributes& attrs) const;
  // Ground-truth label grid; identical to parse(render(attrs)).
  MaskImage render_mask(const ToyAttributes& attrs) const;

  // Rule-based parser: nearest region colour family per pixel. Throws
  // kUnsupported when a pixel is far from every family (not a toy image).
  MaskImage parse(const RgbImage& image) const;

  // Region boundaries of a label grid (4-neighbourhood), the toy stand-in for
  // an edge-detected sketch.
  static SketchImage sketch(const MaskImage& mask);

  ThreeDMMParams threedmm(const ToyAttributes& attrs) const;

  // Canonical attribute text, e.g. "a photo of a person, face_x=0.512, ...".
  static std::string describe(const ToyAttributes& attrs);
  // Reads "key=value" tokens and a small phrase vocabulary ("blond hair",
  // "long hair", ...). Unmentioned attributes stay neutral (0.5).
  static ToyAttributes interpret(std::string_view text);

  static const io::Palette& palette();
  static const std::array<std::string_view, kToyNumClasses>& class_names();

  // Mean colour of the pixels labelled `cls`; zero when the region is empty.
  static std::array<double, 3> region_mean(const RgbImage& image, const MaskImage& mask, ToyClass cls);
  static std::size_t region_area(const MaskImage& mask, ToyClass cls);

 private:
  int resolution_;
  Eigen::MatrixXd shape_basis_;       // 100 x 7
  Eigen::MatrixXd expression_basis_;  // 50 x 2
};

}  // namespace latentface
