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

#include "latentface/spatial.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "latentface/image_io.hpp"

namespace latentface {

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::kMask: return "mask";
    case Modality::kSketch: return "sketch";
    case Modality::kThreeDMM: return "threedmm";
  }
  return "unknown";
}

Modality parse_modality(std::string_view name) {
  if (name == "mask") return Modality::kMask;
  if (name == "sketch") return Modality::kSketch;
  if (name == "threedmm" || name == "3dmm") return Modality::kThreeDMM;
  fail(ErrorKind::kInvalidArgument, "unknown modality '" + std::string(name) + "'");
}

SpatialCode pack_3dmm(const ThreeDMMParams& p) {
  require(p.shape.size() == kThreeDMMShapeDim, ErrorKind::kShapeMismatch,
          "3DMM shape must have 100 entries, got " + std::to_string(p.shape.size()));
  require(p.expression.size() == kThreeDMMExpressionDim, ErrorKind::kShapeMismatch,
          "3DMM expression must have 50 entries, got " + std::to_string(p.expression.size()));
  require(p.pose.size() == kThreeDMMPoseDim, ErrorKind::kShapeMismatch,
          "3DMM pose must have 9 entries, got " + std::to_string(p.pose.size()));
  SpatialCode code;
  code.modality = Modality::kThreeDMM;
  code.values.resize(kThreeDMMDim);
  code.values << p.shape, p.expression, p.pose;
  return code;
}

ThreeDMMParams unpack_3dmm(const SpatialCode& code) {
  require(code.modality == Modality::kThreeDMM, ErrorKind::kInvalidArgument,
          "code is not a 3DMM code");
  require(code.dim() == kThreeDMMDim, ErrorKind::kShapeMismatch, "3DMM code must have 159 entries");
  ThreeDMMParams p;
  p.shape = code.values.segment(0, kThreeDMMShapeDim);
  p.expression = code.values.segment(kThreeDMMShapeDim, kThreeDMMExpressionDim);
  p.pose = code.values.segment(kThreeDMMShapeDim + kThreeDMMExpressionDim, kThreeDMMPoseDim);
  return p;
}

void write_3dmm_text(const std::filesystem::path& path, const ThreeDMMParams& p) {
  const SpatialCode c = pack_3dmm(p);
  std::ostringstream os;
  os.precision(9);
  for (int i = 0; i < c.dim(); ++i) os << (i ? " " : "") << static_cast<float>(c.values[i]);
  os << '\n';
  io::write_text(path, os.str());
}

void write_3dmm_binary(const std::filesystem::path& path, const ThreeDMMParams& p) {
  static_assert(std::endian::native == std::endian::little, "binary rows are little-endian");
  const SpatialCode c = pack_3dmm(p);
  io::Bytes out(kThreeDMMDim * sizeof(float));
  for (int i = 0; i < kThreeDMMDim; ++i) {
    const float f = static_cast<float>(c.values[i]);
    std::memcpy(out.data() + i * sizeof(float), &f, sizeof(float));
  }
  io::write_file(path, out);
}

ThreeDMMParams read_3dmm(const std::filesystem::path& path) {
  const io::Bytes raw = io::read_file(path);
  SpatialCode c;
  c.modality = Modality::kThreeDMM;
  c.values.resize(kThreeDMMDim);
  const bool looks_text = std::all_of(raw.begin(), raw.end(), [](std::uint8_t b) {
    return std::isspace(b) || std::isdigit(b) || b == '.' || b == '-' || b == '+' || b == 'e' ||
           b == 'E';
  });
  if (raw.size() == kThreeDMMDim * sizeof(float) && !looks_text) {
    for (int i = 0; i < kThreeDMMDim; ++i) {
      float f;
      std::memcpy(&f, raw.data() + i * sizeof(float), sizeof(float));
      c.values[i] = f;
    }
  } else {
    std::istringstream is(std::string(raw.begin(), raw.end()));
    int n = 0;
    double v;
    while (is >> v) {
      require(n < kThreeDMMDim, ErrorKind::kShapeMismatch, "3DMM file has more than 159 values");
      c.values[n++] = v;
    }
    require(n == kThreeDMMDim, ErrorKind::kShapeMismatch,
            "3DMM file must hold 159 values, found " + std::to_string(n));
  }
  return unpack_3dmm(c);
}

ProbabilityField one_hot(const MaskImage& mask) {
  mask.validate();
  ProbabilityField f(mask.num_classes, mask.height, mask.width);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) f.at(mask.at(y, x), y, x) = 1.0f;
  return f;
}

ProbabilityField as_field(const SketchImage& sketch) {
  sketch.validate();
  ProbabilityField f(1, sketch.height, sketch.width);
  for (std::size_t i = 0; i < sketch.pixels.size(); ++i) f.values[i] = sketch.pixels[i];
  return f;
}

MaskImage argmax(const ProbabilityField& field) {
  require(field.channels >= 1 && field.channels <= kMaxMaskClasses, ErrorKind::kInvalidArgument,
          "field channel count is not a valid class count");
  MaskImage m(field.height, field.width, field.channels);
  for (int y = 0; y < field.height; ++y)
    for (int x = 0; x < field.width; ++x) {
      int best = 0;
      for (int c = 1; c < field.channels; ++c)
        if (field.at(c, y, x) > field.at(best, y, x)) best = c;
      m.at(y, x) = static_cast<std::uint8_t>(best);
    }
  return m;
}

SketchImage binarize(const ProbabilityField& field, float threshold) {
  require(field.channels == 1, ErrorKind::kInvalidArgument, "sketch field must have one channel");
  SketchImage s(field.height, field.width);
  for (std::size_t i = 0; i < s.pixels.size(); ++i) s.pixels[i] = field.values[i] >= threshold ? 1 : 0;
  return s;
}

double mse_field_loss(std::span<const ProbabilityField> x, std::span<const ProbabilityField> xhat) {
  require(!x.empty() && x.size() == xhat.size(), ErrorKind::kShapeMismatch,
          "loss needs equally sized non-empty batches");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i].same_shape(xhat[i]), ErrorKind::kShapeMismatch, "field shapes differ");
    double s = 0.0;
    for (std::size_t j = 0; j < x[i].values.size(); ++j) {
      const double d = static_cast<double>(x[i].values[j]) - xhat[i].values[j];
      s += d * d;
    }
    total += s;
  }
  return total / static_cast<double>(x.size());
}

double mask_reconstruction_loss(const MaskImage& x, const ProbabilityField& xhat) {
  const ProbabilityField target = one_hot(x);
  return mse_field_loss(std::span(&target, 1), std::span(&xhat, 1));
}

double sketch_reconstruction_loss(std::span<const SketchImage> x, std::span<const ProbabilityField> xhat) {
  require(!x.empty() && x.size() == xhat.size(), ErrorKind::kShapeMismatch,
          "loss needs equally sized non-empty batches");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i].validate();
    require(xhat[i].channels == 1 && xhat[i].height == x[i].height && xhat[i].width == x[i].width,
            ErrorKind::kShapeMismatch, "sketch reconstruction shape differs from input");
    double s = 0.0;
    for (std::size_t j = 0; j < x[i].pixels.size(); ++j) {
      const double p = std::clamp(static_cast<double>(xhat[i].values[j]), kBceEpsilon, 1.0 - kBceEpsilon);
      s += x[i].pixels[j] ? std::log(p) : std::log1p(-p);
    }
    total -= s;
  }
  return total / static_cast<double>(x.size());
}

double sketch_reconstruction_loss(const SketchImage& x, const ProbabilityField& xhat) {
  return sketch_reconstruction_loss(std::span(&x, 1), std::span(&xhat, 1));
}

double pixel_accuracy(const MaskImage& a, const MaskImage& b) {
  require(a.height == b.height && a.width == b.width, ErrorKind::kShapeMismatch, "mask shapes differ");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.labels.size(); ++i) same += a.labels[i] == b.labels[i];
  return static_cast<double>(same) / static_cast<double>(a.labels.size());
}

double pixel_accuracy(const SketchImage& a, const SketchImage& b) {
  require(a.height == b.height && a.width == b.width, ErrorKind::kShapeMismatch, "sketch shapes differ");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) same += a.pixels[i] == b.pixels[i];
  return static_cast<double>(same) / static_cast<double>(a.pixels.size());
}

}  // namespace latentface
