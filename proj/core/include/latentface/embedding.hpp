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
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "latentface/common.hpp"
#include "latentface/image.hpp"

namespace latentface {

class ToyWorld;

// A vector in a joint vision-language space. `space` identifies the encoder
// that produced it; vectors from different spaces are rejected by every
// binary operation. Zero means "unspecified" and matches anything.
struct EmbeddingVector {
  enum class Norm { kUnit, kRaw };

  Vec values;
  Norm norm = Norm::kRaw;
  std::uint64_t space = 0;

  int dim() const { return static_cast<int>(values.size()); }

  // Normalizes `v`; throws on a zero vector.
  static EmbeddingVector unit(Vec v, std::uint64_t space = 0);
  static EmbeddingVector raw(Vec v, std::uint64_t space = 0) { return {std::move(v), Norm::kRaw, space}; }
};

double cosine(const Vec& a, const Vec& b);
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// f' = y / |y|, y = f_img + noise / |noise|.
EmbeddingVector pseudo_text_embedding(const EmbeddingVector& f_img, const Vec& noise);

// Standard-normal noise vector.
Vec gaussian_noise(int dim, std::mt19937_64& rng);

// k pseudo embeddings from one image embedding, deterministic in `seed`.
std::vector<EmbeddingVector> sample_pseudo_batch(const EmbeddingVector& f_img, std::size_t k,
                                                 std::uint64_t seed);

// Port for a joint image/text encoder. Both sides must emit unit-norm vectors
// of dim(), in the same space.
class JointEncoder {
 public:
  virtual ~JointEncoder() = default;
  virtual EmbeddingVector encode_image(const RgbImage& image) const = 0;
  virtual EmbeddingVector encode_text(std::string_view text) const = 0;
  virtual int dim() const = 0;
  virtual std::string name() const = 0;
  virtual std::uint64_t space_id() const = 0;
};

// Desk-scale encoder: a fixed seeded Gaussian projection of centred pixels,
// normalized. Text is interpreted as toy attributes, rendered to the
// canonical image and passed through the same projection, so the two sides
// are aligned by construction.
class SyntheticJointEncoder final : public JointEncoder {
 public:
  SyntheticJointEncoder(std::shared_ptr<const ToyWorld> world, int dim, std::uint64_t seed);

  EmbeddingVector encode_image(const RgbImage& image) const override;
  EmbeddingVector encode_text(std::string_view text) const override;
  int dim() const override { return dim_; }
  std::string name() const override { return "synthetic"; }
  std::uint64_t space_id() const override { return space_; }

 private:
  std::shared_ptr<const ToyWorld> world_;
  int dim_;
  std::uint64_t seed_;
  std::uint64_t space_;
  Eigen::MatrixXf projection_;  // dim x (H*W*3)
};

// Load-time contract check for adapters: unit-norm outputs of the declared
// dimension on both sides.
void validate_encoder(const JointEncoder& encoder, const RgbImage& probe_image, std::string_view probe_text);

// Registry keyed by config["adapter"]. Only "synthetic" ships here; other names
// fail with kUnsupported.
std::unique_ptr<JointEncoder> make_joint_encoder(const nlohmann::json& config,
                                                 std::shared_ptr<const ToyWorld> world);

enum class DType : std::uint8_t { kFloat32 = 1, kFloat64 = 2 };

// Flat binary dump: "LFEM" magic, u32 version, u32 dim, u64 count, u8 dtype,
// 7 pad bytes, then count*dim values.
void write_embeddings(const std::filesystem::path& path, std::span<const EmbeddingVector> embeddings,
                      DType dtype = DType::kFloat32);
std::vector<EmbeddingVector> read_embeddings(const std::filesystem::path& path);

}  // namespace latentface
