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

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>

#include "latentface/embedding.hpp"
#include "latentface/generator.hpp"
#include "latentface/latent.hpp"
#include "latentface/mapper.hpp"

namespace latentface {

inline constexpr std::string_view kDefaultPivotText = "A photo of a person";

struct InvertedFace {
  LatentCodePlus wp_src;
  std::string source_ref;
};

// w_edit = w_src + beta * w_dir, the direction added to every layer.
LatentCodePlus apply_edit(const InvertedFace& src, const EditDirection& dir, double beta);
LatentCodePlus apply_edit(const LatentCodePlus& wp, const EditDirection& dir, double beta);

// Port for GAN inversion adapters.
class Inverter {
 public:
  virtual ~Inverter() = default;
  virtual InvertedFace invert(const GeneratedImage& image) const = 0;
  virtual std::string name() const = 0;
};

// Exact inverse for images that carry their generating latent (every image
// from a toy generator). Anything else is rejected.
class ToyInverter final : public Inverter {
 public:
  explicit ToyInverter(int num_layers, int latent_dim) : num_layers_(num_layers), latent_dim_(latent_dim) {}
  InvertedFace invert(const GeneratedImage& image) const override;
  std::string name() const override { return "toy"; }

 private:
  int num_layers_;
  int latent_dim_;
};

// Wraps a precomputed latent. A single-row latent is broadcast to
// `num_layers`; any other layer count must match exactly.
InvertedFace ingest_latent(const LatentCodePlus& wp, int num_layers, int latent_dim, std::string source_ref = {});
InvertedFace ingest_latent_file(const std::filesystem::path& path, int num_layers, int latent_dim);

// Thread-safe memo of edit directions keyed by (pivot, target, spatial digest).
class DirectionCache {
 public:
  using Key = std::tuple<std::string, std::string, std::uint64_t>;

  std::optional<EditDirection> find(const Key& key) const;
  void insert(const Key& key, const EditDirection& dir);
  std::size_t size() const;
  std::size_t hits() const;

 private:
  mutable std::mutex mu_;
  std::map<Key, EditDirection> entries_;
  mutable std::size_t hits_ = 0;
};

std::uint64_t spatial_digest(const SpatialCode& code);

class Editor {
 public:
  Editor(std::shared_ptr<const Generator> generator, std::shared_ptr<const JointEncoder> encoder,
         std::shared_ptr<const MappingNet> mapper);

  // Text direction, memoized.
  EditDirection text_direction(std::string_view pivot_text, std::string_view target_text,
                               const SpatialCode& f_spatial) const;
  // Spatial direction, memoized on the digests of f_img and both codes.
  EditDirection spatial_direction(const EmbeddingVector& f_img, const SpatialCode& tar, const SpatialCode& piv) const;

  GeneratedImage edit_text(const InvertedFace& src, std::string_view pivot_text, std::string_view target_text,
                           const SpatialCode& f_spatial, double beta = 1.0) const;
  // f_img defaults to the embedding of the re-synthesized source.
  GeneratedImage edit_spatial(const InvertedFace& src, const SpatialCode& spatial_tar, const SpatialCode& spatial_piv,
                              double beta = 1.0, const std::optional<EmbeddingVector>& f_img = std::nullopt) const;

  const DirectionCache& cache() const { return cache_; }
  const Generator& generator() const { return *generator_; }

 private:
  std::shared_ptr<const Generator> generator_;
  std::shared_ptr<const JointEncoder> encoder_;
  std::shared_ptr<const MappingNet> mapper_;
  mutable DirectionCache cache_;
};

}  // namespace latentface
