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

#include <memory>
#include <optional>
#include <string>

#include "json.hpp"

#include "latentface/image.hpp"
#include "latentface/latent.hpp"
#include "latentface/toy_world.hpp"

namespace latentface {

struct GeneratedImage {
  enum class Provenance { kToy, kExternal };

  RgbImage image;
  Provenance provenance = Provenance::kToy;
  // The w+ that produced the image, when the generator knows it.
  std::optional<LatentCodePlus> source_latent;
};

struct LatentSample {
  Vec z;
  LatentCode w;
  GeneratedImage image;
};

// Uniform latent-to-image port. Implementations are immutable after
// construction and safe to call concurrently.
class Generator {
 public:
  virtual ~Generator() = default;

  virtual GeneratedImage synthesize_plus(const LatentCodePlus& wp) const = 0;
  virtual LatentCode map_z(const Vec& z) const = 0;
  virtual int latent_dim() const = 0;
  virtual int z_dim() const = 0;
  virtual int num_layers() const = 0;
  virtual int resolution() const = 0;
  virtual std::string name() const = 0;
  virtual std::uint64_t digest() const = 0;

  // synthesize_plus(broadcast(w)).
  GeneratedImage synthesize(const LatentCode& w) const;

  // z ~ N(0, I) from `seed`, w = map_z(z), image = synthesize(w).
  LatentSample sample_z_to_w(std::uint64_t seed) const;
};

// Desk-scale generator. z -> w is a fixed two-layer MLP; w -> image reads one
// designated coordinate per toy attribute (affine standardization, then a
// logistic squash to [0, 1]) and renders the toy face. Geometry attributes are
// read from the early layers of w+, colours from the late ones.
class ToyGenerator final : public Generator {
 public:
  struct Config {
    int latent_dim = 64;
    int num_layers = 4;
    std::uint64_t seed = 0x70790001;
  };

  ToyGenerator(std::shared_ptr<const ToyWorld> world, Config config);

  GeneratedImage synthesize_plus(const LatentCodePlus& wp) const override;
  LatentCode map_z(const Vec& z) const override;
  int latent_dim() const override { return config_.latent_dim; }
  int z_dim() const override { return config_.latent_dim; }
  int num_layers() const override { return config_.num_layers; }
  int resolution() const override { return world_->resolution(); }
  std::string name() const override { return "toy"; }
  std::uint64_t digest() const override { return digest_; }

  ToyAttributes attributes_of(const LatentCodePlus& wp) const;
  ToyAttributes attributes_of(const LatentCode& w) const;

  // Index into w of the coordinate that drives `a`, and the w+ layer it is read from.
  int attribute_coordinate(Attr a) const;
  int attribute_layer(Attr a) const;
  // Value of the driving coordinate that yields normalized attribute value u.
  double coordinate_for(Attr a, double u) const;

  const ToyWorld& world() const { return *world_; }
  std::shared_ptr<const ToyWorld> world_ptr() const { return world_; }

 private:
  void check(const LatentCodePlus& wp) const;

  std::shared_ptr<const ToyWorld> world_;
  Config config_;
  Mat w1_, w2_;
  Vec b1_, b2_;
  Vec coord_mean_, coord_std_;  // statistics of w at the driving coordinates
  std::uint64_t digest_ = 0;
};

// Registry keyed by config["adapter"]; "toy" is built in.
std::unique_ptr<Generator> make_generator(const nlohmann::json& config, std::shared_ptr<const ToyWorld> world);

}  // namespace latentface
