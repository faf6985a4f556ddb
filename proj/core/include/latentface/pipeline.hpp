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
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"

#include "latentface/conv_codec.hpp"
#include "latentface/editor.hpp"
#include "latentface/embedding.hpp"
#include "latentface/evaluator.hpp"
#include "latentface/generator.hpp"
#include "latentface/mapper.hpp"
#include "latentface/toy_world.hpp"
#include "latentface/trainer.hpp"

namespace latentface {

// Desk-scale defaults for every component and for training. A run directory
// stores this as config.json next to the checkpoints.
nlohmann::json default_pipeline_config();

// Exactly one of the three is set.
struct SpatialInput {
  std::optional<MaskImage> mask;
  std::optional<SketchImage> sketch;
  std::optional<ThreeDMMParams> threedmm;

  int count() const { return mask.has_value() + sketch.has_value() + threedmm.has_value(); }
  Modality modality() const;
};

struct GenerateResult {
  GeneratedImage image;
  LatentCode w;
};

class Pipeline {
 public:
  // Builds world, encoder, generator and parser from `config`; no trained
  // components are attached.
  explicit Pipeline(nlohmann::json config);

  // Loads config.json and whatever checkpoints exist in `run_dir`.
  static Pipeline load(const std::filesystem::path& run_dir);

  const nlohmann::json& config() const { return config_; }
  std::shared_ptr<const ToyWorld> world() const { return world_; }
  std::shared_ptr<const JointEncoder> encoder() const { return encoder_; }
  std::shared_ptr<const Generator> generator() const { return generator_; }
  const ToyGenerator* toy_generator() const { return dynamic_cast<const ToyGenerator*>(generator_.get()); }
  const FaceParser& parser() const { return *parser_; }

  void set_codec(std::shared_ptr<const ConvAutoencoder> codec);
  void set_mapper(std::shared_ptr<const MappingNet> mapper);
  std::shared_ptr<const ConvAutoencoder> codec(Modality m) const;
  std::shared_ptr<const MappingNet> mapper(Modality m) const;
  bool has_mapper(Modality m) const { return mappers_.count(m) > 0; }

  SpatialEncoders spatial_encoders() const;
  SpatialCode encode_spatial(const SpatialInput& input) const;

  // w = MappingNet(encode_text(text), encode_spatial(spatial)), image = G(w).
  GenerateResult generate(std::string_view text, const SpatialInput& spatial) const;

  std::shared_ptr<const Editor> editor(Modality m) const;

  // Manifest of dims, layer counts and component digests.
  nlohmann::json manifest() const;
  std::uint64_t digest() const;

 private:
  nlohmann::json config_;
  std::shared_ptr<const ToyWorld> world_;
  std::shared_ptr<const JointEncoder> encoder_;
  std::shared_ptr<const Generator> generator_;
  std::shared_ptr<const FaceParser> parser_;
  std::map<Modality, std::shared_ptr<const ConvAutoencoder>> codecs_;
  std::map<Modality, std::shared_ptr<const MappingNet>> mappers_;
  std::map<Modality, std::uint64_t> checkpoint_digests_;
};

std::filesystem::path codec_checkpoint_path(const std::filesystem::path& run_dir, Modality m);
std::filesystem::path mapper_checkpoint_path(const std::filesystem::path& run_dir, Modality m);

// Run-directory training used by the CLI. Both write a config snapshot, a loss
// CSV and the checkpoint; `overrides` is merged into the config's "training"
// and component blocks first.
CodecTrainResult train_codec_run(const std::filesystem::path& run_dir, Modality modality,
                                 const nlohmann::json& overrides = {},
                                 const std::function<void(const EpochLog&)>& on_epoch = {});
MapperTrainResult train_mapper_run(const std::filesystem::path& run_dir, Modality modality,
                                   const nlohmann::json& overrides = {},
                                   const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace latentface
