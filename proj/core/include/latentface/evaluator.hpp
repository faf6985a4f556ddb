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
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "latentface/embedding.hpp"
#include "latentface/image.hpp"
#include "latentface/toy_world.hpp"

namespace latentface {

// 100 * cos(encode_image(image), encode_text(text)). Throws kNotReady when no
// encoder is bound.
double clip_score(const RgbImage& image, std::string_view text, const JointEncoder* encoder);
double clip_score(const EmbeddingVector& image_embedding, const EmbeddingVector& text_embedding);

// 100 * matching cells / total cells.
double mask_accuracy(const MaskImage& generated, const MaskImage& gt);

struct CmmdOptions {
  double sigma = 10.0;
  double scale = 1000.0;
  // The default V-statistic keeps the diagonal kernel terms, so identical sets
  // score zero up to rounding. The U-statistic drops them.
  bool unbiased = false;
};

// scale * MMD^2 with k(x, y) = exp(-|x - y|^2 / (2 sigma^2)). Both sets need at
// least two members. Exactly symmetric in its arguments. The unbiased variant
// may return small negative values.
double cmmd(std::span<const EmbeddingVector> a, std::span<const EmbeddingVector> b, const CmmdOptions& options = {});
double cmmd(std::span<const RgbImage> a, std::span<const RgbImage> b, const JointEncoder& encoder,
            const CmmdOptions& options = {});

struct SpeedReport {
  int runs = 0;
  double mean_ms = 0.0;
  double stddev_ms = 0.0;
  double cv = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
  std::string hardware;

  nlohmann::json to_json() const;
};

std::string hardware_descriptor();

// Wall-clock of `fn` over `runs` calls after `warmup` untimed calls.
SpeedReport speed_bench(const std::function<void()>& fn, int runs = 100, int warmup = 3);

// Port for face parsing adapters.
class FaceParser {
 public:
  virtual ~FaceParser() = default;
  virtual MaskImage parse(const RgbImage& image) const = 0;
  virtual int num_classes() const = 0;
  virtual std::string name() const = 0;
};

class ToyFaceParser final : public FaceParser {
 public:
  explicit ToyFaceParser(std::shared_ptr<const ToyWorld> world) : world_(std::move(world)) {}
  MaskImage parse(const RgbImage& image) const override { return world_->parse(image); }
  int num_classes() const override { return kToyNumClasses; }
  std::string name() const override { return "toy"; }

 private:
  std::shared_ptr<const ToyWorld> world_;
};

// Registry keyed by config["adapter"]; only "toy" ships here.
std::unique_ptr<FaceParser> make_face_parser(const nlohmann::json& config, std::shared_ptr<const ToyWorld> world);

struct EvalReport {
  static constexpr std::string_view kSchema = "latentface.eval_report";
  static constexpr int kVersion = 1;

  double clip_score_pct = 0.0;
  double mask_accuracy_pct = 0.0;
  double cmmd = 0.0;      // headline, clamped at zero
  double cmmd_raw = 0.0;  // estimator output before clamping
  std::optional<double> speed_ms;
  std::size_t n_samples = 0;
  std::string config_digest;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
};

struct EvalSample {
  RgbImage generated;
  RgbImage real;
  MaskImage gt_mask;
  std::string text;
};

EvalReport evaluate(std::span<const EvalSample> samples, const JointEncoder& encoder, const FaceParser& parser,
                    const CmmdOptions& options = {});

// `generated_dir` holds <id>.png per manifest record; the manifest is the one
// written by dump_corpus (id, text, image, mask per record, paths relative to
// the manifest).
EvalReport evaluate_directory(const std::filesystem::path& generated_dir, const std::filesystem::path& gt_manifest,
                              const JointEncoder& encoder, const FaceParser& parser, const CmmdOptions& options = {});

}  // namespace latentface
