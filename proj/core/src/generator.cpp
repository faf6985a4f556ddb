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

#include "latentface/generator.hpp"

#include <cmath>
#include <random>

namespace latentface {
namespace {

constexpr double kSquashGain = 1.7;

double leaky(double v) { return v >= 0.0 ? v : 0.2 * v; }

}  // namespace

GeneratedImage Generator::synthesize(const LatentCode& w) const {
  return synthesize_plus(LatentCodePlus::broadcast(w, num_layers()));
}

LatentSample Generator::sample_z_to_w(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  LatentSample s;
  s.z.resize(z_dim());
  for (int i = 0; i < z_dim(); ++i) s.z[i] = n01(rng);
  s.w = map_z(s.z);
  s.image = synthesize(s.w);
  return s;
}

ToyGenerator::ToyGenerator(std::shared_ptr<const ToyWorld> world, Config config)
    : world_(std::move(world)), config_(config) {
  require(world_ != nullptr, ErrorKind::kInvalidArgument, "toy generator needs a toy world");
  require(config_.latent_dim >= kNumAttrs, ErrorKind::kInvalidArgument,
          "toy generator latent dimension must be at least " + std::to_string(kNumAttrs));
  require(config_.num_layers >= 1, ErrorKind::kInvalidArgument, "toy generator needs at least one layer");
  const int d = config_.latent_dim;
  std::mt19937_64 rng(config_.seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  w1_.resize(d, d);
  w2_.resize(d, d);
  b1_.resize(d);
  b2_.resize(d);
  for (int i = 0; i < w1_.size(); ++i) w1_.data()[i] = n01(rng) * s * 1.4;
  for (int i = 0; i < w2_.size(); ++i) w2_.data()[i] = n01(rng) * s * 1.4;
  for (int i = 0; i < d; ++i) b1_[i] = 0.1 * n01(rng);
  for (int i = 0; i < d; ++i) b2_[i] = 0.5 * n01(rng);

  // Standardize the driving coordinates so attributes cover their range.
  constexpr int kStatSamples = 4096;
  std::mt19937_64 stat_rng(mix_seed(config_.seed, 99));
  Vec sum = Vec::Zero(kNumAttrs), sum2 = Vec::Zero(kNumAttrs);
  Vec z(d);
  for (int n = 0; n < kStatSamples; ++n) {
    for (int i = 0; i < d; ++i) z[i] = n01(stat_rng);
    const LatentCode w = map_z(z);
    for (int k = 0; k < kNumAttrs; ++k) {
      const double v = w.values[attribute_coordinate(static_cast<Attr>(k))];
      sum[k] += v;
      sum2[k] += v * v;
    }
  }
  coord_mean_ = sum / kStatSamples;
  coord_std_ = (sum2 / kStatSamples - coord_mean_.cwiseProduct(coord_mean_)).cwiseSqrt();

  Digest dg;
  dg.str("toy").pod(config_.latent_dim).pod(config_.num_layers).pod(config_.seed).pod(world_->resolution());
  digest_ = dg.value();
}

LatentCode ToyGenerator::map_z(const Vec& z) const {
  require(z.size() == config_.latent_dim, ErrorKind::kShapeMismatch, "z has the wrong dimension");
  const Vec h = (w1_ * z + b1_).unaryExpr(&leaky);
  return LatentCode{w2_ * h + b2_};
}

int ToyGenerator::attribute_coordinate(Attr a) const {
  return static_cast<int>(a) * (config_.latent_dim / kNumAttrs);
}

int ToyGenerator::attribute_layer(Attr a) const {
  const int k = static_cast<int>(a);
  const int group = k < 6 ? 0 : k < kNumGeometryAttrs ? 1 : k < 14 ? 2 : 3;
  return group * config_.num_layers / 4;
}

double ToyGenerator::coordinate_for(Attr a, double u) const {
  require(u > 0.0 && u < 1.0, ErrorKind::kInvalidArgument, "attribute value must be in (0, 1)");
  const int k = static_cast<int>(a);
  return coord_mean_[k] + coord_std_[k] * std::log(u / (1.0 - u)) / kSquashGain;
}

void ToyGenerator::check(const LatentCodePlus& wp) const {
  require(wp.num_layers() == config_.num_layers, ErrorKind::kShapeMismatch,
          "w+ has " + std::to_string(wp.num_layers()) + " layers, generator expects " +
              std::to_string(config_.num_layers));
  require(wp.dim() == config_.latent_dim, ErrorKind::kShapeMismatch,
          "latent dimension " + std::to_string(wp.dim()) + " does not match generator dimension " +
              std::to_string(config_.latent_dim));
  require(wp.layers.allFinite(), ErrorKind::kInvalidArgument, "latent contains NaN or Inf");
}

ToyAttributes ToyGenerator::attributes_of(const LatentCodePlus& wp) const {
  check(wp);
  ToyAttributes a;
  for (int k = 0; k < kNumAttrs; ++k) {
    const Attr attr = static_cast<Attr>(k);
    const double v = wp.layers(attribute_layer(attr), attribute_coordinate(attr));
    const double t = (v - coord_mean_[k]) / coord_std_[k];
    a.u[k] = 1.0 / (1.0 + std::exp(-kSquashGain * t));
  }
  return a;
}

ToyAttributes ToyGenerator::attributes_of(const LatentCode& w) const {
  return attributes_of(LatentCodePlus::broadcast(w, config_.num_layers));
}

GeneratedImage ToyGenerator::synthesize_plus(const LatentCodePlus& wp) const {
  GeneratedImage out;
  out.image = world_->render(attributes_of(wp));
  out.provenance = GeneratedImage::Provenance::kToy;
  out.source_latent = wp;
  return out;
}

std::unique_ptr<Generator> make_generator(const nlohmann::json& config, std::shared_ptr<const ToyWorld> world) {
  const std::string adapter = config.value("adapter", "toy");
  if (adapter == "toy") {
    ToyGenerator::Config c;
    c.latent_dim = config.value("latent_dim", c.latent_dim);
    c.num_layers = config.value("num_layers", c.num_layers);
    c.seed = config.value("seed", c.seed);
    return std::make_unique<ToyGenerator>(std::move(world), c);
  }
  fail(ErrorKind::kUnsupported, "no generator adapter named '" + adapter +
                                    "' is available; external generators must expose synthesize, "
                                    "synthesize_plus, latent_dim and num_layers");
}

}  // namespace latentface
