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

#include "latentface/embedding.hpp"

#include <cmath>

#include "binary.hpp"
#include "latentface/image_io.hpp"
#include "latentface/toy_world.hpp"

namespace latentface {

EmbeddingVector EmbeddingVector::unit(Vec v, std::uint64_t space) {
  const double n = v.norm();
  require(n > 0.0 && std::isfinite(n), ErrorKind::kInvalidArgument, "cannot normalize a zero or non-finite vector");
  return {v / n, Norm::kUnit, space};
}

double cosine(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), ErrorKind::kShapeMismatch,
          "cosine of vectors with dimensions " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  const double na = a.norm(), nb = b.norm();
  require(na > 0.0 && nb > 0.0, ErrorKind::kInvalidArgument, "cosine of a zero vector is undefined");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  require(a.space == 0 || b.space == 0 || a.space == b.space, ErrorKind::kInvalidArgument,
          "embeddings come from different spaces");
  return cosine(a.values, b.values);
}

EmbeddingVector pseudo_text_embedding(const EmbeddingVector& f_img, const Vec& noise) {
  require(f_img.dim() == noise.size(), ErrorKind::kShapeMismatch,
          "noise dimension " + std::to_string(noise.size()) + " does not match embedding dimension " +
              std::to_string(f_img.dim()));
  const double nn = noise.norm();
  require(nn > 0.0, ErrorKind::kInvalidArgument, "pseudo text embedding needs non-zero noise");
  require(std::abs(f_img.values.norm() - 1.0) <= 1e-6, ErrorKind::kInvalidArgument,
          "pseudo text embedding expects a unit-norm image embedding");
  return EmbeddingVector::unit(f_img.values + noise / nn, f_img.space);
}

Vec gaussian_noise(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = n01(rng);
  return v;
}

std::vector<EmbeddingVector> sample_pseudo_batch(const EmbeddingVector& f_img, std::size_t k,
                                                 std::uint64_t seed) {
  std::vector<EmbeddingVector> out;
  out.reserve(k);
  std::mt19937_64 rng(seed);
  while (out.size() < k) {
    const Vec noise = gaussian_noise(f_img.dim(), rng);
    if (noise.norm() == 0.0) continue;
    out.push_back(pseudo_text_embedding(f_img, noise));
  }
  return out;
}

SyntheticJointEncoder::SyntheticJointEncoder(std::shared_ptr<const ToyWorld> world, int dim, std::uint64_t seed)
    : world_(std::move(world)), dim_(dim), seed_(seed) {
  require(world_ != nullptr, ErrorKind::kInvalidArgument, "synthetic encoder needs a toy world");
  require(dim_ > 0, ErrorKind::kInvalidArgument, "embedding dimension must be positive");
  const int n = world_->resolution() * world_->resolution() * 3;
  projection_.resize(dim_, n);
  std::mt19937_64 rng(seed_);
  std::normal_distribution<float> n01(0.0f, 1.0f);
  const float scale = 1.0f / std::sqrt(static_cast<float>(n));
  for (int i = 0; i < projection_.size(); ++i) projection_.data()[i] = n01(rng) * scale;
  space_ = Digest().str("synthetic").pod(dim_).pod(seed_).pod(world_->resolution()).value();
}

EmbeddingVector SyntheticJointEncoder::encode_image(const RgbImage& image) const {
  require(image.height == world_->resolution() && image.width == world_->resolution(), ErrorKind::kShapeMismatch,
          "synthetic encoder expects " + std::to_string(world_->resolution()) + "x" +
              std::to_string(world_->resolution()) + " images");
  const Eigen::Map<const Eigen::VectorXf> px(image.pixels.data(), static_cast<Eigen::Index>(image.pixels.size()));
  const Eigen::VectorXf centred = px.array() - 0.5f;
  const Vec e = (projection_ * centred).cast<double>();
  return EmbeddingVector::unit(e, space_);
}

EmbeddingVector SyntheticJointEncoder::encode_text(std::string_view text) const {
  return encode_image(world_->render(ToyWorld::interpret(text)));
}

void validate_encoder(const JointEncoder& encoder, const RgbImage& probe_image, std::string_view probe_text) {
  for (const EmbeddingVector& e : {encoder.encode_image(probe_image), encoder.encode_text(probe_text)}) {
    require(e.dim() == encoder.dim(), ErrorKind::kShapeMismatch,
            "encoder '" + encoder.name() + "' emitted a vector of the wrong dimension");
    require(std::abs(e.values.norm() - 1.0) <= 1e-6, ErrorKind::kInvalidArgument,
            "encoder '" + encoder.name() + "' violates the unit-norm contract");
  }
}

std::unique_ptr<JointEncoder> make_joint_encoder(const nlohmann::json& config, std::shared_ptr<const ToyWorld> world) {
  const std::string adapter = config.value("adapter", "synthetic");
  if (adapter == "synthetic") {
    auto enc = std::make_unique<SyntheticJointEncoder>(world, config.value("dim", 64),
                                                       config.value("seed", std::uint64_t{0x5eed0001}));
    validate_encoder(*enc, world->render(ToyAttributes::neutral()), "a photo of a person");
    return enc;
  }
  fail(ErrorKind::kUnsupported, "no joint encoder adapter named '" + adapter +
                                    "' is available; pretrained encoders must be registered by the host");
}

void write_embeddings(const std::filesystem::path& path, std::span<const EmbeddingVector> embeddings, DType dtype) {
  const std::uint32_t dim = embeddings.empty() ? 0 : static_cast<std::uint32_t>(embeddings.front().dim());
  detail::ByteWriter w;
  w.put_magic("LFEM");
  w.put(std::uint32_t{1});
  w.put(dim);
  w.put(static_cast<std::uint64_t>(embeddings.size()));
  w.put(static_cast<std::uint8_t>(dtype));
  w.pad(7);
  for (const auto& e : embeddings) {
    require(static_cast<std::uint32_t>(e.dim()) == dim, ErrorKind::kShapeMismatch,
            "embedding dump requires equal dimensions");
    for (int i = 0; i < e.dim(); ++i) {
      if (dtype == DType::kFloat32)
        w.put(static_cast<float>(e.values[i]));
      else
        w.put(e.values[i]);
    }
  }
  io::write_file(path, w.bytes());
}

std::vector<EmbeddingVector> read_embeddings(const std::filesystem::path& path) {
  const io::Bytes raw = io::read_file(path);
  detail::ByteReader r(raw, path.string());
  r.expect_magic("LFEM");
  const auto version = r.get<std::uint32_t>();
  require(version == 1, ErrorKind::kIo, "unsupported embedding dump version " + std::to_string(version));
  const auto dim = r.get<std::uint32_t>();
  const auto count = r.get<std::uint64_t>();
  const auto dtype = static_cast<DType>(r.get<std::uint8_t>());
  r.skip(7);
  require(dtype == DType::kFloat32 || dtype == DType::kFloat64, ErrorKind::kIo, "unknown dtype tag");
  const std::size_t width = dtype == DType::kFloat32 ? 4 : 8;
  require(r.remaining() == count * dim * width, ErrorKind::kIo, "embedding dump payload size mismatch");
  std::vector<EmbeddingVector> out;
  out.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    Vec v(dim);
    for (std::uint32_t i = 0; i < dim; ++i)
      v[i] = dtype == DType::kFloat32 ? static_cast<double>(r.get<float>()) : r.get<double>();
    const bool unit = std::abs(v.norm() - 1.0) <= 1e-6;
    out.push_back({std::move(v), unit ? EmbeddingVector::Norm::kUnit : EmbeddingVector::Norm::kRaw, 0});
  }
  return out;
}

}  // namespace latentface
