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

#include "latentface/editor.hpp"

#include <cmath>

namespace latentface {

LatentCodePlus apply_edit(const LatentCodePlus& wp, const EditDirection& dir, double beta) {
  require(dir.dim() == wp.dim(), ErrorKind::kShapeMismatch,
          "edit direction has dimension " + std::to_string(dir.dim()) + ", latent has " + std::to_string(wp.dim()));
  require(std::isfinite(beta), ErrorKind::kInvalidArgument, "edit strength must be finite");
  LatentCodePlus out = wp;
  if (beta == 0.0) return out;
  out.layers.rowwise() += (beta * dir.values).transpose();
  return out;
}

LatentCodePlus apply_edit(const InvertedFace& src, const EditDirection& dir, double beta) {
  return apply_edit(src.wp_src, dir, beta);
}

InvertedFace ToyInverter::invert(const GeneratedImage& image) const {
  require(image.source_latent.has_value(), ErrorKind::kUnsupported,
          "the toy inverter only handles images produced by the toy generator; for other images "
          "supply a precomputed latent file (L x D_w) instead");
  return ingest_latent(*image.source_latent, num_layers_, latent_dim_, "generated");
}

InvertedFace ingest_latent(const LatentCodePlus& wp, int num_layers, int latent_dim, std::string source_ref) {
  require(wp.dim() == latent_dim, ErrorKind::kShapeMismatch,
          "latent has dimension " + std::to_string(wp.dim()) + ", generator expects " + std::to_string(latent_dim));
  require(wp.layers.allFinite(), ErrorKind::kInvalidArgument, "latent contains NaN or Inf");
  InvertedFace face;
  face.source_ref = std::move(source_ref);
  if (wp.num_layers() == 1 && num_layers != 1) {
    face.wp_src = LatentCodePlus::broadcast(LatentCode{wp.layers.row(0).transpose()}, num_layers);
    return face;
  }
  require(wp.num_layers() == num_layers, ErrorKind::kShapeMismatch,
          "latent has " + std::to_string(wp.num_layers()) + " layers, generator expects " +
              std::to_string(num_layers));
  face.wp_src = wp;
  return face;
}

InvertedFace ingest_latent_file(const std::filesystem::path& path, int num_layers, int latent_dim) {
  return ingest_latent(read_latent_file(path), num_layers, latent_dim, path.string());
}

std::optional<EditDirection> DirectionCache::find(const Key& key) const {
  std::lock_guard lock(mu_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  ++hits_;
  return it->second;
}

void DirectionCache::insert(const Key& key, const EditDirection& dir) {
  std::lock_guard lock(mu_);
  entries_.emplace(key, dir);
}

std::size_t DirectionCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::size_t DirectionCache::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::uint64_t spatial_digest(const SpatialCode& code) {
  Digest d;
  d.pod(static_cast<int>(code.modality));
  d.span(std::span<const double>(code.values.data(), static_cast<std::size_t>(code.values.size())));
  return d.value();
}

Editor::Editor(std::shared_ptr<const Generator> generator, std::shared_ptr<const JointEncoder> encoder,
               std::shared_ptr<const MappingNet> mapper)
    : generator_(std::move(generator)), encoder_(std::move(encoder)), mapper_(std::move(mapper)) {
  require(generator_ && encoder_ && mapper_, ErrorKind::kNotReady, "editor needs a generator, encoder and mapper");
  require(mapper_->config().out_dim == generator_->latent_dim(), ErrorKind::kShapeMismatch,
          "mapper output dimension does not match the generator latent dimension");
  require(mapper_->config().cond_dim == encoder_->dim(), ErrorKind::kShapeMismatch,
          "mapper condition dimension does not match the encoder dimension");
}

EditDirection Editor::text_direction(std::string_view pivot_text, std::string_view target_text,
                                     const SpatialCode& f_spatial) const {
  const std::string pivot(pivot_text.empty() ? kDefaultPivotText : pivot_text);
  const DirectionCache::Key key{pivot, std::string(target_text), spatial_digest(f_spatial)};
  if (auto hit = cache_.find(key)) return *hit;
  EditDirection dir = edit_direction_text(*mapper_, encoder_->encode_text(target_text), encoder_->encode_text(pivot),
                                          f_spatial, std::string(target_text), pivot);
  cache_.insert(key, dir);
  return dir;
}

EditDirection Editor::spatial_direction(const EmbeddingVector& f_img, const SpatialCode& tar,
                                        const SpatialCode& piv) const {
  Digest img;
  img.span(std::span<const double>(f_img.values.data(), static_cast<std::size_t>(f_img.values.size())));
  const DirectionCache::Key key{"spatial:" + to_hex(spatial_digest(piv)) + ":" + img.hex(),
                                "spatial:" + to_hex(spatial_digest(tar)), spatial_digest(tar)};
  if (auto hit = cache_.find(key)) return *hit;
  EditDirection dir = edit_direction_spatial(*mapper_, f_img, tar, piv, std::get<1>(key), std::get<0>(key));
  cache_.insert(key, dir);
  return dir;
}

GeneratedImage Editor::edit_text(const InvertedFace& src, std::string_view pivot_text, std::string_view target_text,
                                 const SpatialCode& f_spatial, double beta) const {
  const EditDirection dir = text_direction(pivot_text, target_text, f_spatial);
  return generator_->synthesize_plus(apply_edit(src, dir, beta));
}

GeneratedImage Editor::edit_spatial(const InvertedFace& src, const SpatialCode& spatial_tar,
                                    const SpatialCode& spatial_piv, double beta,
                                    const std::optional<EmbeddingVector>& f_img) const {
  const EmbeddingVector img =
      f_img ? *f_img : encoder_->encode_image(generator_->synthesize_plus(src.wp_src).image);
  const EditDirection dir = spatial_direction(img, spatial_tar, spatial_piv);
  return generator_->synthesize_plus(apply_edit(src, dir, beta));
}

}  // namespace latentface
