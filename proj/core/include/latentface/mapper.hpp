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
#include <vector>

#include "json.hpp"

#include "latentface/checkpoint.hpp"
#include "latentface/embedding.hpp"
#include "latentface/latent.hpp"
#include "latentface/spatial.hpp"

namespace latentface {

struct MapperConfig {
  int num_layers = 12;
  bool use_bn = false;
  bool use_dropout = false;
  double dropout_rate = 0.1;
  int hidden_dim = 128;
  int cond_dim = 64;
  int spatial_dim = 64;
  int out_dim = 64;
  Modality modality = Modality::kMask;
  // Eval-mode BN normalizes with running statistics; when false a batch
  // larger than one is normalized with its own statistics instead.
  bool bn_running_stats = true;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;

  int in_dim() const { return cond_dim + spatial_dim; }
  void validate() const;
  nlohmann::json to_json() const;
  static MapperConfig from_json(const nlohmann::json& j);
};

enum class MapperMode { kTrain, kEval };

// MLP from [f_cond || f_spatial] to a generator latent w.
// Block i < num_layers - 1: linear, optional batch norm, leaky ReLU 0.2,
// optional dropout. The last block is a plain linear layer.
class MappingNet {
 public:
  // Activations kept by forward() for backward(). Columns are batch entries.
  struct Cache {
    std::vector<Mat> inputs;    // input to each linear layer
    std::vector<Mat> xhat;      // normalized pre-activations (BN only)
    std::vector<Vec> inv_std;   // per-feature 1/sqrt(var + eps) (BN only)
    std::vector<bool> batch_stats;
    std::vector<Mat> pre_act;   // value fed to the nonlinearity
    std::vector<Mat> dropout;   // scaled keep masks
    std::vector<Vec> batch_mean, batch_var;
  };

  MappingNet(MapperConfig config, std::uint64_t seed);

  const MapperConfig& config() const { return config_; }

  LatentCode map(const EmbeddingVector& f_cond, const SpatialCode& f_spatial, MapperMode mode = MapperMode::kEval,
                 std::uint64_t seed = 0) const;

  // Packs a batch into the (in_dim x B) input layout, checking dimensions.
  Mat pack(std::span<const EmbeddingVector> f_cond, std::span<const SpatialCode> f_spatial) const;

  // x is in_dim x B; returns out_dim x B. `seed` drives dropout masks.
  Mat forward(const Mat& x, MapperMode mode, std::uint64_t seed = 0, Cache* cache = nullptr) const;
  // Gradient of a scalar loss w.r.t. parameters(), given dL/d(output).
  Vec backward(const Cache& cache, const Mat& grad_out) const;
  // Folds the batch statistics recorded in `cache` into the running ones.
  void update_running_stats(const Cache& cache);

  Vec& parameters() { return params_; }
  const Vec& parameters() const { return params_; }
  Eigen::Index num_parameters() const { return params_.size(); }
  const std::vector<Vec>& running_mean() const { return running_mean_; }
  const std::vector<Vec>& running_var() const { return running_var_; }

  std::uint64_t digest() const;
  Checkpoint to_checkpoint() const;
  static MappingNet from_checkpoint(const Checkpoint& ckpt);
  void save(const std::filesystem::path& path) const { to_checkpoint().save(path); }
  static MappingNet load(const std::filesystem::path& path) { return from_checkpoint(Checkpoint::load(path)); }

 private:
  struct Layer {
    int in, out;
    Eigen::Index w_off, b_off;
    Eigen::Index gamma_off = -1, beta_off = -1;
    bool hidden;
  };

  MapperConfig config_;
  std::uint64_t seed_;
  std::vector<Layer> layers_;
  Vec params_;
  std::vector<Vec> running_mean_, running_var_;
};

// w_dir = map(f_tar, f_spatial) - map(f_piv, f_spatial), eval mode.
EditDirection edit_direction_text(const MappingNet& net, const EmbeddingVector& f_tar, const EmbeddingVector& f_piv,
                                  const SpatialCode& f_spatial, std::string target_desc = {},
                                  std::string pivot_desc = {});

// w_dir = map(f_img, f_tar) - map(f_img, f_piv), eval mode.
EditDirection edit_direction_spatial(const MappingNet& net, const EmbeddingVector& f_img,
                                     const SpatialCode& f_spatial_tar, const SpatialCode& f_spatial_piv,
                                     std::string target_desc = {}, std::string pivot_desc = {});

}  // namespace latentface
