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
#include <cstdint>
#include <string>
#include <vector>

#include "latentface/common.hpp"

namespace latentface {

// Single generator latent w.
struct LatentCode {
  Vec values;

  int dim() const { return static_cast<int>(values.size()); }
  bool all_finite() const { return values.allFinite(); }
};

// Layered latent w+: one row per style layer.
struct LatentCodePlus {
  Mat layers;  // L x D_w

  int num_layers() const { return static_cast<int>(layers.rows()); }
  int dim() const { return static_cast<int>(layers.cols()); }

  static LatentCodePlus broadcast(const LatentCode& w, int num_layers);
};

// A latent-space edit direction plus where it came from.
struct EditDirection {
  enum class Source { kText, kSpatial };

  Vec values;
  Source source = Source::kText;
  std::string pivot_desc;
  std::string target_desc;

  int dim() const { return static_cast<int>(values.size()); }
};

enum class LatentDType : std::uint8_t { kFloat32 = 1, kFloat64 = 2 };

// "LFLT" magic, u32 version, u32 layers, u32 dim, u8 dtype, 3 pad bytes, then
// layers*dim values row-major.
void write_latent_file(const std::filesystem::path& path, const LatentCodePlus& wp,
                       LatentDType dtype = LatentDType::kFloat32);
std::vector<std::uint8_t> encode_latent(const LatentCodePlus& wp, LatentDType dtype = LatentDType::kFloat32);
LatentCodePlus decode_latent(const std::vector<std::uint8_t>& bytes, const std::string& context = "latent");
LatentCodePlus read_latent_file(const std::filesystem::path& path);

}  // namespace latentface
