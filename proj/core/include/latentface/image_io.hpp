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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "latentface/image.hpp"

namespace latentface::io {

using Bytes = std::vector<std::uint8_t>;
using Palette = std::vector<std::array<std::uint8_t, 3>>;

// 8-bit RGB PNG.
Bytes encode_png(const RgbImage& image);
RgbImage decode_png(std::span<const std::uint8_t> png);
void write_png(const std::filesystem::path& path, const RgbImage& image);
RgbImage read_png(const std::filesystem::path& path);

// Masks travel as paletted PNG; palette index == class id.
Bytes encode_mask_png(const MaskImage& mask, const Palette& palette);
MaskImage decode_mask_png(std::span<const std::uint8_t> png, int num_classes);
void write_mask_png(const std::filesystem::path& path, const MaskImage& mask, const Palette& palette);
MaskImage read_mask_png(const std::filesystem::path& path, int num_classes);

// Raw integer grid: header line "H W num_classes" followed by H rows of W labels.
void write_mask_grid(const std::filesystem::path& path, const MaskImage& mask);
MaskImage read_mask_grid(const std::filesystem::path& path);

// Dispatches on extension (.png vs anything else).
MaskImage read_mask(const std::filesystem::path& path, int num_classes);

// Sketches: written as 8-bit grayscale {0,255}; 1-bit and 8-bit grayscale accepted on read.
Bytes encode_sketch_png(const SketchImage& sketch);
SketchImage decode_sketch_png(std::span<const std::uint8_t> png);
void write_sketch_png(const std::filesystem::path& path, const SketchImage& sketch);
SketchImage read_sketch_png(const std::filesystem::path& path);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

std::string base64_encode(std::span<const std::uint8_t> data);
Bytes base64_decode(std::string_view text);

}  // namespace latentface::io
