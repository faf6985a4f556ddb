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
#include <string>
#include <vector>

#include "json.hpp"

namespace latentface {

// Versioned checkpoint container:
//   "LFCK" | u32 version | str kind | str header-json | u64 n | n payload bytes
// Strings are u32-length-prefixed. The header carries the architecture
// descriptor; the payload is the raw parameter blob.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::string kind;
  nlohmann::json header;
  std::vector<std::uint8_t> payload;

  std::vector<std::uint8_t> encode() const;
  static Checkpoint decode(const std::vector<std::uint8_t>& bytes, const std::string& context);

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  // Digest of the full encoded file.
  std::uint64_t digest() const;
};

}  // namespace latentface
