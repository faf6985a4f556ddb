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

#include "latentface/checkpoint.hpp"

#include "binary.hpp"
#include "latentface/common.hpp"
#include "latentface/image_io.hpp"

namespace latentface {

std::vector<std::uint8_t> Checkpoint::encode() const {
  detail::ByteWriter w;
  w.put_magic("LFCK");
  w.put(kVersion);
  w.put_string(kind);
  w.put_string(header.dump());
  w.put(static_cast<std::uint64_t>(payload.size()));
  w.put_bytes(payload.data(), payload.size());
  return std::move(w.bytes());
}

Checkpoint Checkpoint::decode(const std::vector<std::uint8_t>& bytes, const std::string& context) {
  detail::ByteReader r(bytes, context);
  r.expect_magic("LFCK");
  const auto version = r.get<std::uint32_t>();
  require(version == kVersion, ErrorKind::kIo,
          context + ": checkpoint version " + std::to_string(version) + " is not supported");
  Checkpoint c;
  c.kind = r.get_string();
  try {
    c.header = nlohmann::json::parse(r.get_string());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kIo, context + ": corrupt checkpoint header: " + e.what());
  }
  const auto n = r.get<std::uint64_t>();
  require(r.remaining() == n, ErrorKind::kIo, context + ": checkpoint payload size mismatch");
  c.payload.resize(n);
  r.get_bytes(c.payload.data(), n);
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const { io::write_file(path, encode()); }

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  return decode(io::read_file(path), path.string());
}

std::uint64_t Checkpoint::digest() const {
  const auto bytes = encode();
  return Digest().bytes(bytes.data(), bytes.size()).value();
}

}  // namespace latentface
