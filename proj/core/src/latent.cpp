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

#include "latentface/latent.hpp"

#include "binary.hpp"
#include "latentface/image_io.hpp"

namespace latentface {

LatentCodePlus LatentCodePlus::broadcast(const LatentCode& w, int num_layers) {
  require(num_layers >= 1, ErrorKind::kInvalidArgument, "w+ needs at least one layer");
  LatentCodePlus wp;
  wp.layers = w.values.transpose().replicate(num_layers, 1);
  return wp;
}

std::vector<std::uint8_t> encode_latent(const LatentCodePlus& wp, LatentDType dtype) {
  detail::ByteWriter w;
  w.put_magic("LFLT");
  w.put(std::uint32_t{1});
  w.put(static_cast<std::uint32_t>(wp.num_layers()));
  w.put(static_cast<std::uint32_t>(wp.dim()));
  w.put(static_cast<std::uint8_t>(dtype));
  w.pad(3);
  for (int l = 0; l < wp.num_layers(); ++l)
    for (int i = 0; i < wp.dim(); ++i) {
      if (dtype == LatentDType::kFloat32)
        w.put(static_cast<float>(wp.layers(l, i)));
      else
        w.put(wp.layers(l, i));
    }
  return std::move(w.bytes());
}

void write_latent_file(const std::filesystem::path& path, const LatentCodePlus& wp, LatentDType dtype) {
  io::write_file(path, encode_latent(wp, dtype));
}

LatentCodePlus decode_latent(const std::vector<std::uint8_t>& bytes, const std::string& context) {
  detail::ByteReader r(bytes, context);
  r.expect_magic("LFLT");
  const auto version = r.get<std::uint32_t>();
  require(version == 1, ErrorKind::kIo, context + ": unsupported latent file version");
  const auto layers = r.get<std::uint32_t>();
  const auto dim = r.get<std::uint32_t>();
  const auto dtype = static_cast<LatentDType>(r.get<std::uint8_t>());
  r.skip(3);
  require(dtype == LatentDType::kFloat32 || dtype == LatentDType::kFloat64, ErrorKind::kIo,
          context + ": unknown latent dtype");
  require(layers >= 1 && dim >= 1, ErrorKind::kIo, context + ": empty latent");
  const std::size_t width = dtype == LatentDType::kFloat32 ? 4 : 8;
  require(r.remaining() == std::size_t{layers} * dim * width, ErrorKind::kIo, context + ": payload size mismatch");
  LatentCodePlus wp;
  wp.layers.resize(layers, dim);
  for (std::uint32_t l = 0; l < layers; ++l)
    for (std::uint32_t i = 0; i < dim; ++i)
      wp.layers(l, i) = dtype == LatentDType::kFloat32 ? static_cast<double>(r.get<float>()) : r.get<double>();
  return wp;
}

LatentCodePlus read_latent_file(const std::filesystem::path& path) {
  return decode_latent(io::read_file(path), path.string());
}

}  // namespace latentface
