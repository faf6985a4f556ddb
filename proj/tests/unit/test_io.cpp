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

#include <random>

#include "doctest.h"
#include "test_util.hpp"

#include "latentface/checkpoint.hpp"
#include "latentface/image_io.hpp"
#include "latentface/latent.hpp"
#include "latentface/toy_world.hpp"

using namespace latentface;

TEST_CASE("base64 known vectors") {
  const auto enc = [](std::string s) {
    return io::base64_encode(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  };
  CHECK(enc("") == "");
  CHECK(enc("f") == "Zg==");
  CHECK(enc("fo") == "Zm8=");
  CHECK(enc("foo") == "Zm9v");
  CHECK(enc("foobar") == "Zm9vYmFy");
  const auto d = io::base64_decode("Zm9vYmE=");
  CHECK(std::string(d.begin(), d.end()) == "fooba");
  CHECK_THROWS_AS(io::base64_decode("Zm9v*"), Error);
}

TEST_CASE("rgb png round trip") {
  std::mt19937_64 rng(1);
  RgbImage img(5, 7);
  for (auto& p : img.pixels) p = static_cast<float>(rng() % 256) / 255.0f;
  const auto back = io::decode_png(io::encode_png(img));
  REQUIRE(back.height == 5);
  REQUIRE(back.width == 7);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) CHECK(back.pixels[i] == doctest::Approx(img.pixels[i]).epsilon(1e-6));
  const std::vector<std::uint8_t> junk{1, 2, 3, 4};
  CHECK_THROWS_AS(io::decode_png(junk), Error);
}

TEST_CASE("mask and sketch formats") {
  const auto dir = latentface::testing::scratch_dir("io");
  std::mt19937_64 rng(2);
  MaskImage m(6, 9, kToyNumClasses);
  for (auto& l : m.labels) l = static_cast<std::uint8_t>(rng() % kToyNumClasses);
  CHECK(io::decode_mask_png(io::encode_mask_png(m, ToyWorld::palette()), kToyNumClasses) == m);
  io::write_mask_png(dir / "m.png", m, ToyWorld::palette());
  io::write_mask_grid(dir / "m.txt", m);
  CHECK(io::read_mask(dir / "m.png", kToyNumClasses) == m);
  CHECK(io::read_mask(dir / "m.txt", kToyNumClasses) == m);
  // More classes in the file than the consumer accepts.
  CHECK_THROWS_AS(io::decode_mask_png(io::encode_mask_png(m, ToyWorld::palette()), 2), Error);

  SketchImage s(4, 4);
  s.at(1, 2) = 1;
  s.at(3, 0) = 1;
  CHECK(io::decode_sketch_png(io::encode_sketch_png(s)) == s);
  io::write_sketch_png(dir / "s.png", s);
  CHECK(io::read_sketch_png(dir / "s.png") == s);
  CHECK_THROWS_AS(io::read_png(dir / "missing.png"), Error);
}

TEST_CASE("latent files") {
  const auto dir = latentface::testing::scratch_dir("latent");
  LatentCodePlus wp{Mat::Random(3, 5)};
  write_latent_file(dir / "a.lflt", wp, LatentDType::kFloat64);
  write_latent_file(dir / "b.lflt", wp, LatentDType::kFloat32);
  CHECK(read_latent_file(dir / "a.lflt").layers == wp.layers);
  CHECK((read_latent_file(dir / "b.lflt").layers - wp.layers).cwiseAbs().maxCoeff() < 1e-6);
  auto bytes = encode_latent(wp, LatentDType::kFloat64);
  CHECK(decode_latent(bytes).layers == wp.layers);
  bytes[0] = 'X';
  CHECK_THROWS_AS(decode_latent(bytes), Error);
  bytes = encode_latent(wp);
  bytes.pop_back();
  CHECK_THROWS_AS(decode_latent(bytes), Error);
  const auto b = LatentCodePlus::broadcast(LatentCode{Vec::LinSpaced(5, 0, 1)}, 4);
  CHECK(b.num_layers() == 4);
  CHECK(b.layers.row(3).transpose() == Vec::LinSpaced(5, 0, 1));
}

TEST_CASE("checkpoint container") {
  Checkpoint c;
  c.kind = "demo";
  c.header = {{"a", 1}};
  c.payload = {1, 2, 3};
  const auto bytes = c.encode();
  const auto back = Checkpoint::decode(bytes, "demo");
  CHECK(back.kind == "demo");
  CHECK(back.header == c.header);
  CHECK(back.payload == c.payload);
  CHECK(back.digest() == c.digest());
  auto bad = bytes;
  bad[4] = 9;  // version
  CHECK_THROWS_AS(Checkpoint::decode(bad, "demo"), Error);
}
