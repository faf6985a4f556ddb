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

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

#include "latentface/evaluator.hpp"
#include "latentface/generator.hpp"
#include "latentface/toy_world.hpp"
#include "latentface/trainer.hpp"

using namespace latentface;

namespace {

struct World {
  std::shared_ptr<const ToyWorld> world = std::make_shared<ToyWorld>(64);
  ToyGenerator gen{world, {}};
};

}  // namespace

TEST_CASE("toy world: parser recovers the rendered mask") {
  World w;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto s = make_toy_sample(w.gen, 5, i);
    CHECK(w.world->parse(s.image) == s.mask);
    CHECK(w.world->render_mask(s.attrs) == s.mask);
    CHECK(ToyWorld::sketch(s.mask) == s.sketch);
  }
  RgbImage odd(64, 64);
  for (auto& p : odd.pixels) p = 0.0f;
  for (int x = 0; x < 64; ++x) odd.at(0, x, 1) = 1.0f;  // pure green, not a toy colour
  CHECK_THROWS_AS(w.world->parse(odd), Error);
}

TEST_CASE("toy world: text round trip") {
  auto a = ToyAttributes::neutral();
  a[Attr::kHairTone] = 0.125;
  a[Attr::kMouthWidth] = 0.75;
  const auto back = ToyWorld::interpret(ToyWorld::describe(a));
  for (int k = 0; k < kNumAttrs; ++k) CHECK(back.u[k] == doctest::Approx(a.u[k]).epsilon(1e-3));
  CHECK(ToyWorld::interpret("hair=blond")[Attr::kHairTone] > 0.5);
  CHECK(ToyWorld::interpret("A photo of a person") == ToyAttributes::neutral());
}

TEST_CASE("synthesize: determinism, broadcast and errors") {
  World w;
  const auto s = w.gen.sample_z_to_w(3);
  const auto again = w.gen.sample_z_to_w(3);
  CHECK(s.z == again.z);
  CHECK(s.w.values == again.w.values);
  CHECK(s.image.image == again.image.image);
  CHECK(w.gen.sample_z_to_w(4).w.values != s.w.values);

  CHECK(w.gen.synthesize(s.w).image == w.gen.synthesize_plus(LatentCodePlus::broadcast(s.w, 4)).image);
  REQUIRE(s.image.source_latent.has_value());
  CHECK(s.image.source_latent->layers == LatentCodePlus::broadcast(s.w, 4).layers);

  LatentCode bad = s.w;
  bad.values[3] = std::nan("");
  CHECK_THROWS_AS(w.gen.synthesize(bad), Error);
  CHECK_THROWS_AS(w.gen.synthesize(LatentCode{Vec::Zero(63)}), Error);
  CHECK_THROWS_AS(w.gen.synthesize_plus(LatentCodePlus::broadcast(s.w, 3)), Error);
}

TEST_CASE("hair coordinate moves the hair colour monotonically") {
  World w;
  const auto base = w.gen.sample_z_to_w(9).w;
  const int k = w.gen.attribute_coordinate(Attr::kHairTone);
  double prev = -1.0;
  for (double v : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    LatentCode x = base;
    x.values[k] = w.gen.coordinate_for(Attr::kHairTone, 0.5) + v * 3.0;
    const auto img = w.gen.synthesize(x).image;
    const auto mask = w.world->parse(img);
    const auto mean = ToyWorld::region_mean(img, mask, ToyClass::kHair);
    const double lum = mean[0] + mean[1] + mean[2];
    CHECK(lum > prev);
    prev = lum;
  }
}

TEST_CASE("attribute readout inverts coordinate_for") {
  World w;
  for (int a = 0; a < kNumAttrs; ++a) {
    LatentCode x = w.gen.sample_z_to_w(1).w;
    x.values[w.gen.attribute_coordinate(static_cast<Attr>(a))] = w.gen.coordinate_for(static_cast<Attr>(a), 0.3);
    CHECK(w.gen.attributes_of(x).u[a] == doctest::Approx(0.3).epsilon(1e-9));
  }
}

TEST_CASE("sampling is shard independent") {
  World w;
  const auto all = sample_toy_world(w.gen, 6, 21);
  const auto tail = sample_toy_world(w.gen, 3, 21, 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(all[3 + i].w.values == tail[i].w.values);
    CHECK(all[3 + i].id == tail[i].id);
  }
  CHECK(corpus_digest(std::span<const ToySample>(all)) == corpus_digest(std::span<const ToySample>(sample_toy_world(w.gen, 6, 21))));
}

TEST_CASE("parser port") {
  World w;
  ToyFaceParser parser(w.world);
  const auto s = make_toy_sample(w.gen, 2, 0);
  CHECK(parser.parse(s.image) == s.mask);
  CHECK(parser.num_classes() == kToyNumClasses);
  CHECK_THROWS_AS(make_face_parser({{"adapter", "bisenet"}}, w.world), Error);
  CHECK_THROWS_AS(make_generator({{"adapter", "stylegan2"}}, w.world), Error);
}
