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

#include "latentface/embedding.hpp"
#include "latentface/toy_world.hpp"

using namespace latentface;
using latentface::testing::vec;

TEST_CASE("pseudo_text_embedding hand examples") {
  const auto f = EmbeddingVector::unit(vec({1, 0, 0, 0}));
  const auto p = pseudo_text_embedding(f, vec({0, 2, 0, 0}));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(p.values[0] == doctest::Approx(r).epsilon(1e-12));
  CHECK(p.values[1] == doctest::Approx(r).epsilon(1e-12));
  CHECK(p.values[2] == 0.0);
  CHECK(p.norm == EmbeddingVector::Norm::kUnit);

  const auto q = pseudo_text_embedding(EmbeddingVector::unit(vec({0, 1})), vec({0, 5}));
  CHECK(q.values[0] == doctest::Approx(0.0));
  CHECK(q.values[1] == doctest::Approx(1.0));
}

TEST_CASE("pseudo_text_embedding rejects degenerate input") {
  const auto f = EmbeddingVector::unit(vec({1, 0}));
  CHECK_THROWS_AS(pseudo_text_embedding(f, vec({0, 0})), Error);
  CHECK_THROWS_AS(pseudo_text_embedding(f, vec({0, 1, 0})), Error);
  // f = -noise direction cancels exactly.
  CHECK_THROWS_AS(pseudo_text_embedding(f, vec({-3, 0})), Error);
}

TEST_CASE("pseudo_text_embedding is unit norm and invariant to noise scale") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = latentface::testing::random_unit(64, rng);
    const Vec eps = gaussian_noise(64, rng);
    const auto base = pseudo_text_embedding(f, eps);
    CHECK(base.values.norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (double c : {0.1, 1.0, 10.0}) {
      const auto scaled = pseudo_text_embedding(f, c * eps);
      CHECK((scaled.values - base.values).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("sample_pseudo_batch") {
  std::mt19937_64 rng(1);
  const auto f = latentface::testing::random_unit(64, rng);
  const auto a = sample_pseudo_batch(f, 3, 7);
  const auto b = sample_pseudo_batch(f, 3, 7);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a[i].values.norm() == doctest::Approx(1.0));
    CHECK(a[i].values == b[i].values);
  }
  CHECK(a[0].values != a[1].values);
  CHECK(sample_pseudo_batch(f, 0, 7).empty());

  // Monte-Carlo: pseudo embeddings stay near f (cos ~ 1/sqrt(2)); two
  // independent random unit vectors average ~0.
  const auto many = sample_pseudo_batch(f, 1000, 11);
  double mean_cos = 0.0, mean_random = 0.0;
  for (const auto& p : many) {
    mean_cos += cosine(f, p);
    mean_random += cosine(latentface::testing::random_unit(64, rng), latentface::testing::random_unit(64, rng));
  }
  mean_cos /= 1000.0;
  mean_random /= 1000.0;
  CHECK(mean_cos > mean_random + 0.5);
  CHECK(mean_cos == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.05));
}

TEST_CASE("cosine") {
  CHECK(cosine(vec({1, 0}), vec({1, 0})) == 1.0);
  CHECK(cosine(vec({1, 0}), vec({0, 1})) == 0.0);
  CHECK(cosine(vec({1, 1}), vec({1, 0})) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(cosine(vec({0, 0}), vec({1, 0})), Error);
  CHECK_THROWS_AS(cosine(vec({1, 0, 0}), vec({1, 0})), Error);
  const auto a = EmbeddingVector::unit(vec({1, 0}), 1);
  const auto b = EmbeddingVector::unit(vec({1, 0}), 2);
  CHECK_THROWS_AS(cosine(a, b), Error);
}

TEST_CASE("synthetic encoder contract") {
  auto world = std::make_shared<ToyWorld>(64);
  SyntheticJointEncoder enc(world, 64, 5);
  const auto attrs = ToyAttributes::neutral();
  const auto img = world->render(attrs);
  const auto fi = enc.encode_image(img);
  const auto ft = enc.encode_text(ToyWorld::describe(attrs));
  CHECK(fi.dim() == 64);
  CHECK(fi.values.norm() == doctest::Approx(1.0));
  CHECK(ft.values.norm() == doctest::Approx(1.0));
  CHECK(fi.space == enc.space_id());
  CHECK(ft.space == enc.space_id());
  CHECK(cosine(fi, ft) > 0.99);
  CHECK_NOTHROW(validate_encoder(enc, img, "blond hair"));
  CHECK(enc.encode_text("long hair").values == enc.encode_text("long hair").values);

  SyntheticJointEncoder other(world, 64, 6);
  CHECK(other.space_id() != enc.space_id());
  CHECK_THROWS_AS(cosine(fi, other.encode_image(img)), Error);
}

TEST_CASE("encoder registry") {
  auto world = std::make_shared<ToyWorld>(64);
  auto enc = make_joint_encoder({{"adapter", "synthetic"}, {"dim", 32}, {"seed", 9}}, world);
  CHECK(enc->dim() == 32);
  try {
    make_joint_encoder({{"adapter", "farl"}}, world);
    FAIL("expected kUnsupported");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUnsupported);
  }
}

TEST_CASE("embedding file round trip") {
  const auto dir = latentface::testing::scratch_dir("embeddings");
  std::mt19937_64 rng(5);
  std::vector<EmbeddingVector> v;
  for (int i = 0; i < 4; ++i) v.push_back(latentface::testing::random_unit(16, rng));
  write_embeddings(dir / "e64.lfem", v, DType::kFloat64);
  write_embeddings(dir / "e32.lfem", v, DType::kFloat32);
  const auto r64 = read_embeddings(dir / "e64.lfem");
  const auto r32 = read_embeddings(dir / "e32.lfem");
  REQUIRE(r64.size() == 4);
  REQUIRE(r32.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(r64[i].values == v[i].values);
    CHECK((r32[i].values - v[i].values).cwiseAbs().maxCoeff() < 1e-6);
  }
  io::write_text(dir / "bad.lfem", "not an embedding file");
  CHECK_THROWS_AS(read_embeddings(dir / "bad.lfem"), Error);
}
