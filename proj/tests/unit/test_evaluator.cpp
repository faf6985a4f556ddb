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
#include <random>
#include <thread>

#include "doctest.h"
#include "test_util.hpp"

#include "latentface/evaluator.hpp"
#include "latentface/trainer.hpp"

using namespace latentface;

namespace {

// Independent brute-force MMD^2: plain double loops over the raw vectors.
double brute_cmmd(const std::vector<EmbeddingVector>& a, const std::vector<EmbeddingVector>& b, double sigma,
                  double scale, bool unbiased) {
  auto k = [&](const Vec& x, const Vec& y) {
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
    return std::exp(-d2 / (2.0 * sigma * sigma));
  };
  const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());
  double kaa = 0.0, kbb = 0.0, kab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (!unbiased || i != j) kaa += k(a[i].values, a[j].values);
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (!unbiased || i != j) kbb += k(b[i].values, b[j].values);
  for (const auto& x : a)
    for (const auto& y : b) kab += k(x.values, y.values);
  const double daa = unbiased ? n * (n - 1) : n * n;
  const double dbb = unbiased ? m * (m - 1) : m * m;
  return scale * (kaa / daa + kbb / dbb - 2.0 * kab / (n * m));
}

std::vector<EmbeddingVector> random_set(std::size_t n, int dim, std::mt19937_64& rng, double spread = 1.0) {
  std::vector<EmbeddingVector> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(EmbeddingVector::raw(spread * gaussian_noise(dim, rng)));
  return out;
}

}  // namespace

TEST_CASE("cmmd matches the brute-force kernel sum") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_set(5, 8, rng, 5.0);
    const auto b = random_set(5, 8, rng, 5.0);
    CHECK(std::abs(cmmd(a, b) - brute_cmmd(a, b, 10.0, 1000.0, false)) < 1e-10);
    CmmdOptions u;
    u.unbiased = true;
    CHECK(std::abs(cmmd(a, b, u) - brute_cmmd(a, b, 10.0, 1000.0, true)) < 1e-10);
    CmmdOptions s;
    s.sigma = 2.0;
    s.scale = 1.0;
    CHECK(std::abs(cmmd(a, b, s) - brute_cmmd(a, b, 2.0, 1.0, false)) < 1e-10);
    CHECK(cmmd(a, b) == cmmd(b, a));
  }
  const auto a = random_set(3, 4, rng), b = random_set(7, 4, rng);
  CHECK(std::abs(cmmd(a, b) - brute_cmmd(a, b, 10.0, 1000.0, false)) < 1e-10);
}

TEST_CASE("cmmd identity and errors") {
  std::mt19937_64 rng(2);
  const auto a = random_set(5, 16, rng);
  CHECK(std::abs(cmmd(a, a)) <= 1e-6);
  CHECK(std::abs(cmmd(a, a)) < 1e-9);
  const auto one = random_set(1, 16, rng);
  CHECK_THROWS_AS(cmmd(one, a), Error);
  CHECK_THROWS_AS(cmmd(a, random_set(5, 8, rng)), Error);
}

TEST_CASE("cmmd separates distributions on the toy world") {
  auto world = std::make_shared<ToyWorld>(64);
  ToyGenerator gen(world, {});
  SyntheticJointEncoder enc(world, 64, 5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lo(0.05, 0.35), hi(0.65, 0.95), any(0.05, 0.95);
  auto draw = [&](auto& dist, std::size_t n) {
    std::vector<RgbImage> out;
    for (std::size_t i = 0; i < n; ++i) {
      ToyAttributes a;
      for (auto& u : a.u) u = dist(rng);
      out.push_back(world->render(a));
    }
    return out;
  };
  const auto ref = draw(any, 200), same = draw(any, 200), low = draw(lo, 200), high = draw(hi, 200);
  const double d_same = cmmd(ref, same, enc);
  CHECK(d_same < cmmd(ref, low, enc));
  CHECK(d_same < cmmd(ref, high, enc));
  CHECK(d_same < cmmd(low, high, enc));
}

TEST_CASE("mask accuracy against brute-force counting") {
  std::mt19937_64 rng(4);
  for (int side = 4; side <= 64; side *= 2) {
    for (int trial = 0; trial < 10; ++trial) {
      const int h = side, w = side + trial % 3;
      const int classes = 2 + trial % 4;
      MaskImage a(h, w, classes), b(h, w, classes);
      for (auto& l : a.labels) l = static_cast<std::uint8_t>(rng() % classes);
      for (auto& l : b.labels) l = static_cast<std::uint8_t>(rng() % classes);
      long same = 0;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) same += a.at(y, x) == b.at(y, x);
      CHECK(mask_accuracy(a, b) == doctest::Approx(100.0 * same / (h * w)).epsilon(1e-12));
    }
  }
  MaskImage a(4, 4, 3), b(4, 4, 3);
  CHECK(mask_accuracy(a, b) == 100.0);
  for (int i = 0; i < 4; ++i) b.at(i, i) = 1;
  CHECK(mask_accuracy(a, b) == 75.0);
  MaskImage c(4, 4, 3);
  std::fill(c.labels.begin(), c.labels.end(), 2);
  CHECK(mask_accuracy(a, c) == 0.0);
  CHECK_THROWS_AS(mask_accuracy(a, MaskImage(4, 3, 3)), Error);
}

TEST_CASE("clip score") {
  auto world = std::make_shared<ToyWorld>(64);
  ToyGenerator gen(world, {});
  SyntheticJointEncoder enc(world, 64, 5);
  const auto samples = sample_toy_world(gen, 50, 9);
  int better = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double own = clip_score(samples[i].image, samples[i].text, &enc);
    CHECK(own >= 99.0);
    better += own > clip_score(samples[i].image, samples[(i + 1) % samples.size()].text, &enc);
  }
  CHECK(better == 50);
  try {
    clip_score(samples[0].image, "x", nullptr);
    FAIL("expected kNotReady");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNotReady);
  }
}

TEST_CASE("evaluate on ground truth") {
  auto world = std::make_shared<ToyWorld>(64);
  ToyGenerator gen(world, {});
  SyntheticJointEncoder enc(world, 64, 5);
  ToyFaceParser parser(world);
  std::vector<EvalSample> set;
  for (const auto& s : sample_toy_world(gen, 10, 3)) set.push_back({s.image, s.image, s.mask, s.text});
  const auto r = evaluate(set, enc, parser);
  CHECK(r.mask_accuracy_pct == 100.0);
  CHECK(r.clip_score_pct >= 99.0);
  CHECK(std::abs(r.cmmd) < 1e-6);
  CHECK(r.n_samples == 10);

  const auto back = EvalReport::from_json(r.to_json());
  CHECK(back.clip_score_pct == r.clip_score_pct);
  CHECK(back.n_samples == r.n_samples);
  CHECK(r.to_json()["schema"] == std::string(EvalReport::kSchema));
  auto j = r.to_json();
  j["version"] = 99;
  CHECK_THROWS_AS(EvalReport::from_json(j), Error);
}

TEST_CASE("speed bench") {
  int calls = 0;
  const auto r = speed_bench([&] {
    ++calls;
    std::this_thread::sleep_for(std::chrono::microseconds(200));
  }, 20, 2);
  CHECK(calls == 22);
  CHECK(r.runs == 20);
  CHECK(r.mean_ms >= 0.2);
  CHECK(r.min_ms <= r.mean_ms);
  CHECK(r.max_ms >= r.mean_ms);
  CHECK(!r.hardware.empty());
  const auto j = r.to_json();
  CHECK(j.contains("mean_ms"));
  CHECK(j["runs"] == 20);
  CHECK_THROWS_AS(speed_bench([] {}, 0), Error);
}
