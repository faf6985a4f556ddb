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

#include "doctest.h"
#include "test_util.hpp"

#include "latentface/conv_codec.hpp"
#include "latentface/generator.hpp"
#include "latentface/trainer.hpp"

using namespace latentface;

namespace {

CodecConfig tiny(Modality m) {
  CodecConfig c;
  c.modality = m;
  c.height = c.width = 8;
  c.num_classes = 3;
  c.code_dim = 6;
  c.base_channels = 2;
  c.blocks = 2;
  return c;
}

MaskImage random_mask(int h, int w, int classes, std::mt19937_64& rng) {
  MaskImage m(h, w, classes);
  for (auto& l : m.labels) l = static_cast<std::uint8_t>(rng() % classes);
  return m;
}

SketchImage random_sketch(int h, int w, std::mt19937_64& rng) {
  SketchImage s(h, w);
  for (auto& p : s.pixels) p = static_cast<std::uint8_t>(rng() % 2);
  return s;
}

// Central difference along a random direction against the analytic
// directional derivative. Float parameters, so the tolerance is float-sized.
void check_directional_gradient(const ConvAutoencoder& base, std::span<const ProbabilityField> batch) {
  Eigen::VectorXf grad;
  base.loss_and_gradient(batch, grad);
  REQUIRE(grad.size() == base.parameters().size());
  std::mt19937_64 rng(17);
  std::normal_distribution<float> nd;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXf d(grad.size());
    for (auto& v : d) v = nd(rng);
    d /= d.norm();
    const float h = 1e-2f;
    ConvAutoencoder plus = base, minus = base;
    plus.parameters() += h * d;
    minus.parameters() -= h * d;
    const double numeric = (plus.loss(batch) - minus.loss(batch)) / (2.0 * h);
    const double analytic = grad.cast<double>().dot(d.cast<double>());
    CHECK(std::abs(numeric - analytic) <= 2e-2 * std::max(1.0, std::abs(analytic)));
  }
  // A few single coordinates with large gradients.
  std::vector<Eigen::Index> idx(grad.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + 5, idx.end(),
                    [&](auto a, auto b) { return std::abs(grad[a]) > std::abs(grad[b]); });
  for (int k = 0; k < 5; ++k) {
    const auto i = idx[k];
    const float h = 1e-2f;
    ConvAutoencoder plus = base, minus = base;
    plus.parameters()[i] += h;
    minus.parameters()[i] -= h;
    const double numeric = (plus.loss(batch) - minus.loss(batch)) / (2.0 * h);
    CHECK(numeric == doctest::Approx(grad[i]).epsilon(2e-2));
  }
}

}  // namespace

TEST_CASE("mask codec gradient matches finite differences") {
  std::mt19937_64 rng(2);
  ConvAutoencoder codec(tiny(Modality::kMask), 1);
  std::vector<ProbabilityField> batch;
  for (int i = 0; i < 3; ++i) batch.push_back(one_hot(random_mask(8, 8, 3, rng)));
  check_directional_gradient(codec, batch);
}

TEST_CASE("sketch codec gradient matches finite differences") {
  std::mt19937_64 rng(3);
  ConvAutoencoder codec(tiny(Modality::kSketch), 1);
  std::vector<ProbabilityField> batch;
  for (int i = 0; i < 3; ++i) batch.push_back(as_field(random_sketch(8, 8, rng)));
  check_directional_gradient(codec, batch);
}

TEST_CASE("loss agrees with decode(encode(x))") {
  std::mt19937_64 rng(4);
  ConvAutoencoder codec(tiny(Modality::kMask), 9);
  codec.set_trained(true);
  std::vector<MaskImage> masks;
  std::vector<ProbabilityField> fields, recon;
  for (int i = 0; i < 2; ++i) {
    masks.push_back(random_mask(8, 8, 3, rng));
    fields.push_back(one_hot(masks.back()));
    recon.push_back(codec.decode(codec.encode(masks.back())));
  }
  CHECK(codec.loss(fields) == doctest::Approx(mse_field_loss(fields, recon)).epsilon(1e-5));

  ConvAutoencoder sk(tiny(Modality::kSketch), 9);
  sk.set_trained(true);
  const auto s = random_sketch(8, 8, rng);
  const std::vector<ProbabilityField> sf{as_field(s)};
  CHECK(sk.loss(sf) == doctest::Approx(sketch_reconstruction_loss(s, sk.decode(sk.encode(s)))).epsilon(1e-5));
}

TEST_CASE("encode contracts") {
  ConvAutoencoder codec(tiny(Modality::kMask), 1);
  const MaskImage bg(8, 8, 3);
  try {
    codec.encode(bg);
    FAIL("untrained codec must refuse");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNotReady);
  }
  codec.set_trained(true);
  const auto c0 = codec.encode(bg);
  CHECK(c0.dim() == 6);
  CHECK(c0.modality == Modality::kMask);
  CHECK(codec.encode(bg).values == c0.values);

  MaskImage other = bg;
  for (int y = 2; y < 6; ++y)
    for (int x = 2; x < 6; ++x) other.at(y, x) = 2;
  CHECK((codec.encode(other).values - c0.values).norm() > 0.0);

  try {
    codec.encode(MaskImage(17, 31, 3));
    FAIL("shape mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kShapeMismatch);
  }
  CHECK_THROWS_AS(codec.encode(SketchImage(8, 8)), Error);
}

TEST_CASE("decode is total and typed") {
  ConvAutoencoder codec(tiny(Modality::kMask), 1);
  SpatialCode zero{Vec::Zero(6), Modality::kMask};
  const auto f = codec.decode(zero);
  CHECK(f.channels == 3);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) {
        CHECK(std::isfinite(f.at(c, y, x)));
        s += f.at(c, y, x);
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-5));
    }
  SpatialCode sketch_code{Vec::Zero(6), Modality::kSketch};
  CHECK_THROWS_AS(codec.decode(sketch_code), Error);
  CHECK_THROWS_AS(codec.decode(SpatialCode{Vec::Zero(5), Modality::kMask}), Error);
}

TEST_CASE("checkpoint round trip") {
  const auto dir = latentface::testing::scratch_dir("codec_ckpt");
  ConvAutoencoder codec(tiny(Modality::kSketch), 5);
  codec.set_trained(true);
  codec.save(dir / "c.ckpt");
  const auto back = ConvAutoencoder::load(dir / "c.ckpt");
  CHECK(back.trained());
  CHECK(back.config().modality == Modality::kSketch);
  CHECK(back.parameters() == codec.parameters());
  CHECK(back.config().to_json() == codec.config().to_json());

  auto bytes = codec.to_checkpoint().encode();
  bytes.resize(bytes.size() - 4);
  CHECK_THROWS_AS(Checkpoint::decode(bytes, "truncated"), Error);
  Checkpoint wrong = codec.to_checkpoint();
  wrong.kind = "mapping_net";
  CHECK_THROWS_AS(ConvAutoencoder::from_checkpoint(wrong), Error);
}

TEST_CASE("config validation") {
  CodecConfig c = tiny(Modality::kMask);
  c.blocks = 4;  // 8 / 2^4 < 1
  CHECK_THROWS_AS(c.validate(), Error);
  c = tiny(Modality::kMask);
  c.num_classes = 25;
  CHECK_THROWS_AS(c.validate(), Error);
  c = tiny(Modality::kThreeDMM);
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(CodecConfig::from_json(tiny(Modality::kMask).to_json()).to_json() == tiny(Modality::kMask).to_json());
}

TEST_CASE("training overfits a handful of toy masks") {
  auto world = std::make_shared<ToyWorld>(64);
  ToyGenerator gen(world, {});
  const auto samples = sample_toy_world(gen, 8, 3);
  CodecConfig c;
  c.modality = Modality::kMask;
  CodecTrainOptions o;
  o.epochs = 60;
  o.batch_size = 8;
  o.lr = 3e-3;
  const auto fields = codec_inputs(samples, Modality::kMask);
  const auto r = train_codec(c, fields, o);
  CHECK(r.codec.trained());
  CHECK(r.curve.size() == 60);
  CHECK(r.curve.back().train_loss < 0.5 * r.curve.front().train_loss);
  CHECK(codec_accuracy(r.codec, samples) > 0.9);

  o.epochs = 0;
  const auto untouched = train_codec(c, fields, o);
  CHECK(!untouched.codec.trained());
  CHECK(untouched.codec.parameters() == ConvAutoencoder(c, mix_seed(o.seed, 2)).parameters());
}
