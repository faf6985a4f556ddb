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
#include <limits>

#include "doctest.h"
#include "test_util.hpp"

#include "latentface/image_io.hpp"
#include "latentface/trainer.hpp"

using namespace latentface;
using latentface::testing::vec;

namespace {

struct Fixture {
  std::shared_ptr<const ToyWorld> world = std::make_shared<ToyWorld>(64);
  ToyGenerator gen{world, {}};
  SyntheticJointEncoder enc{world, 64, 5};

  std::vector<TrainingPair> corpus(std::size_t n, std::uint64_t seed = 31) const {
    return build_corpus(gen, enc, Modality::kThreeDMM, {}, n, seed);
  }
};

MapperConfig small_3dmm(int layers = 4) {
  MapperConfig c;
  c.num_layers = layers;
  c.hidden_dim = 32;
  c.spatial_dim = kThreeDMMDim;
  c.modality = Modality::kThreeDMM;
  return c;
}

}  // namespace

TEST_CASE("loss hand examples") {
  const LatentCode a{vec({1, 2})}, b{vec({1, 4})};
  CHECK(loss_abs(a, a) == 0.0);
  CHECK(loss_abs(a, b) == 2.0);
  CHECK(loss_dir(LatentCode{vec({1, 0})}, LatentCode{vec({3, 0})}) == 0.0);
  CHECK(loss_dir(LatentCode{vec({1, 0})}, LatentCode{vec({0, 2})}) == 1.0);
  CHECK(loss_dir(LatentCode{vec({1, 0})}, LatentCode{vec({-2, 0})}) == 2.0);
  CHECK_THROWS_AS(loss_dir(LatentCode{vec({0, 0})}, a), Error);
  CHECK_THROWS_AS(loss_abs(a, LatentCode{vec({1, 2, 3})}), Error);

  const std::vector<LatentCode> same{a, b};
  CHECK(loss_total(same, same) == doctest::Approx(0.0).epsilon(1e-12));
  const std::vector<LatentCode> p{LatentCode{vec({1, 1, 0, 0})}}, q{LatentCode{vec({0, 0, 2, 2})}};
  CHECK(loss_total(p, q) == doctest::Approx((1.0 + 1.0 + 4.0 + 4.0) / 4.0 + 10.0));
  CHECK(loss_total(p, q, {0.0}) == 2.5);
  const std::vector<LatentCode> empty;
  CHECK_THROWS_AS(loss_total(empty, empty), Error);
}

TEST_CASE("single pair with abs 2 and dir 1 totals 12") {
  // Orthogonal pair with (a^2 + b^2) / 2 = 2.
  const double r = std::sqrt(2.0);
  const std::vector<LatentCode> w{LatentCode{vec({r, 0})}};
  const std::vector<LatentCode> wh{LatentCode{vec({0, r})}};
  CHECK(loss_abs(w[0], wh[0]) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(loss_dir(w[0], wh[0]) == 1.0);
  CHECK(loss_total(w, wh) == doctest::Approx(12.0).epsilon(1e-15));
}

TEST_CASE("Adam and cosine schedule") {
  Vec x = vec({3.0, -2.0});
  Adam<Vec> opt(2);
  for (int i = 0; i < 2000; ++i) opt.step(x, 2.0 * x, 0.05);
  CHECK(x.norm() < 1e-3);
  CHECK(opt.steps() == 2000);
  CHECK(cosine_lr(1.0, 0, 100) == 1.0);
  CHECK(cosine_lr(1.0, 50, 100) == doctest::Approx(0.5));
  CHECK(cosine_lr(1.0, 100, 100) == doctest::Approx(0.0));
}

TEST_CASE("build_corpus") {
  Fixture f;
  const auto a = f.corpus(64);
  const auto b = f.corpus(64);
  REQUIRE(a.size() == 64);
  CHECK(corpus_digest(std::span<const TrainingPair>(a)) == corpus_digest(std::span<const TrainingPair>(b)));
  CHECK(corpus_digest(std::span<const TrainingPair>(a)) !=
        corpus_digest(std::span<const TrainingPair>(f.corpus(64, 32))));
  CHECK(f.corpus(0).empty());
  CHECK(a[0].f_spatial.dim() == kThreeDMMDim);
  CHECK(a[0].f_img.values.norm() == doctest::Approx(1.0));
  // Mask corpus without a mask codec is refused.
  try {
    build_corpus(f.gen, f.enc, Modality::kMask, {}, 2, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNotReady);
  }
}

TEST_CASE("train_mapper basics") {
  Fixture f;
  const auto corpus = f.corpus(100);
  MapperTrainOptions o;
  o.epochs = 3;
  o.batch_size = 16;
  const auto r = train_mapper(corpus, small_3dmm(), o);
  CHECK(r.val_size == 10);
  CHECK(r.train_size == 90);
  CHECK(r.curve.size() == 3);
  CHECK(r.steps == 3 * 6);
  CHECK(std::isfinite(r.curve.back().val_loss));

  // Same seed, same curve; different seed, different curve.
  const auto again = train_mapper(corpus, small_3dmm(), o);
  for (std::size_t i = 0; i < r.curve.size(); ++i) CHECK(again.curve[i].train_loss == r.curve[i].train_loss);
  CHECK(again.net.parameters() == r.net.parameters());
  o.seed = 2;
  CHECK(train_mapper(corpus, small_3dmm(), o).curve.back().train_loss != r.curve.back().train_loss);

  // pteg changes the conditioning seen in training.
  o.seed = 1;
  o.pteg = false;
  CHECK(train_mapper(corpus, small_3dmm(), o).net.parameters() != r.net.parameters());

  // Step cap.
  o.max_steps = 4;
  CHECK(train_mapper(corpus, small_3dmm(), o).steps == 4);

  // Zero epochs leaves the initialization untouched.
  o.max_steps = -1;
  o.epochs = 0;
  const auto z = train_mapper(corpus, small_3dmm(), o);
  CHECK(z.steps == 0);
  CHECK(z.net.parameters() == MappingNet(small_3dmm(), mix_seed(o.seed, 1)).parameters());
}

TEST_CASE("training reduces the loss") {
  Fixture f;
  const auto corpus = f.corpus(400);
  MapperTrainOptions o;
  o.epochs = 15;
  const auto r = train_mapper(corpus, small_3dmm(), o);
  CHECK(r.curve.back().val_loss < 0.8 * r.curve.front().val_loss);
  const auto terms = evaluate_mapper(r.net, std::span<const TrainingPair>(corpus).subspan(360));
  CHECK(terms.total == doctest::Approx(r.curve.back().val_loss).epsilon(1e-9));
}

TEST_CASE("divergence is reported") {
  Fixture f;
  auto corpus = f.corpus(40);
  for (auto& p : corpus) p.w_gt.values[0] = std::numeric_limits<double>::infinity();
  MapperTrainOptions o;
  o.epochs = 5;
  try {
    train_mapper(corpus, small_3dmm(), o);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDiverged);
  }
}

TEST_CASE("corpus dump and loss csv") {
  Fixture f;
  const auto dir = latentface::testing::scratch_dir("dump");
  const auto samples = sample_toy_world(f.gen, 3, 4);
  dump_corpus(samples, dir);
  const auto man = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
  CHECK(man["records"].size() == 3);
  CHECK(man["num_classes"] == kToyNumClasses);
  const auto& rec = man["records"][1];
  CHECK(io::read_mask_png(dir / rec["mask"].get<std::string>(), kToyNumClasses) == samples[1].mask);
  CHECK(io::read_sketch_png(dir / rec["sketch"].get<std::string>()) == samples[1].sketch);
  const auto wp = read_latent_file(dir / rec["w"].get<std::string>());
  CHECK(wp.layers.row(0).transpose() == samples[1].w.values);
  CHECK(rec["text"] == samples[1].text);

  std::vector<EpochLog> curve(2);
  curve[0].train_loss = 1.5;
  curve[1].epoch = 1;
  write_loss_csv(dir / "loss.csv", curve);
  const auto csv = io::read_text(dir / "loss.csv");
  CHECK(csv.rfind("epoch,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
