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

// Microbenchmarks for the inference path. Weights are seeded, not trained;
// latency does not depend on their values.

#include <benchmark/benchmark.h>

#include <memory>

#include "latentface/pipeline.hpp"

namespace lf = latentface;

namespace {

struct Fixture {
  lf::Pipeline pipeline{lf::default_pipeline_config()};
  lf::ToySample sample;
  lf::SpatialInput spatial;

  Fixture() {
    for (auto m : {lf::Modality::kMask, lf::Modality::kSketch}) {
      lf::CodecConfig cc;
      cc.modality = m;
      cc.base_channels = m == lf::Modality::kMask ? 8 : 16;
      auto codec = std::make_shared<lf::ConvAutoencoder>(cc, 3);
      codec->set_trained(true);
      pipeline.set_codec(codec);
    }
    pipeline.set_mapper(std::make_shared<lf::MappingNet>(lf::MapperConfig{}, 5));
    sample = lf::make_toy_sample(*pipeline.toy_generator(), 99, 0);
    spatial.mask = sample.mask;
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_TextEncode(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(f.pipeline.encoder()->encode_text(f.sample.text));
}
BENCHMARK(BM_TextEncode);

void BM_ImageEncode(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(f.pipeline.encoder()->encode_image(f.sample.image));
}
BENCHMARK(BM_ImageEncode);

void BM_MaskCodecEncode(benchmark::State& state) {
  auto& f = fixture();
  const auto codec = f.pipeline.codec(lf::Modality::kMask);
  for (auto _ : state) benchmark::DoNotOptimize(codec->encode(f.sample.mask));
}
BENCHMARK(BM_MaskCodecEncode);

void BM_SketchCodecEncode(benchmark::State& state) {
  auto& f = fixture();
  const auto codec = f.pipeline.codec(lf::Modality::kSketch);
  for (auto _ : state) benchmark::DoNotOptimize(codec->encode(f.sample.sketch));
}
BENCHMARK(BM_SketchCodecEncode);

void BM_MapperForward(benchmark::State& state) {
  lf::MapperConfig cfg;
  cfg.num_layers = static_cast<int>(state.range(0));
  const lf::MappingNet net(cfg, 5);
  const lf::Mat x = lf::Mat::Random(cfg.in_dim(), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x, lf::MapperMode::kEval));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_MapperForward)->ArgsProduct({{4, 8, 12}, {1, 32}});

void BM_Synthesize(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(f.pipeline.generator()->synthesize(f.sample.w));
}
BENCHMARK(BM_Synthesize);

void BM_Generate(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(f.pipeline.generate(f.sample.text, f.spatial));
}
BENCHMARK(BM_Generate)->Unit(benchmark::kMillisecond);

void BM_TextEdit(benchmark::State& state) {
  auto& f = fixture();
  const auto editor = f.pipeline.editor(lf::Modality::kMask);
  const auto src = lf::ingest_latent(lf::LatentCodePlus::broadcast(f.sample.w, 4), 4, 64);
  const auto code = f.pipeline.encode_spatial(f.spatial);
  // Distinct targets so the direction cache does not short-circuit.
  long i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(editor->edit_text(src, "A photo of a person", "hair_tone=" + std::to_string(i++ % 1000), code));
  }
}
BENCHMARK(BM_TextEdit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
