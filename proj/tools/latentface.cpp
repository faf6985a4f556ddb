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

// latentface command line: training, generation, editing, evaluation,
// benchmarking, corpus dumps and the HTTP service.

#include <cmath>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "latentface/editor.hpp"
#include "latentface/evaluator.hpp"
#include "latentface/image_io.hpp"
#include "latentface/pipeline.hpp"
#include "latentface/service.hpp"
#include "latentface/trainer.hpp"

namespace lf = latentface;
namespace fs = std::filesystem;

namespace {

lf::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

bool on_off(const std::string& v) { return v == "on"; }

nlohmann::json read_json_file(const fs::path& path) {
  try {
    return nlohmann::json::parse(lf::io::read_text(path));
  } catch (const nlohmann::json::exception& e) {
    lf::fail(lf::ErrorKind::kIo, path.string() + ": " + e.what());
  }
}

void log_epoch(const char* what, const lf::EpochLog& e) {
  if (std::isnan(e.val_loss)) {
    std::fprintf(stderr, "[%s] epoch %d step %ld loss %.6f\n", what, e.epoch, e.step, e.train_loss);
  } else {
    std::fprintf(stderr, "[%s] epoch %d step %ld loss %.6f val %.6f\n", what, e.epoch, e.step, e.train_loss,
                 e.val_loss);
  }
}

lf::SpatialInput read_spatial(const std::string& mask, const std::string& sketch, const std::string& threedmm) {
  lf::SpatialInput s;
  if (!mask.empty()) s.mask = lf::io::read_mask(mask, lf::kToyNumClasses);
  if (!sketch.empty()) s.sketch = lf::io::read_sketch_png(sketch);
  if (!threedmm.empty()) s.threedmm = lf::read_3dmm(threedmm);
  s.modality();  // exactly one
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latentface: multimodal face generation and latent editing"};
  app.require_subcommand(1);
  std::string run_dir = "run";

  // train-codec
  auto* train_codec = app.add_subcommand("train-codec", "train the mask or sketch autoencoder");
  std::string codec_modality = "mask";
  int codec_epochs = -1, codec_samples = -1;
  train_codec->add_option("--run-dir", run_dir, "run directory")->capture_default_str();
  train_codec->add_option("--modality", codec_modality, "mask or sketch")
      ->check(CLI::IsMember({"mask", "sketch"}))
      ->capture_default_str();
  train_codec->add_option("--epochs", codec_epochs, "override the configured epoch count");
  train_codec->add_option("--samples", codec_samples, "override the configured corpus size");

  // train-mapper
  auto* train_mapper = app.add_subcommand("train-mapper", "train the mapping network");
  std::string mapper_modality = "mask", pteg = "on", bn = "off", dropout = "off";
  int layers = 12, mapper_epochs = -1, mapper_samples = -1;
  train_mapper->add_option("--run-dir", run_dir, "run directory")->capture_default_str();
  train_mapper->add_option("--modality", mapper_modality, "mask, sketch or 3dmm")
      ->check(CLI::IsMember({"mask", "sketch", "3dmm", "threedmm"}))
      ->capture_default_str();
  train_mapper->add_option("--layers", layers, "fully connected layers")
      ->check(CLI::IsMember({4, 8, 12}))
      ->capture_default_str();
  train_mapper->add_option("--pteg", pteg, "pseudo text embeddings")->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  train_mapper->add_option("--bn", bn, "batch norm")->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  train_mapper->add_option("--dropout", dropout, "dropout")->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  train_mapper->add_option("--epochs", mapper_epochs, "override the configured epoch count");
  train_mapper->add_option("--samples", mapper_samples, "override the configured corpus size");

  // generate
  auto* generate = app.add_subcommand("generate", "generate an image from text plus one spatial condition");
  std::string text, mask, sketch, threedmm, out = "out.png", latent_out, manifest, out_dir;
  generate->add_option("--run-dir", run_dir, "trained run directory")->capture_default_str();
  generate->add_option("--text", text, "conditioning text");
  generate->add_option("--mask", mask, "mask (paletted PNG or grid file)");
  generate->add_option("--sketch", sketch, "sketch PNG");
  generate->add_option("--threedmm", threedmm, "159 3DMM parameters (text or binary)");
  generate->add_option("--out", out, "output PNG")->capture_default_str();
  generate->add_option("--latent-out", latent_out, "write the predicted w here");
  generate->add_option("--manifest", manifest, "batch mode: generate every record of a corpus manifest");
  generate->add_option("--out-dir", out_dir, "batch mode output directory (<id>.png)");

  // edit
  auto* edit = app.add_subcommand("edit", "edit a latent with a text or spatial direction");
  std::string latent_in, pivot = std::string(lf::kDefaultPivotText), target, sp_target, sp_pivot;
  double beta = 1.0;
  edit->add_option("--run-dir", run_dir, "trained run directory")->capture_default_str();
  edit->add_option("--latent", latent_in, "source latent file (L x D_w or 1 x D_w)")->required();
  edit->add_option("--pivot", pivot, "pivot text")->capture_default_str();
  edit->add_option("--target", target, "target text");
  edit->add_option("--mask", mask, "spatial condition for a text edit (mask)");
  edit->add_option("--sketch", sketch, "spatial condition for a text edit (sketch)");
  edit->add_option("--threedmm", threedmm, "spatial condition for a text edit (3DMM)");
  edit->add_option("--spatial-target", sp_target, "target mask for a spatial edit");
  edit->add_option("--spatial-pivot", sp_pivot, "pivot mask for a spatial edit");
  edit->add_option("--beta", beta, "edit strength")->capture_default_str();
  edit->add_option("--out", out, "output PNG")->capture_default_str();
  edit->add_option("--latent-out", latent_out, "write the edited w+ here");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "clip score, mask accuracy and cmmd over a generated set");
  std::string generated_dir, gt_manifest, report = "report.json";
  evaluate->add_option("--run-dir", run_dir, "run directory (encoder and parser config)")->capture_default_str();
  evaluate->add_option("--generated-dir", generated_dir, "directory of <id>.png")->required();
  evaluate->add_option("--gt-manifest", gt_manifest, "manifest.json from dump-corpus")->required();
  evaluate->add_option("--out", report, "report path")->capture_default_str();

  // bench
  auto* bench = app.add_subcommand("bench", "mean latency of text + mask -> image");
  int runs = 100;
  std::string bench_out;
  bench->add_option("--run-dir", run_dir, "trained run directory")->capture_default_str();
  bench->add_option("--runs", runs, "timed runs")->capture_default_str();
  bench->add_option("--out", bench_out, "write the report as JSON");

  // dump-corpus
  auto* dump = app.add_subcommand("dump-corpus", "write toy-world records to a directory");
  std::size_t n = 200;
  std::uint64_t seed = 41, first = 0;
  std::string dump_dir = "corpus";
  dump->add_option("--out", dump_dir, "output directory")->capture_default_str();
  dump->add_option("-n,--count", n, "records")->capture_default_str();
  dump->add_option("--seed", seed, "sampling seed")->capture_default_str();
  dump->add_option("--first-index", first, "index of the first record")->capture_default_str();
  dump->add_option("--run-dir", run_dir, "run directory whose generator config to use");

  // serve
  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  std::string runs_dir, host;
  int port = -1;
  serve->add_option("--run-dir", run_dir, "trained run directory")->capture_default_str();
  serve->add_option("--runs-dir", runs_dir, "where request artifacts are persisted");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port (LATENTFACE_PORT overrides the config file)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_codec) {
      nlohmann::json ov = nlohmann::json::object();
      if (codec_epochs >= 0) ov["training"]["codec"]["epochs"] = codec_epochs;
      if (codec_samples >= 0) ov["training"]["codec"]["samples"] = codec_samples;
      const auto m = lf::parse_modality(codec_modality);
      auto r = lf::train_codec_run(run_dir, m, ov, [](const lf::EpochLog& e) { log_epoch("codec", e); });
      const auto p = lf::Pipeline::load(run_dir);
      const auto check = lf::sample_toy_world(*p.toy_generator(), 100, 0xC0DE, 2'000'000'000ULL);
      std::printf("%s codec: final loss %.4f, held-out pixel accuracy %.4f -> %s\n", codec_modality.c_str(),
                  r.curve.empty() ? 0.0 : r.curve.back().train_loss, lf::codec_accuracy(r.codec, check),
                  lf::codec_checkpoint_path(run_dir, m).c_str());
    } else if (*train_mapper) {
      nlohmann::json ov = nlohmann::json::object();
      ov["mapper"]["num_layers"] = layers;
      ov["mapper"]["use_bn"] = on_off(bn);
      ov["mapper"]["use_dropout"] = on_off(dropout);
      ov["training"]["mapper"]["pteg"] = on_off(pteg);
      if (mapper_epochs >= 0) ov["training"]["mapper"]["epochs"] = mapper_epochs;
      if (mapper_samples >= 0) ov["training"]["mapper"]["samples"] = mapper_samples;
      const auto m = lf::parse_modality(mapper_modality);
      auto r = lf::train_mapper_run(run_dir, m, ov, [](const lf::EpochLog& e) { log_epoch("mapper", e); });
      const auto& last = r.curve.back();
      std::printf("mapper (%d layers, pteg %s, bn %s, dropout %s): train %.4f val %.4f after %ld steps -> %s\n", layers,
                  pteg.c_str(), bn.c_str(), dropout.c_str(), last.train_loss, last.val_loss, r.steps,
                  lf::mapper_checkpoint_path(run_dir, m).c_str());
    } else if (*generate) {
      const auto p = lf::Pipeline::load(run_dir);
      if (!manifest.empty()) {
        lf::require(!out_dir.empty(), lf::ErrorKind::kInvalidArgument, "--manifest needs --out-dir");
        const auto man = read_json_file(manifest);
        const fs::path root = fs::path(manifest).parent_path();
        std::size_t count = 0;
        for (const auto& rec : man.at("records")) {
          lf::SpatialInput s;
          s.mask = lf::io::read_mask(root / rec.at("mask").get<std::string>(), lf::kToyNumClasses);
          const auto r = p.generate(rec.at("text").get<std::string>(), s);
          lf::io::write_png(fs::path(out_dir) / (std::to_string(rec.at("id").get<std::uint64_t>()) + ".png"),
                            r.image.image);
          ++count;
        }
        std::printf("generated %zu images into %s\n", count, out_dir.c_str());
      } else {
        lf::require(!text.empty(), lf::ErrorKind::kInvalidArgument, "--text is required");
        const auto r = p.generate(text, read_spatial(mask, sketch, threedmm));
        lf::io::write_png(out, r.image.image);
        if (!latent_out.empty()) {
          lf::write_latent_file(latent_out, lf::LatentCodePlus::broadcast(r.w, p.generator()->num_layers()),
                                lf::LatentDType::kFloat64);
        }
        std::printf("wrote %s\n", out.c_str());
      }
    } else if (*edit) {
      const auto p = lf::Pipeline::load(run_dir);
      const auto src = lf::ingest_latent_file(latent_in, p.generator()->num_layers(), p.generator()->latent_dim());
      const bool text_edit = !target.empty();
      const bool spatial_edit = !sp_target.empty() || !sp_pivot.empty();
      lf::require(text_edit != spatial_edit, lf::ErrorKind::kInvalidArgument,
                  "give either --target (text edit) or --spatial-target and --spatial-pivot (spatial edit)");
      lf::GeneratedImage img;
      lf::LatentCodePlus edited;
      if (text_edit) {
        const auto spatial = read_spatial(mask, sketch, threedmm);
        const auto editor = p.editor(spatial.modality());
        const auto dir = editor->text_direction(pivot, target, p.encode_spatial(spatial));
        edited = lf::apply_edit(src, dir, beta);
      } else {
        lf::require(!sp_target.empty() && !sp_pivot.empty(), lf::ErrorKind::kInvalidArgument,
                    "a spatial edit needs --spatial-target and --spatial-pivot");
        lf::SpatialInput tar, piv;
        tar.mask = lf::io::read_mask(sp_target, lf::kToyNumClasses);
        piv.mask = lf::io::read_mask(sp_pivot, lf::kToyNumClasses);
        const auto editor = p.editor(lf::Modality::kMask);
        const auto f_img = p.encoder()->encode_image(p.generator()->synthesize_plus(src.wp_src).image);
        const auto dir = editor->spatial_direction(f_img, p.encode_spatial(tar), p.encode_spatial(piv));
        edited = lf::apply_edit(src, dir, beta);
      }
      img = p.generator()->synthesize_plus(edited);
      lf::io::write_png(out, img.image);
      if (!latent_out.empty()) lf::write_latent_file(latent_out, edited, lf::LatentDType::kFloat64);
      std::printf("wrote %s\n", out.c_str());
    } else if (*evaluate) {
      const lf::Pipeline p(fs::exists(fs::path(run_dir) / "config.json") ? read_json_file(fs::path(run_dir) / "config.json")
                                                                          : lf::default_pipeline_config());
      lf::CmmdOptions co;
      const auto& c = p.config().at("cmmd");
      co.sigma = c.value("sigma", co.sigma);
      co.scale = c.value("scale", co.scale);
      co.unbiased = c.value("unbiased", co.unbiased);
      const auto r = lf::evaluate_directory(generated_dir, gt_manifest, *p.encoder(), p.parser(), co);
      lf::io::write_text(report, r.to_json().dump(2));
      std::printf("clip %.2f%%  mask %.2f%%  cmmd %.4f  (n=%zu) -> %s\n", r.clip_score_pct, r.mask_accuracy_pct, r.cmmd,
                  r.n_samples, report.c_str());
    } else if (*bench) {
      const auto p = lf::Pipeline::load(run_dir);
      const auto sample = lf::make_toy_sample(*p.toy_generator(), 0xBE7C, 0);
      lf::SpatialInput s;
      s.mask = sample.mask;
      const auto r = lf::speed_bench([&] { (void)p.generate(sample.text, s); }, runs);
      const auto j = r.to_json();
      if (!bench_out.empty()) lf::io::write_text(bench_out, j.dump(2));
      std::printf("text+mask -> image: mean %.3f ms over %d runs (sd %.3f, cv %.3f, min %.3f, max %.3f)\nhardware: %s\n",
                  r.mean_ms, r.runs, r.stddev_ms, r.cv, r.min_ms, r.max_ms, r.hardware.c_str());
    } else if (*dump) {
      const auto config = fs::exists(fs::path(run_dir) / "config.json") ? read_json_file(fs::path(run_dir) / "config.json")
                                                                         : lf::default_pipeline_config();
      const lf::Pipeline p(config);
      const auto samples = lf::sample_toy_world(*p.toy_generator(), n, seed, first);
      lf::dump_corpus(samples, dump_dir);
      std::printf("wrote %zu records to %s (digest %s)\n", samples.size(), dump_dir.c_str(),
                  lf::to_hex(lf::corpus_digest(samples)).c_str());
    } else if (*serve) {
      nlohmann::json cfg = lf::default_pipeline_config().at("service");
      const auto cfg_path = fs::path(run_dir) / "config.json";
      if (fs::exists(cfg_path)) cfg.merge_patch(read_json_file(cfg_path).value("service", nlohmann::json::object()));
      if (!host.empty()) cfg["host"] = host;
      if (port >= 0) cfg["port"] = port;
      if (!runs_dir.empty()) cfg["runs_dir"] = runs_dir;
      cfg["model_dir"] = run_dir;
      lf::Service service(lf::ServiceConfig::from_json(cfg));
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::thread loader([&] {
        try {
          service.load_models();
          std::fprintf(stderr, "models loaded from %s\n", run_dir.c_str());
        } catch (const std::exception& e) {
          std::fprintf(stderr, "model load failed: %s\n", e.what());
        }
      });
      std::fprintf(stderr, "serving on %s:%d\n", service.config().host.c_str(), service.config().port);
      service.serve();
      loader.join();
      g_service = nullptr;
    }
  } catch (const lf::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
