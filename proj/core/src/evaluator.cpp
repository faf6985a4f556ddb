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

#include "latentface/evaluator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include "latentface/image_io.hpp"

namespace latentface {
namespace {

Mat stack(std::span<const EmbeddingVector> v) {
  Mat m(v.front().dim(), static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(v[i].dim() == m.rows(), ErrorKind::kShapeMismatch, "embedding sets mix dimensions");
    m.col(static_cast<Eigen::Index>(i)) = v[i].values;
  }
  return m;
}

double rbf(const Mat& x, Eigen::Index i, const Mat& y, Eigen::Index j, double inv_two_sigma2) {
  return std::exp(-(x.col(i) - y.col(j)).squaredNorm() * inv_two_sigma2);
}

// Sum of k(x_i, x_j) over all pairs of one set, optionally without the diagonal.
double within_sum(const Mat& x, double g, bool skip_diag) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    if (!skip_diag) s += 1.0;  // k(x, x)
    for (Eigen::Index j = i + 1; j < x.cols(); ++j) s += 2.0 * rbf(x, i, x, j, g);
  }
  return s;
}

}  // namespace

double clip_score(const EmbeddingVector& image_embedding, const EmbeddingVector& text_embedding) {
  return 100.0 * cosine(image_embedding, text_embedding);
}

double clip_score(const RgbImage& image, std::string_view text, const JointEncoder* encoder) {
  require(encoder != nullptr, ErrorKind::kNotReady, "clip score needs a joint encoder");
  return clip_score(encoder->encode_image(image), encoder->encode_text(text));
}

double mask_accuracy(const MaskImage& generated, const MaskImage& gt) {
  require(generated.height == gt.height && generated.width == gt.width, ErrorKind::kShapeMismatch,
          "mask shapes differ: " + std::to_string(generated.height) + "x" + std::to_string(generated.width) + " vs " +
              std::to_string(gt.height) + "x" + std::to_string(gt.width));
  require(gt.size() > 0, ErrorKind::kInvalidArgument, "empty mask");
  std::size_t same = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) same += generated.labels[i] == gt.labels[i];
  return 100.0 * static_cast<double>(same) / static_cast<double>(gt.size());
}

double cmmd(std::span<const EmbeddingVector> a, std::span<const EmbeddingVector> b, const CmmdOptions& options) {
  require(a.size() >= 2 && b.size() >= 2, ErrorKind::kInvalidArgument, "cmmd needs at least two embeddings per set");
  require(options.sigma > 0.0, ErrorKind::kInvalidArgument, "cmmd bandwidth must be positive");
  require(a.front().dim() == b.front().dim(), ErrorKind::kShapeMismatch, "cmmd sets have different dimensions");
  const Mat x = stack(a), y = stack(b);
  const double g = 1.0 / (2.0 * options.sigma * options.sigma);
  const double n = static_cast<double>(x.cols()), m = static_cast<double>(y.cols());

  double kxx, kyy;
  if (options.unbiased) {
    kxx = within_sum(x, g, true) / (n * (n - 1.0));
    kyy = within_sum(y, g, true) / (m * (m - 1.0));
  } else {
    kxx = within_sum(x, g, false) / (n * n);
    kyy = within_sum(y, g, false) / (m * m);
  }
  // Cross term accumulated in both loop orders so swapping the sets gives the
  // bit-identical result.
  double by_row = 0.0, by_col = 0.0;
  for (Eigen::Index i = 0; i < x.cols(); ++i)
    for (Eigen::Index j = 0; j < y.cols(); ++j) by_row += rbf(x, i, y, j, g);
  for (Eigen::Index j = 0; j < y.cols(); ++j)
    for (Eigen::Index i = 0; i < x.cols(); ++i) by_col += rbf(x, i, y, j, g);
  const double kxy = (by_row + by_col) / (2.0 * n * m);
  return options.scale * ((kxx + kyy) - 2.0 * kxy);
}

double cmmd(std::span<const RgbImage> a, std::span<const RgbImage> b, const JointEncoder& encoder,
            const CmmdOptions& options) {
  std::vector<EmbeddingVector> ea, eb;
  for (const auto& im : a) ea.push_back(encoder.encode_image(im));
  for (const auto& im : b) eb.push_back(encoder.encode_image(im));
  return cmmd(ea, eb, options);
}

nlohmann::json SpeedReport::to_json() const {
  return {{"runs", runs},     {"mean_ms", mean_ms}, {"stddev_ms", stddev_ms}, {"cv", cv},
          {"min_ms", min_ms}, {"max_ms", max_ms},   {"hardware", hardware}};
}

std::string hardware_descriptor() {
  std::string cpu = "unknown cpu";
  std::ifstream in("/proc/cpuinfo");
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(colon + 2);
      break;
    }
  }
  std::string out = cpu + "; threads=" + std::to_string(std::thread::hardware_concurrency());
#if defined(__clang__)
  out += "; clang " + std::string(__clang_version__);
#elif defined(__GNUC__)
  out += "; gcc " + std::string(__VERSION__);
#endif
#if defined(__AVX512F__)
  out += "; avx512";
#elif defined(__AVX2__)
  out += "; avx2";
#endif
  return out;
}

SpeedReport speed_bench(const std::function<void()>& fn, int runs, int warmup) {
  require(runs >= 1, ErrorKind::kInvalidArgument, "speed bench needs at least one run");
  for (int i = 0; i < warmup; ++i) fn();
  std::vector<double> ms(static_cast<std::size_t>(runs));
  for (auto& t : ms) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    t = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  SpeedReport r;
  r.runs = runs;
  double sum = 0.0;
  for (double t : ms) sum += t;
  r.mean_ms = sum / runs;
  double var = 0.0;
  for (double t : ms) var += (t - r.mean_ms) * (t - r.mean_ms);
  r.stddev_ms = runs > 1 ? std::sqrt(var / (runs - 1)) : 0.0;
  r.cv = r.mean_ms > 0.0 ? r.stddev_ms / r.mean_ms : 0.0;
  r.min_ms = *std::min_element(ms.begin(), ms.end());
  r.max_ms = *std::max_element(ms.begin(), ms.end());
  r.hardware = hardware_descriptor();
  return r;
}

std::unique_ptr<FaceParser> make_face_parser(const nlohmann::json& config, std::shared_ptr<const ToyWorld> world) {
  const std::string adapter = config.value("adapter", "toy");
  if (adapter == "toy") {
    require(world != nullptr, ErrorKind::kNotReady, "toy parser needs a toy world");
    return std::make_unique<ToyFaceParser>(std::move(world));
  }
  fail(ErrorKind::kUnsupported, "no face parser adapter named '" + adapter +
                                    "' is available; real photos need an external parser that emits "
                                    "label grids with fewer than 19 classes");
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j = {{"schema", kSchema},
                      {"version", kVersion},
                      {"clip_score_pct", clip_score_pct},
                      {"mask_accuracy_pct", mask_accuracy_pct},
                      {"cmmd", cmmd},
                      {"cmmd_raw", cmmd_raw},
                      {"n_samples", n_samples},
                      {"config_digest", config_digest}};
  j["speed_ms"] = speed_ms ? nlohmann::json(*speed_ms) : nlohmann::json(nullptr);
  return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  require(j.value("schema", std::string()) == kSchema, ErrorKind::kIo, "not an evaluation report");
  require(j.value("version", 0) == kVersion, ErrorKind::kIo, "unsupported evaluation report version");
  EvalReport r;
  r.clip_score_pct = j.at("clip_score_pct").get<double>();
  r.mask_accuracy_pct = j.at("mask_accuracy_pct").get<double>();
  r.cmmd = j.at("cmmd").get<double>();
  r.cmmd_raw = j.at("cmmd_raw").get<double>();
  if (!j.at("speed_ms").is_null()) r.speed_ms = j.at("speed_ms").get<double>();
  r.n_samples = j.at("n_samples").get<std::size_t>();
  r.config_digest = j.value("config_digest", std::string());
  return r;
}

EvalReport evaluate(std::span<const EvalSample> samples, const JointEncoder& encoder, const FaceParser& parser,
                    const CmmdOptions& options) {
  require(samples.size() >= 2, ErrorKind::kInvalidArgument, "evaluation needs at least two samples");
  EvalReport r;
  std::vector<EmbeddingVector> gen, real;
  Digest cfg;
  cfg.str(encoder.name()).pod(encoder.space_id()).str(parser.name()).pod(options.sigma).pod(options.scale).pod(
      options.unbiased);
  for (const auto& s : samples) {
    gen.push_back(encoder.encode_image(s.generated));
    real.push_back(encoder.encode_image(s.real));
    r.clip_score_pct += clip_score(gen.back(), encoder.encode_text(s.text));
    r.mask_accuracy_pct += mask_accuracy(parser.parse(s.generated), s.gt_mask);
  }
  const double n = static_cast<double>(samples.size());
  r.clip_score_pct /= n;
  r.mask_accuracy_pct /= n;
  r.cmmd_raw = cmmd(gen, real, options);
  r.cmmd = std::max(0.0, r.cmmd_raw);
  r.n_samples = samples.size();
  r.config_digest = cfg.hex();
  return r;
}

EvalReport evaluate_directory(const std::filesystem::path& generated_dir, const std::filesystem::path& gt_manifest,
                              const JointEncoder& encoder, const FaceParser& parser, const CmmdOptions& options) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(io::read_text(gt_manifest));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kIo, gt_manifest.string() + ": " + e.what());
  }
  const auto root = gt_manifest.parent_path();
  std::vector<EvalSample> samples;
  for (const auto& rec : manifest.at("records")) {
    const std::string id = rec.at("id").is_string() ? rec.at("id").get<std::string>()
                                                     : std::to_string(rec.at("id").get<std::uint64_t>());
    EvalSample s;
    s.generated = io::read_png(generated_dir / (id + ".png"));
    s.real = io::read_png(root / rec.at("image").get<std::string>());
    s.gt_mask = io::read_mask(root / rec.at("mask").get<std::string>(), parser.num_classes());
    s.text = rec.at("text").get<std::string>();
    samples.push_back(std::move(s));
  }
  return evaluate(samples, encoder, parser, options);
}

}  // namespace latentface
