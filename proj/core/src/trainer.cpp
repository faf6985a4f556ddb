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

#include "latentface/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>

#include "latentface/image_io.hpp"

namespace latentface {
namespace {

std::size_t holdout_size(std::size_t n, double fraction) {
  if (n < 2 || fraction <= 0.0) return 0;
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  return std::min(k, n - 1);
}

void check_pair(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), ErrorKind::kShapeMismatch,
          "latent dimensions differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
}

}  // namespace

double loss_abs(const LatentCode& w, const LatentCode& w_hat) {
  check_pair(w.values, w_hat.values);
  require(w.dim() > 0, ErrorKind::kInvalidArgument, "empty latent");
  return (w.values - w_hat.values).squaredNorm() / static_cast<double>(w.dim());
}

double loss_dir(const LatentCode& w, const LatentCode& w_hat) {
  check_pair(w.values, w_hat.values);
  return 1.0 - cosine(w.values, w_hat.values);
}

double loss_total(std::span<const LatentCode> w, std::span<const LatentCode> w_hat, LossWeights weights) {
  require(!w.empty(), ErrorKind::kInvalidArgument, "loss of an empty batch");
  require(w.size() == w_hat.size(), ErrorKind::kInvalidArgument, "target and prediction batches differ in size");
  double a = 0.0, d = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    a += loss_abs(w[i], w_hat[i]);
    d += loss_dir(w[i], w_hat[i]);
  }
  const double n = static_cast<double>(w.size());
  return a / n + weights.lambda_dir * d / n;
}

LossTerms loss_batch(const Mat& w, const Mat& w_hat, LossWeights weights, Mat* grad) {
  require(w.cols() >= 1, ErrorKind::kInvalidArgument, "loss of an empty batch");
  require(w.rows() == w_hat.rows() && w.cols() == w_hat.cols(), ErrorKind::kShapeMismatch,
          "target and prediction batches differ in shape");
  const double n = static_cast<double>(w.cols());
  const double d = static_cast<double>(w.rows());
  LossTerms t;
  if (grad) grad->resize(w.rows(), w.cols());
  for (Eigen::Index b = 0; b < w.cols(); ++b) {
    const auto y = w.col(b);
    const auto p = w_hat.col(b);
    const Vec diff = p - y;
    t.abs += diff.squaredNorm() / d;
    const double ny = y.norm(), np = p.norm();
    if (!(ny > 0.0 && np > 0.0)) {
      t.dir = std::nan("");
      if (grad) grad->col(b).setZero();
      continue;
    }
    const double c = y.dot(p) / (ny * np);
    t.dir += 1.0 - c;
    if (grad) {
      grad->col(b) = diff * (2.0 / (d * n));
      grad->col(b) -= (weights.lambda_dir / n) * (y / (ny * np) - c * p / (np * np));
    }
  }
  t.abs /= n;
  t.dir /= n;
  t.total = t.abs + weights.lambda_dir * t.dir;
  return t;
}

ToySample make_toy_sample(const ToyGenerator& gen, std::uint64_t seed, std::uint64_t index) {
  ToySample s;
  s.id = index;
  LatentSample ls = gen.sample_z_to_w(mix_seed(seed, index));
  s.z = std::move(ls.z);
  s.w = std::move(ls.w);
  s.attrs = gen.attributes_of(s.w);
  s.image = std::move(ls.image.image);
  s.mask = gen.world().render_mask(s.attrs);
  s.sketch = ToyWorld::sketch(s.mask);
  s.params = gen.world().threedmm(s.attrs);
  s.text = ToyWorld::describe(s.attrs);
  return s;
}

std::vector<ToySample> sample_toy_world(const ToyGenerator& gen, std::size_t n, std::uint64_t seed,
                                        std::uint64_t first_index) {
  std::vector<ToySample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(make_toy_sample(gen, seed, first_index + i));
  return out;
}

SpatialCode encode_spatial(const ToySample& sample, Modality modality, const SpatialEncoders& encoders) {
  switch (modality) {
    case Modality::kMask:
      require(encoders.mask != nullptr, ErrorKind::kNotReady, "no mask codec bound");
      return encoders.mask->encode(sample.mask);
    case Modality::kSketch:
      require(encoders.sketch != nullptr, ErrorKind::kNotReady, "no sketch codec bound");
      return encoders.sketch->encode(sample.sketch);
    case Modality::kThreeDMM:
      return pack_3dmm(sample.params);
  }
  fail(ErrorKind::kInvalidArgument, "unknown modality");
}

std::vector<TrainingPair> build_corpus(std::span<const ToySample> samples, const JointEncoder& encoder,
                                       Modality modality, const SpatialEncoders& encoders) {
  std::vector<TrainingPair> out;
  out.reserve(samples.size());
  if (samples.empty()) return out;

  // Codes in batches; per-sample encode would redo the setup each time.
  std::vector<SpatialCode> codes;
  if (modality == Modality::kThreeDMM) {
    for (const auto& s : samples) codes.push_back(pack_3dmm(s.params));
  } else {
    const ConvAutoencoder* codec = modality == Modality::kMask ? encoders.mask : encoders.sketch;
    require(codec != nullptr, ErrorKind::kNotReady,
            std::string("no ") + std::string(modality_name(modality)) + " codec bound");
    constexpr std::size_t kChunk = 64;
    for (std::size_t i = 0; i < samples.size(); i += kChunk) {
      const auto fields = codec_inputs(samples.subspan(i, std::min(kChunk, samples.size() - i)), modality);
      for (auto& c : codec->encode_batch(fields)) codes.push_back(std::move(c));
    }
  }
  for (std::size_t i = 0; i < samples.size(); ++i)
    out.push_back({encoder.encode_image(samples[i].image), std::move(codes[i]), samples[i].w, samples[i].id});
  return out;
}

std::vector<TrainingPair> build_corpus(const ToyGenerator& gen, const JointEncoder& encoder, Modality modality,
                                       const SpatialEncoders& encoders, std::size_t n, std::uint64_t seed) {
  const auto samples = sample_toy_world(gen, n, seed);
  return build_corpus(samples, encoder, modality, encoders);
}

std::uint64_t corpus_digest(std::span<const TrainingPair> corpus) {
  Digest d;
  d.pod(static_cast<std::uint64_t>(corpus.size()));
  for (const auto& p : corpus) {
    d.pod(p.source_id);
    d.span(std::span<const double>(p.f_img.values.data(), static_cast<std::size_t>(p.f_img.values.size())));
    d.span(std::span<const double>(p.f_spatial.values.data(), static_cast<std::size_t>(p.f_spatial.values.size())));
    d.span(std::span<const double>(p.w_gt.values.data(), static_cast<std::size_t>(p.w_gt.values.size())));
  }
  return d.value();
}

std::uint64_t corpus_digest(std::span<const ToySample> samples) {
  Digest d;
  d.pod(static_cast<std::uint64_t>(samples.size()));
  for (const auto& s : samples) {
    d.pod(s.id).pod(s.image.digest()).pod(s.mask.digest()).pod(s.sketch.digest()).str(s.text);
    d.span(std::span<const double>(s.w.values.data(), static_cast<std::size_t>(s.w.values.size())));
  }
  return d.value();
}

void dump_corpus(std::span<const ToySample> samples, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json records = nlohmann::json::array();
  for (const auto& s : samples) {
    const std::string id = std::to_string(s.id);
    const std::string image = "images/" + id + ".png";
    const std::string mask = "masks/" + id + ".png";
    const std::string sketch = "sketches/" + id + ".png";
    const std::string params = "threedmm/" + id + ".txt";
    const std::string latent = "latents/" + id + ".lflt";
    io::write_png(dir / image, s.image);
    io::write_mask_png(dir / mask, s.mask, ToyWorld::palette());
    io::write_sketch_png(dir / sketch, s.sketch);
    write_3dmm_text(dir / params, s.params);
    LatentCodePlus wp;
    wp.layers = s.w.values.transpose();
    write_latent_file(dir / latent, wp, LatentDType::kFloat64);
    nlohmann::json attrs;
    for (int k = 0; k < kNumAttrs; ++k) attrs[std::string(attr_key(static_cast<Attr>(k)))] = s.attrs.u[k];
    records.push_back({{"id", s.id},         {"text", s.text},     {"image", image}, {"mask", mask},
                       {"sketch", sketch},   {"threedmm", params}, {"w", latent},    {"attributes", attrs}});
  }
  nlohmann::json manifest = {{"version", 1},
                             {"num_classes", kToyNumClasses},
                             {"class_names", ToyWorld::class_names()},
                             {"corpus_digest", to_hex(corpus_digest(samples))},
                             {"records", records}};
  io::write_text(dir / "manifest.json", manifest.dump(2));
}

double cosine_lr(double base, long step, long total) {
  if (total <= 0) return base;
  const double t = std::clamp(static_cast<double>(step) / static_cast<double>(total), 0.0, 1.0);
  return base * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

void write_loss_csv(const std::filesystem::path& path, std::span<const EpochLog> curve) {
  std::string out = "epoch,step,train_loss,train_abs,train_dir,val_loss,val_abs,val_dir\n";
  char buf[256];
  for (const auto& e : curve) {
    std::snprintf(buf, sizeof(buf), "%d,%ld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", e.epoch, e.step, e.train_loss,
                  e.train_abs, e.train_dir, e.val_loss, e.val_abs, e.val_dir);
    out += buf;
  }
  io::write_text(path, out);
}

LossTerms evaluate_mapper(const MappingNet& net, std::span<const TrainingPair> corpus, LossWeights weights) {
  require(!corpus.empty(), ErrorKind::kInvalidArgument, "cannot evaluate on an empty corpus");
  const int d = net.config().out_dim;
  LossTerms sum;
  constexpr std::size_t kChunk = 256;
  for (std::size_t i = 0; i < corpus.size(); i += kChunk) {
    const std::size_t m = std::min(kChunk, corpus.size() - i);
    std::vector<EmbeddingVector> f;
    std::vector<SpatialCode> s;
    Mat w(d, static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
      f.push_back(corpus[i + j].f_img);
      s.push_back(corpus[i + j].f_spatial);
      w.col(static_cast<Eigen::Index>(j)) = corpus[i + j].w_gt.values;
    }
    const LossTerms t = loss_batch(w, net.forward(net.pack(f, s), MapperMode::kEval), weights);
    sum.abs += t.abs * static_cast<double>(m);
    sum.dir += t.dir * static_cast<double>(m);
  }
  const double n = static_cast<double>(corpus.size());
  sum.abs /= n;
  sum.dir /= n;
  sum.total = sum.abs + weights.lambda_dir * sum.dir;
  return sum;
}

MapperTrainResult train_mapper(std::span<const TrainingPair> corpus, const MapperConfig& config,
                               const MapperTrainOptions& options) {
  require(!corpus.empty(), ErrorKind::kInvalidArgument, "cannot train a mapper on an empty corpus");
  require(options.batch_size >= 1, ErrorKind::kInvalidArgument, "batch size must be positive");
  require(options.weights.lambda_dir >= 0.0, ErrorKind::kInvalidArgument, "lambda_dir must be non-negative");
  MapperTrainResult result{MappingNet(config, mix_seed(options.seed, 1)), {}, 0, 0, 0};
  MappingNet& net = result.net;

  const std::size_t n_val = holdout_size(corpus.size(), options.val_fraction);
  const std::size_t n_train = corpus.size() - n_val;
  const auto train = corpus.subspan(0, n_train);
  const auto val = corpus.subspan(n_train);
  result.train_size = n_train;
  result.val_size = n_val;

  // Validate shapes once up front.
  Mat inputs(config.in_dim(), static_cast<Eigen::Index>(n_train));
  Mat targets(config.out_dim, static_cast<Eigen::Index>(n_train));
  for (std::size_t i = 0; i < n_train; ++i) {
    inputs.col(static_cast<Eigen::Index>(i)) = net.pack(std::span(&train[i].f_img, 1), std::span(&train[i].f_spatial, 1));
    require(train[i].w_gt.dim() == config.out_dim, ErrorKind::kShapeMismatch, "target latent has the wrong dimension");
    targets.col(static_cast<Eigen::Index>(i)) = train[i].w_gt.values;
  }

  const long steps_per_epoch = static_cast<long>((n_train + options.batch_size - 1) / options.batch_size);
  const long total = options.max_steps >= 0 ? options.max_steps : steps_per_epoch * std::max(options.epochs, 0);
  Adam<Vec> adam(net.num_parameters());
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  int bad_steps = 0;
  long step = 0;
  for (int epoch = 0; step < total; ++epoch) {
    std::mt19937_64 shuffle_rng(mix_seed(options.seed, 0x5100 + static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochLog log;
    log.epoch = epoch;
    int counted = 0;
    for (std::size_t start = 0; start < n_train && step < total; start += options.batch_size) {
      const std::size_t m = std::min<std::size_t>(options.batch_size, n_train - start);
      Mat x(config.in_dim(), static_cast<Eigen::Index>(m));
      Mat y(config.out_dim, static_cast<Eigen::Index>(m));
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t idx = order[start + j];
        x.col(static_cast<Eigen::Index>(j)) = inputs.col(static_cast<Eigen::Index>(idx));
        y.col(static_cast<Eigen::Index>(j)) = targets.col(static_cast<Eigen::Index>(idx));
        if (options.pteg) {
          // One fresh noise draw per example per epoch.
          std::mt19937_64 rng(mix_seed(mix_seed(options.seed, 0xE000 + static_cast<std::uint64_t>(epoch)), idx));
          Vec noise = gaussian_noise(config.cond_dim, rng);
          while (noise.norm() == 0.0) noise = gaussian_noise(config.cond_dim, rng);
          x.col(static_cast<Eigen::Index>(j)).head(config.cond_dim) =
              pseudo_text_embedding(train[idx].f_img, noise).values;
        }
      }
      MappingNet::Cache cache;
      const Mat pred = net.forward(x, MapperMode::kTrain, mix_seed(options.seed, 0xD000000 + step), &cache);
      Mat grad;
      const LossTerms t = loss_batch(y, pred, options.weights, &grad);
      ++step;
      if (!std::isfinite(t.total) || !grad.allFinite()) {
        if (++bad_steps >= options.divergence_patience)
          fail(ErrorKind::kDiverged, "mapper training diverged: loss non-finite for " + std::to_string(bad_steps) +
                                         " consecutive steps (epoch " + std::to_string(epoch) + ", step " +
                                         std::to_string(step) + "); try a lower learning rate");
        continue;
      }
      bad_steps = 0;
      const Vec g = net.backward(cache, grad);
      const double lr = options.cosine_decay ? cosine_lr(options.lr, step - 1, total) : options.lr;
      adam.step(net.parameters(), g, lr);
      if (config.use_bn) net.update_running_stats(cache);
      log.train_loss += t.total;
      log.train_abs += t.abs;
      log.train_dir += t.dir;
      ++counted;
    }
    if (counted > 0) {
      log.train_loss /= counted;
      log.train_abs /= counted;
      log.train_dir /= counted;
    }
    log.step = step;
    if (!val.empty()) {
      const LossTerms v = evaluate_mapper(net, val, options.weights);
      log.val_loss = v.total;
      log.val_abs = v.abs;
      log.val_dir = v.dir;
    }
    if (options.on_epoch) options.on_epoch(log);
    result.curve.push_back(log);
  }
  result.steps = step;
  return result;
}

std::vector<ProbabilityField> codec_inputs(std::span<const ToySample> samples, Modality modality) {
  require(modality == Modality::kMask || modality == Modality::kSketch, ErrorKind::kInvalidArgument,
          "codec inputs exist for mask and sketch only");
  std::vector<ProbabilityField> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(modality == Modality::kMask ? one_hot(s.mask) : as_field(s.sketch));
  return out;
}

CodecTrainResult train_codec(const CodecConfig& config, std::span<const ProbabilityField> fields,
                             const CodecTrainOptions& options) {
  require(!fields.empty(), ErrorKind::kInvalidArgument, "cannot train a codec on an empty set");
  require(options.batch_size >= 1, ErrorKind::kInvalidArgument, "batch size must be positive");
  CodecTrainResult result{ConvAutoencoder(config, mix_seed(options.seed, 2)), {}};
  ConvAutoencoder& codec = result.codec;
  const std::size_t n_val = holdout_size(fields.size(), options.val_fraction);
  const std::size_t n_train = fields.size() - n_val;
  const auto val = fields.subspan(n_train);

  const long steps_per_epoch = static_cast<long>((n_train + options.batch_size - 1) / options.batch_size);
  const long total = steps_per_epoch * std::max(options.epochs, 0);
  Adam<Eigen::VectorXf> adam(codec.parameters().size());
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  std::vector<ProbabilityField> batch;
  Eigen::VectorXf grad;
  long step = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::mt19937_64 rng(mix_seed(options.seed, 0xC000 + static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    EpochLog log;
    log.epoch = epoch;
    double seen = 0.0;
    for (std::size_t start = 0; start < n_train; start += options.batch_size) {
      const std::size_t m = std::min<std::size_t>(options.batch_size, n_train - start);
      batch.clear();
      for (std::size_t j = 0; j < m; ++j) batch.push_back(fields[order[start + j]]);
      const double loss = codec.loss_and_gradient(batch, grad);
      require(std::isfinite(loss) && grad.allFinite(), ErrorKind::kDiverged,
              "codec training diverged at epoch " + std::to_string(epoch) + "; try a lower learning rate");
      const double lr = options.cosine_decay ? cosine_lr(options.lr, step, total) : options.lr;
      adam.step(codec.parameters(), grad, lr);
      ++step;
      log.train_loss += loss * static_cast<double>(m);
      seen += static_cast<double>(m);
    }
    log.train_loss /= seen;
    log.step = step;
    if (!val.empty()) log.val_loss = codec.loss(val);
    if (options.on_epoch) options.on_epoch(log);
    result.curve.push_back(log);
  }
  if (step > 0) codec.set_trained(true);
  return result;
}

double codec_accuracy(const ConvAutoencoder& codec, std::span<const ToySample> samples) {
  require(!samples.empty(), ErrorKind::kInvalidArgument, "codec accuracy of an empty set");
  const Modality m = codec.config().modality;
  double acc = 0.0;
  for (const auto& s : samples) {
    if (m == Modality::kMask) {
      acc += pixel_accuracy(s.mask, argmax(codec.decode(codec.encode(s.mask))));
    } else {
      acc += pixel_accuracy(s.sketch, binarize(codec.decode(codec.encode(s.sketch))));
    }
  }
  return acc / static_cast<double>(samples.size());
}

}  // namespace latentface
