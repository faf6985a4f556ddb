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

#include "latentface/pipeline.hpp"

#include "latentface/image_io.hpp"

namespace latentface {
namespace {

constexpr std::uint64_t kCodecSampleOffset = 1'000'000'000ULL;

nlohmann::json load_config(const std::filesystem::path& run_dir) {
  const auto path = run_dir / "config.json";
  nlohmann::json config = default_pipeline_config();
  if (std::filesystem::exists(path)) {
    try {
      config.merge_patch(nlohmann::json::parse(io::read_text(path)));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kIo, path.string() + ": " + e.what());
    }
  }
  return config;
}

MapperConfig mapper_config_for(const nlohmann::json& config, Modality m, const Pipeline& p) {
  MapperConfig mc = MapperConfig::from_json(config.at("mapper"));
  mc.modality = m;
  mc.cond_dim = p.encoder()->dim();
  mc.out_dim = p.generator()->latent_dim();
  if (m == Modality::kThreeDMM) {
    mc.spatial_dim = kThreeDMMDim;
  } else {
    mc.spatial_dim = CodecConfig::from_json(config.at("codecs").at(std::string(modality_name(m)))).code_dim;
  }
  mc.validate();
  return mc;
}

}  // namespace

nlohmann::json default_pipeline_config() {
  CodecConfig mask;
  CodecConfig sketch;
  sketch.modality = Modality::kSketch;
  sketch.base_channels = 16;
  MapperConfig mapper;
  return {
      {"version", 1},
      {"resolution", 64},
      {"encoder", {{"adapter", "synthetic"}, {"dim", 64}, {"seed", 0x5eed0001}}},
      {"generator", {{"adapter", "toy"}, {"latent_dim", 64}, {"num_layers", 4}, {"seed", 0x70790001}}},
      {"parser", {{"adapter", "toy"}}},
      {"codecs", {{"mask", mask.to_json()}, {"sketch", sketch.to_json()}}},
      {"mapper", mapper.to_json()},
      {"cmmd", {{"sigma", 10.0}, {"scale", 1000.0}, {"unbiased", false}}},
      {"training",
       {{"codec", {{"samples", 400}, {"epochs", 40}, {"batch_size", 16}, {"lr", 3e-3}, {"seed", 7}, {"sample_seed", 11}}},
        {"mapper",
         {{"samples", 4000},
          {"epochs", 50},
          {"batch_size", 32},
          {"lr", 1e-3},
          {"pteg", true},
          {"lambda_dir", 10.0},
          {"val_fraction", 0.1},
          {"seed", 1},
          {"sample_seed", 31}}}}},
      {"service", {{"host", "127.0.0.1"}, {"port", 8080}, {"runs_dir", "runs"}}},
  };
}

Modality SpatialInput::modality() const {
  require(count() == 1, ErrorKind::kInvalidArgument, "exactly one spatial modality (mask, sketch or 3dmm) is required");
  if (mask) return Modality::kMask;
  if (sketch) return Modality::kSketch;
  return Modality::kThreeDMM;
}

Pipeline::Pipeline(nlohmann::json config) : config_(std::move(config)) {
  world_ = std::make_shared<const ToyWorld>(config_.value("resolution", 64));
  encoder_ = make_joint_encoder(config_.at("encoder"), world_);
  generator_ = make_generator(config_.at("generator"), world_);
  parser_ = make_face_parser(config_.value("parser", nlohmann::json::object()), world_);
  require(generator_->resolution() == world_->resolution(), ErrorKind::kShapeMismatch,
          "generator resolution does not match the toy world");
  const auto probe = ToyAttributes::neutral();
  validate_encoder(*encoder_, world_->render(probe), ToyWorld::describe(probe));
}

Pipeline Pipeline::load(const std::filesystem::path& run_dir) {
  require(std::filesystem::is_directory(run_dir), ErrorKind::kNotFound, "run directory " + run_dir.string() + " not found");
  Pipeline p(load_config(run_dir));
  for (Modality m : {Modality::kMask, Modality::kSketch}) {
    const auto path = codec_checkpoint_path(run_dir, m);
    if (std::filesystem::exists(path)) p.set_codec(std::make_shared<const ConvAutoencoder>(ConvAutoencoder::load(path)));
  }
  for (Modality m : {Modality::kMask, Modality::kSketch, Modality::kThreeDMM}) {
    const auto path = mapper_checkpoint_path(run_dir, m);
    if (std::filesystem::exists(path)) {
      const Checkpoint ckpt = Checkpoint::load(path);
      p.set_mapper(std::make_shared<const MappingNet>(MappingNet::from_checkpoint(ckpt)));
      p.checkpoint_digests_[m] = ckpt.digest();
    }
  }
  return p;
}

void Pipeline::set_codec(std::shared_ptr<const ConvAutoencoder> codec) {
  require(codec != nullptr, ErrorKind::kInvalidArgument, "null codec");
  require(codec->config().height == world_->resolution() && codec->config().width == world_->resolution(),
          ErrorKind::kShapeMismatch, "codec grid does not match the pipeline resolution");
  codecs_[codec->config().modality] = std::move(codec);
}

void Pipeline::set_mapper(std::shared_ptr<const MappingNet> mapper) {
  require(mapper != nullptr, ErrorKind::kInvalidArgument, "null mapper");
  const MapperConfig& c = mapper->config();
  require(c.cond_dim == encoder_->dim(), ErrorKind::kShapeMismatch,
          "mapper condition dimension " + std::to_string(c.cond_dim) + " does not match encoder dimension " +
              std::to_string(encoder_->dim()));
  require(c.out_dim == generator_->latent_dim(), ErrorKind::kShapeMismatch,
          "mapper output dimension " + std::to_string(c.out_dim) + " does not match generator latent dimension " +
              std::to_string(generator_->latent_dim()));
  mappers_[c.modality] = std::move(mapper);
}

std::shared_ptr<const ConvAutoencoder> Pipeline::codec(Modality m) const {
  const auto it = codecs_.find(m);
  require(it != codecs_.end(), ErrorKind::kNotReady, std::string("no trained ") + std::string(modality_name(m)) + " codec loaded");
  return it->second;
}

std::shared_ptr<const MappingNet> Pipeline::mapper(Modality m) const {
  const auto it = mappers_.find(m);
  require(it != mappers_.end(), ErrorKind::kNotReady,
          std::string("no trained ") + std::string(modality_name(m)) + " mapper loaded");
  return it->second;
}

SpatialEncoders Pipeline::spatial_encoders() const {
  SpatialEncoders e;
  if (auto it = codecs_.find(Modality::kMask); it != codecs_.end()) e.mask = it->second.get();
  if (auto it = codecs_.find(Modality::kSketch); it != codecs_.end()) e.sketch = it->second.get();
  return e;
}

SpatialCode Pipeline::encode_spatial(const SpatialInput& input) const {
  switch (input.modality()) {
    case Modality::kMask:
      return codec(Modality::kMask)->encode(*input.mask);
    case Modality::kSketch:
      return codec(Modality::kSketch)->encode(*input.sketch);
    case Modality::kThreeDMM:
      return pack_3dmm(*input.threedmm);
  }
  fail(ErrorKind::kInvalidArgument, "unknown modality");
}

GenerateResult Pipeline::generate(std::string_view text, const SpatialInput& spatial) const {
  const Modality m = spatial.modality();
  const auto net = mapper(m);
  GenerateResult r;
  r.w = net->map(encoder_->encode_text(text), encode_spatial(spatial));
  r.image = generator_->synthesize(r.w);
  return r;
}

std::shared_ptr<const Editor> Pipeline::editor(Modality m) const {
  return std::make_shared<const Editor>(generator_, encoder_, mapper(m));
}

nlohmann::json Pipeline::manifest() const {
  nlohmann::json mappers = nlohmann::json::object();
  for (const auto& [m, net] : mappers_) {
    mappers[std::string(modality_name(m))] = {{"num_layers", net->config().num_layers},
                                              {"config", net->config().to_json()},
                                              {"digest", to_hex(net->digest())}};
  }
  nlohmann::json codecs = nlohmann::json::object();
  for (const auto& [m, c] : codecs_) {
    codecs[std::string(modality_name(m))] = {{"code_dim", c->config().code_dim},
                                             {"config", c->config().to_json()},
                                             {"digest", to_hex(c->to_checkpoint().digest())}};
  }
  nlohmann::json palette = nlohmann::json::array();
  for (const auto& c : ToyWorld::palette()) palette.push_back({c[0], c[1], c[2]});
  const int mapper_layers = mappers_.empty() ? config_.at("mapper").value("num_layers", 0)
                                             : mappers_.begin()->second->config().num_layers;
  return {{"D_w", generator_->latent_dim()},
          {"D_emb", encoder_->dim()},
          {"L", generator_->num_layers()},
          {"mapper_layers", mapper_layers},
          {"resolution", generator_->resolution()},
          {"generator", {{"name", generator_->name()}, {"digest", to_hex(generator_->digest())}}},
          {"encoder", {{"name", encoder_->name()}, {"digest", to_hex(encoder_->space_id())}}},
          {"parser", parser_->name()},
          {"mappers", mappers},
          {"codecs", codecs},
          {"num_classes", kToyNumClasses},
          {"class_names", ToyWorld::class_names()},
          {"palette", palette},
          {"digest", to_hex(digest())}};
}

std::uint64_t Pipeline::digest() const {
  Digest d;
  d.pod(generator_->digest()).pod(encoder_->space_id());
  for (const auto& [m, net] : mappers_) d.pod(static_cast<int>(m)).pod(net->digest());
  for (const auto& [m, c] : codecs_) d.pod(static_cast<int>(m)).pod(c->to_checkpoint().digest());
  return d.value();
}

std::filesystem::path codec_checkpoint_path(const std::filesystem::path& run_dir, Modality m) {
  return run_dir / (std::string(modality_name(m)) + "_codec.ckpt");
}

std::filesystem::path mapper_checkpoint_path(const std::filesystem::path& run_dir, Modality m) {
  return run_dir / ("mapper_" + std::string(modality_name(m)) + ".ckpt");
}

CodecTrainResult train_codec_run(const std::filesystem::path& run_dir, Modality modality,
                                 const nlohmann::json& overrides, const std::function<void(const EpochLog&)>& on_epoch) {
  require(modality == Modality::kMask || modality == Modality::kSketch, ErrorKind::kInvalidArgument,
          "only mask and sketch codecs are trained; 3dmm parameters are used as is");
  nlohmann::json config = load_config(run_dir);
  config.merge_patch(overrides);
  std::filesystem::create_directories(run_dir);
  io::write_text(run_dir / "config.json", config.dump(2));

  const Pipeline p(config);
  const auto* gen = p.toy_generator();
  require(gen != nullptr, ErrorKind::kUnsupported, "codec training data comes from the toy generator");
  const auto& t = config.at("training").at("codec");
  const CodecConfig cc = CodecConfig::from_json(config.at("codecs").at(std::string(modality_name(modality))));
  require(cc.modality == modality, ErrorKind::kInvalidArgument, "codec config modality does not match");
  const auto samples =
      sample_toy_world(*gen, t.at("samples").get<std::size_t>(), t.at("sample_seed").get<std::uint64_t>(), kCodecSampleOffset);
  CodecTrainOptions o;
  o.epochs = t.at("epochs").get<int>();
  o.batch_size = t.at("batch_size").get<int>();
  o.lr = t.at("lr").get<double>();
  o.seed = t.at("seed").get<std::uint64_t>();
  o.on_epoch = on_epoch;
  CodecTrainResult r = train_codec(cc, codec_inputs(samples, modality), o);
  r.codec.save(codec_checkpoint_path(run_dir, modality));
  write_loss_csv(run_dir / (std::string(modality_name(modality)) + "_codec_loss.csv"), r.curve);
  return r;
}

MapperTrainResult train_mapper_run(const std::filesystem::path& run_dir, Modality modality,
                                   const nlohmann::json& overrides, const std::function<void(const EpochLog&)>& on_epoch) {
  nlohmann::json config = load_config(run_dir);
  config.merge_patch(overrides);
  std::filesystem::create_directories(run_dir);
  io::write_text(run_dir / "config.json", config.dump(2));

  Pipeline p(config);
  if (modality != Modality::kThreeDMM) {
    const auto path = codec_checkpoint_path(run_dir, modality);
    require(std::filesystem::exists(path), ErrorKind::kNotReady,
            "no " + std::string(modality_name(modality)) + " codec in " + run_dir.string() +
                "; run train-codec --modality " + std::string(modality_name(modality)) + " first");
    p.set_codec(std::make_shared<const ConvAutoencoder>(ConvAutoencoder::load(path)));
  }
  const auto* gen = p.toy_generator();
  require(gen != nullptr, ErrorKind::kUnsupported, "mapper training data comes from the toy generator");
  const auto& t = config.at("training").at("mapper");
  const auto corpus = build_corpus(*gen, *p.encoder(), modality, p.spatial_encoders(),
                                   t.at("samples").get<std::size_t>(), t.at("sample_seed").get<std::uint64_t>());
  MapperTrainOptions o;
  o.epochs = t.at("epochs").get<int>();
  o.batch_size = t.at("batch_size").get<int>();
  o.lr = t.at("lr").get<double>();
  o.pteg = t.at("pteg").get<bool>();
  o.weights.lambda_dir = t.at("lambda_dir").get<double>();
  o.val_fraction = t.at("val_fraction").get<double>();
  o.seed = t.at("seed").get<std::uint64_t>();
  o.on_epoch = on_epoch;
  MapperTrainResult r = train_mapper(corpus, mapper_config_for(config, modality, p), o);
  r.net.save(mapper_checkpoint_path(run_dir, modality));
  write_loss_csv(run_dir / ("mapper_" + std::string(modality_name(modality)) + "_loss.csv"), r.curve);
  io::write_text(run_dir / ("mapper_" + std::string(modality_name(modality)) + "_corpus.txt"),
                 to_hex(corpus_digest(corpus)) + "\n");
  return r;
}

}  // namespace latentface
