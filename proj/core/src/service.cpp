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

#include "latentface/service.hpp"

#include <cstdlib>

#include "httplib.h"
#include "latentface/image_io.hpp"

namespace latentface {
namespace {

HttpResponse error_response(int status, const std::string& message, const std::string& hint = {}) {
  nlohmann::json body = {{"error", message}, {"status", status}};
  if (!hint.empty()) body["hint"] = hint;
  return {status, body};
}

std::string png_base64(const RgbImage& image) { return io::base64_encode(io::encode_png(image)); }

LatentCodePlus read_run_latent(const std::filesystem::path& dir) { return read_latent_file(dir / "latent.lflt"); }

bool valid_run_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') return false;
  return true;
}

void write_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  const auto tmp = path.string() + ".tmp";
  io::write_file(tmp, bytes);
  std::filesystem::rename(tmp, path);
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  write_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace

ServiceConfig ServiceConfig::from_json(const nlohmann::json& j) {
  ServiceConfig c;
  c.host = j.value("host", c.host);
  c.port = j.value("port", c.port);
  c.runs_dir = j.value("runs_dir", c.runs_dir.string());
  if (j.contains("model_dir")) c.model_dir = j.at("model_dir").get<std::string>();
  if (const char* env = std::getenv("LATENTFACE_PORT"); env && *env) {
    char* end = nullptr;
    const long p = std::strtol(env, &end, 10);
    require(end && *end == '\0' && p > 0 && p < 65536, ErrorKind::kInvalidArgument,
            std::string("LATENTFACE_PORT is not a valid port: ") + env);
    c.port = static_cast<int>(p);
  }
  return c;
}

int http_status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kShapeMismatch:
    case ErrorKind::kIo:
      return 400;
    case ErrorKind::kNotFound:
      return 404;
    case ErrorKind::kUnsupported:
      return 422;
    case ErrorKind::kNotReady:
      return 503;
    case ErrorKind::kDiverged:
      return 500;
  }
  return 500;
}

nlohmann::json mask_to_json(const MaskImage& mask) {
  return {{"png_base64", io::base64_encode(io::encode_mask_png(mask, ToyWorld::palette()))},
          {"height", mask.height},
          {"width", mask.width},
          {"num_classes", mask.num_classes}};
}

MaskImage mask_from_json(const nlohmann::json& j, int num_classes) {
  require(j.is_object(), ErrorKind::kInvalidArgument, "mask must be an object with png_base64 or grid");
  if (j.contains("png_base64")) return io::decode_mask_png(io::base64_decode(j.at("png_base64").get<std::string>()), num_classes);
  require(j.contains("grid"), ErrorKind::kInvalidArgument, "mask needs png_base64 or grid");
  const auto& rows = j.at("grid");
  require(rows.is_array() && !rows.empty() && rows.front().is_array(), ErrorKind::kInvalidArgument,
          "mask grid must be a non-empty array of rows");
  MaskImage m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()), num_classes);
  for (int y = 0; y < m.height; ++y) {
    require(rows[y].is_array() && static_cast<int>(rows[y].size()) == m.width, ErrorKind::kInvalidArgument,
            "mask grid rows differ in length");
    for (int x = 0; x < m.width; ++x) {
      const int v = rows[y][x].get<int>();
      require(v >= 0 && v < num_classes, ErrorKind::kInvalidArgument,
              "mask label " + std::to_string(v) + " outside [0, " + std::to_string(num_classes) + ")");
      m.at(y, x) = static_cast<std::uint8_t>(v);
    }
  }
  return m;
}

nlohmann::json sketch_to_json(const SketchImage& sketch) {
  return {{"png_base64", io::base64_encode(io::encode_sketch_png(sketch))},
          {"height", sketch.height},
          {"width", sketch.width}};
}

SketchImage sketch_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorKind::kInvalidArgument, "sketch must be an object with png_base64 or grid");
  if (j.contains("png_base64")) return io::decode_sketch_png(io::base64_decode(j.at("png_base64").get<std::string>()));
  require(j.contains("grid"), ErrorKind::kInvalidArgument, "sketch needs png_base64 or grid");
  const auto& rows = j.at("grid");
  require(rows.is_array() && !rows.empty() && rows.front().is_array(), ErrorKind::kInvalidArgument,
          "sketch grid must be a non-empty array of rows");
  const int h = static_cast<int>(rows.size()), w = static_cast<int>(rows.front().size());
  std::vector<std::uint8_t> raw;
  for (const auto& r : rows) {
    require(r.is_array() && static_cast<int>(r.size()) == w, ErrorKind::kInvalidArgument, "sketch grid rows differ in length");
    for (const auto& v : r) {
      const int p = v.get<int>();
      require(p >= 0 && p <= 255, ErrorKind::kInvalidArgument, "sketch value out of range");
      raw.push_back(static_cast<std::uint8_t>(p));
    }
  }
  return SketchImage::from_raw(h, w, raw);
}

SpatialInput spatial_from_json(const nlohmann::json& j, int num_classes) {
  SpatialInput s;
  if (j.contains("mask") && !j.at("mask").is_null()) s.mask = mask_from_json(j.at("mask"), num_classes);
  if (j.contains("sketch") && !j.at("sketch").is_null()) s.sketch = sketch_from_json(j.at("sketch"));
  if (j.contains("threedmm") && !j.at("threedmm").is_null()) {
    const auto& v = j.at("threedmm");
    require(v.is_array(), ErrorKind::kInvalidArgument, "threedmm must be an array of 159 numbers");
    SpatialCode code;
    code.modality = Modality::kThreeDMM;
    code.values.resize(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) code.values[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    s.threedmm = unpack_3dmm(code);
  }
  require(s.count() == 1, ErrorKind::kInvalidArgument,
          "exactly one of mask, sketch or threedmm must be given (got " + std::to_string(s.count()) + ")");
  return s;
}

nlohmann::json latent_to_json(const LatentCodePlus& wp) {
  nlohmann::json rows = nlohmann::json::array();
  for (int l = 0; l < wp.num_layers(); ++l) {
    std::vector<double> r(static_cast<std::size_t>(wp.dim()));
    for (int d = 0; d < wp.dim(); ++d) r[static_cast<std::size_t>(d)] = wp.layers(l, d);
    rows.push_back(r);
  }
  return {{"layers", wp.num_layers()},
          {"dim", wp.dim()},
          {"values", rows},
          {"lflt_base64", io::base64_encode(encode_latent(wp, LatentDType::kFloat64))}};
}

LatentCodePlus latent_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorKind::kInvalidArgument, "latent must be an object");
  if (j.contains("lflt_base64")) return decode_latent(io::base64_decode(j.at("lflt_base64").get<std::string>()));
  require(j.contains("values") && j.at("values").is_array() && !j.at("values").empty(), ErrorKind::kInvalidArgument,
          "latent needs lflt_base64 or a non-empty values array");
  const auto& rows = j.at("values");
  LatentCodePlus wp;
  if (!rows.front().is_array()) {
    wp.layers.resize(1, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t d = 0; d < rows.size(); ++d) wp.layers(0, static_cast<Eigen::Index>(d)) = rows[d].get<double>();
    return wp;
  }
  wp.layers.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t l = 0; l < rows.size(); ++l) {
    require(rows[l].is_array() && rows[l].size() == rows.front().size(), ErrorKind::kInvalidArgument,
            "latent rows differ in length");
    for (std::size_t d = 0; d < rows[l].size(); ++d)
      wp.layers(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(d)) = rows[l][d].get<double>();
  }
  return wp;
}

struct Service::Server {
  httplib::Server http;
};

Service::Service(ServiceConfig config) : config_(std::move(config)), server_(std::make_unique<Server>()) {}

Service::~Service() { stop(); }

void Service::attach(std::shared_ptr<const Pipeline> pipeline) {
  require(pipeline != nullptr, ErrorKind::kInvalidArgument, "null pipeline");
  auto m = std::make_shared<Models>();
  for (Modality mod : {Modality::kMask, Modality::kSketch, Modality::kThreeDMM})
    if (pipeline->has_mapper(mod)) m->editors[mod] = pipeline->editor(mod);
  m->pipeline = std::move(pipeline);
  std::unique_lock lock(models_mu_);
  models_ = std::move(m);
}

void Service::load_models() {
  require(!config_.model_dir.empty(), ErrorKind::kInvalidArgument, "no model directory configured");
  attach(std::make_shared<const Pipeline>(Pipeline::load(config_.model_dir)));
}

bool Service::ready() const { return models() != nullptr; }

std::shared_ptr<const Service::Models> Service::models() const {
  std::shared_lock lock(models_mu_);
  return models_;
}

HttpResponse Service::handle(std::string_view method, std::string_view path, const std::string& body) const {
  try {
    if (method == "GET" && path == "/health") {
      const bool ok = ready();
      return {200, {{"status", ok ? "ok" : "loading"}}};
    }
    if (method == "GET" && path.rfind("/runs/", 0) == 0) return run(std::string(path.substr(6)));

    const bool known = (method == "GET" && path == "/models") || (method == "POST" && path == "/generate") ||
                       (method == "POST" && path == "/edit");
    if (!known) return error_response(404, "no route for " + std::string(method) + " " + std::string(path));

    const auto m = models();
    if (!m) return error_response(503, "models are still loading");
    if (path == "/models") return {200, m->pipeline->manifest()};

    nlohmann::json req;
    try {
      req = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      return error_response(400, std::string("request body is not valid JSON: ") + e.what());
    }
    if (!req.is_object()) return error_response(400, "request body must be a JSON object");
    return path == "/generate" ? generate(*m, req) : edit(*m, req);
  } catch (const Error& e) {
    return error_response(http_status_for(e.kind()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, std::string("malformed request: ") + e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

HttpResponse Service::generate(const Models& m, const nlohmann::json& req) const {
  const Pipeline& p = *m.pipeline;
  require(req.contains("text") && req.at("text").is_string(), ErrorKind::kInvalidArgument, "text is required");
  const SpatialInput spatial = spatial_from_json(req, kToyNumClasses);
  const std::uint64_t seed = req.value("seed", std::uint64_t{0});
  const GenerateResult r = p.generate(req.at("text").get<std::string>(), spatial);

  Digest id;
  id.str("generate").str(req.dump()).pod(seed).pod(p.digest());
  const std::string request_id = id.hex();
  const LatentCodePlus wp = LatentCodePlus::broadcast(r.w, p.generator()->num_layers());

  nlohmann::json meta = {{"request_id", request_id},
                         {"kind", "generate"},
                         {"modality", modality_name(spatial.modality())},
                         {"seed", seed},
                         {"latent_w", std::vector<double>(r.w.values.data(), r.w.values.data() + r.w.dim())},
                         {"model_digest", to_hex(p.digest())}};
  persist(request_id, req, meta, r.image.image, wp);
  nlohmann::json out = meta;
  out["image_png_base64"] = png_base64(r.image.image);
  return {200, out};
}

HttpResponse Service::edit(const Models& m, const nlohmann::json& req) const {
  const Pipeline& p = *m.pipeline;
  const int layers = p.generator()->num_layers(), dim = p.generator()->latent_dim();

  // Source latent.
  InvertedFace src;
  nlohmann::json source_request;
  if (req.contains("latent_ref")) {
    const std::string ref = req.at("latent_ref").get<std::string>();
    require(valid_run_id(ref), ErrorKind::kInvalidArgument, "malformed latent_ref");
    const auto dir = config_.runs_dir / ref;
    require(std::filesystem::exists(dir / "latent.lflt"), ErrorKind::kNotFound, "unknown run '" + ref + "'");
    src = ingest_latent(read_run_latent(dir), layers, dim, ref);
    if (std::filesystem::exists(dir / "request.json"))
      source_request = nlohmann::json::parse(io::read_text(dir / "request.json"));
  } else if (req.contains("latent")) {
    src = ingest_latent(latent_from_json(req.at("latent")), layers, dim, "inline");
  } else if (req.contains("image_png_base64")) {
    GeneratedImage img;
    img.image = io::decode_png(io::base64_decode(req.at("image_png_base64").get<std::string>()));
    img.provenance = GeneratedImage::Provenance::kExternal;
    const ToyInverter inverter(layers, dim);
    src = inverter.invert(img);  // kUnsupported -> 422
  } else {
    return error_response(422, "no source latent and no inversion adapter for this request",
                          "send latent_ref (a run id), an inline latent, or a precomputed L x D_w latent file");
  }

  const bool text_pair = req.contains("target_text");
  const bool spatial_pair = req.contains("spatial_target") || req.contains("spatial_pivot");
  require(text_pair != spatial_pair, ErrorKind::kInvalidArgument,
          "an edit needs exactly one of a text pair (target_text, pivot_text) or a spatial pair "
          "(spatial_target, spatial_pivot)");
  const double beta = req.value("beta", 1.0);

  EditDirection dir;
  bool cached = false;
  Modality modality;
  if (text_pair) {
    const std::string target = req.at("target_text").get<std::string>();
    require(!target.empty(), ErrorKind::kInvalidArgument, "target_text must not be empty");
    const std::string pivot = req.value("pivot_text", std::string(kDefaultPivotText));
    const nlohmann::json& spatial_src = req.contains("mask") || req.contains("sketch") || req.contains("threedmm")
                                            ? req
                                            : source_request;
    require(spatial_src.is_object(), ErrorKind::kInvalidArgument,
            "a text edit needs the spatial condition (mask, sketch or threedmm) or a latent_ref from /generate");
    const SpatialInput spatial = spatial_from_json(spatial_src, kToyNumClasses);
    modality = spatial.modality();
    const auto it = m.editors.find(modality);
    require(it != m.editors.end(), ErrorKind::kNotReady,
            "no " + std::string(modality_name(modality)) + " mapper loaded");
    const SpatialCode code = p.encode_spatial(spatial);
    cached = it->second->cache().find({pivot.empty() ? std::string(kDefaultPivotText) : pivot, target,
                                       spatial_digest(code)}).has_value();
    dir = it->second->text_direction(pivot, target, code);
  } else {
    require(req.contains("spatial_target") && req.contains("spatial_pivot"), ErrorKind::kInvalidArgument,
            "a spatial edit needs both spatial_target and spatial_pivot");
    const SpatialInput tar = spatial_from_json(req.at("spatial_target"), kToyNumClasses);
    const SpatialInput piv = spatial_from_json(req.at("spatial_pivot"), kToyNumClasses);
    modality = tar.modality();
    require(piv.modality() == modality, ErrorKind::kInvalidArgument, "spatial target and pivot use different modalities");
    const auto it = m.editors.find(modality);
    require(it != m.editors.end(), ErrorKind::kNotReady,
            "no " + std::string(modality_name(modality)) + " mapper loaded");
    const EmbeddingVector f_img = p.encoder()->encode_image(p.generator()->synthesize_plus(src.wp_src).image);
    const std::size_t hits = it->second->cache().hits();
    dir = it->second->spatial_direction(f_img, p.encode_spatial(tar), p.encode_spatial(piv));
    cached = it->second->cache().hits() > hits;
  }
  const LatentCodePlus edited = apply_edit(src, dir, beta);
  const GeneratedImage image = p.generator()->synthesize_plus(edited);

  Digest id;
  id.str("edit").str(req.dump()).pod(p.digest());
  const std::string request_id = id.hex();
  nlohmann::json meta = {{"request_id", request_id},
                         {"kind", "edit"},
                         {"modality", modality_name(modality)},
                         {"beta", beta},
                         {"direction",
                          {{"source", dir.source == EditDirection::Source::kText ? "text" : "spatial"},
                           {"pivot", dir.pivot_desc},
                           {"target", dir.target_desc},
                           {"norm", dir.values.norm()}}},
                         {"source", src.source_ref},
                         {"direction_cached", cached},
                         {"model_digest", to_hex(p.digest())}};
  nlohmann::json stored_req = req;
  if (text_pair && !req.contains("mask") && !req.contains("sketch") && !req.contains("threedmm") &&
      source_request.is_object()) {
    // Keep the spatial condition with the run so edits can chain.
    for (const char* k : {"mask", "sketch", "threedmm"})
      if (source_request.contains(k)) stored_req[k] = source_request[k];
  }
  persist(request_id, stored_req, meta, image.image, edited);
  nlohmann::json out = meta;
  out["latent_wplus"] = latent_to_json(edited);
  out["image_png_base64"] = png_base64(image.image);
  return {200, out};
}

HttpResponse Service::run(const std::string& id) const {
  if (!valid_run_id(id)) return error_response(404, "unknown run '" + id + "'");
  const auto dir = config_.runs_dir / id;
  if (!std::filesystem::exists(dir / "response.json")) return error_response(404, "unknown run '" + id + "'");
  std::shared_ptr<std::mutex> lock;
  {
    std::lock_guard g(runs_mu_);
    auto& l = run_locks_[id];
    if (!l) l = std::make_shared<std::mutex>();
    lock = l;
  }
  std::lock_guard g(*lock);
  nlohmann::json out = {{"id", id},
                        {"request", nlohmann::json::parse(io::read_text(dir / "request.json"))},
                        {"response", nlohmann::json::parse(io::read_text(dir / "response.json"))},
                        {"image_png_base64", io::base64_encode(io::read_file(dir / "image.png"))},
                        {"latent", latent_to_json(read_run_latent(dir))}};
  return {200, out};
}

void Service::persist(const std::string& id, const nlohmann::json& request, const nlohmann::json& response,
                      const RgbImage& image, const LatentCodePlus& latent) const {
  std::shared_ptr<std::mutex> lock;
  {
    std::lock_guard g(runs_mu_);
    auto& l = run_locks_[id];
    if (!l) l = std::make_shared<std::mutex>();
    lock = l;
  }
  std::lock_guard g(*lock);
  const auto dir = config_.runs_dir / id;
  std::filesystem::create_directories(dir);
  write_atomic(dir / "request.json", request.dump(2));
  write_atomic(dir / "image.png", io::encode_png(image));
  write_atomic(dir / "latent.lflt", encode_latent(latent, LatentDType::kFloat64));
  write_atomic(dir / "response.json", response.dump(2));
}

void Service::serve() {
  auto& http = server_->http;
  auto bridge = [this](const httplib::Request& rq, httplib::Response& rs) {
    const HttpResponse r = handle(rq.method, rq.path, rq.body);
    rs.status = r.status;
    rs.set_header("Access-Control-Allow-Origin", "*");
    rs.set_content(r.body.dump(), "application/json");
  };
  http.Get(R"(/.*)", bridge);
  http.Post(R"(/.*)", bridge);
  http.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& rs) {
    rs.set_header("Access-Control-Allow-Origin", "*");
    rs.set_header("Access-Control-Allow-Headers", "Content-Type");
    rs.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    rs.status = 204;
  });
  if (config_.port == 0) {
    const int port = http.bind_to_any_port(config_.host);
    require(port > 0, ErrorKind::kIo, "could not bind " + config_.host);
    bound_port_ = port;
  } else {
    require(http.bind_to_port(config_.host, config_.port), ErrorKind::kIo,
            "could not bind " + config_.host + ":" + std::to_string(config_.port));
    bound_port_ = config_.port;
  }
  http.listen_after_bind();
}

void Service::stop() { server_->http.stop(); }

}  // namespace latentface
