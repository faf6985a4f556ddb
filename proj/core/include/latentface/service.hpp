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

#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "json.hpp"

#include "latentface/editor.hpp"
#include "latentface/pipeline.hpp"

namespace latentface {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path runs_dir = "runs";
  std::filesystem::path model_dir;

  // Reads the "service" block of a pipeline config; LATENTFACE_PORT overrides the port.
  static ServiceConfig from_json(const nlohmann::json& j);
};

struct HttpResponse {
  int status = 200;
  nlohmann::json body;
};

int http_status_for(ErrorKind kind);

// Request handling is transport-independent: handle() is what the HTTP server
// calls, and what tests call directly.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  // Until a pipeline is attached every model endpoint answers 503 and
  // /health reports "loading".
  void attach(std::shared_ptr<const Pipeline> pipeline);
  void load_models();  // Pipeline::load(config.model_dir)
  bool ready() const;

  HttpResponse handle(std::string_view method, std::string_view path, const std::string& body) const;

  // Blocking; returns after stop().
  void serve();
  void stop();
  int bound_port() const { return bound_port_.load(); }

  const ServiceConfig& config() const { return config_; }

 private:
  struct Models {
    std::shared_ptr<const Pipeline> pipeline;
    std::map<Modality, std::shared_ptr<const Editor>> editors;
  };

  std::shared_ptr<const Models> models() const;
  HttpResponse generate(const Models& m, const nlohmann::json& req) const;
  HttpResponse edit(const Models& m, const nlohmann::json& req) const;
  HttpResponse run(const std::string& id) const;
  void persist(const std::string& id, const nlohmann::json& request, const nlohmann::json& response,
               const RgbImage& image, const LatentCodePlus& latent) const;

  ServiceConfig config_;
  mutable std::shared_mutex models_mu_;
  std::shared_ptr<const Models> models_;
  mutable std::mutex runs_mu_;
  mutable std::map<std::string, std::shared_ptr<std::mutex>> run_locks_;
  std::atomic<int> bound_port_{0};
  struct Server;
  std::unique_ptr<Server> server_;
};

// JSON wire helpers shared with the CLI.
nlohmann::json mask_to_json(const MaskImage& mask);
MaskImage mask_from_json(const nlohmann::json& j, int num_classes);
nlohmann::json sketch_to_json(const SketchImage& sketch);
SketchImage sketch_from_json(const nlohmann::json& j);
SpatialInput spatial_from_json(const nlohmann::json& j, int num_classes);
nlohmann::json latent_to_json(const LatentCodePlus& wp);
LatentCodePlus latent_from_json(const nlohmann::json& j);

}  // namespace latentface
