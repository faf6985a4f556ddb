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

#include "latentface/mapper.hpp"

#include <cmath>
#include <cstring>
#include <random>

namespace latentface {
namespace {

constexpr double kSlope = 0.2;

double leaky(double v) { return v >= 0.0 ? v : kSlope * v; }

}  // namespace

void MapperConfig::validate() const {
  require(num_layers >= 1, ErrorKind::kInvalidArgument, "mapper needs at least one layer");
  require(dropout_rate >= 0.0 && dropout_rate < 1.0, ErrorKind::kInvalidArgument, "dropout rate must be in [0, 1)");
  require(hidden_dim >= 1 && cond_dim >= 1 && spatial_dim >= 1 && out_dim >= 1, ErrorKind::kInvalidArgument,
          "mapper dimensions must be positive");
  require(modality != Modality::kThreeDMM || spatial_dim == kThreeDMMDim, ErrorKind::kInvalidArgument,
          "a 3dmm mapper takes 159-dimensional spatial codes");
  require(bn_momentum > 0.0 && bn_momentum <= 1.0 && bn_eps > 0.0, ErrorKind::kInvalidArgument,
          "invalid batch-norm constants");
}

nlohmann::json MapperConfig::to_json() const {
  return {{"num_layers", num_layers},   {"use_bn", use_bn},
          {"use_dropout", use_dropout}, {"dropout_rate", dropout_rate},
          {"hidden_dim", hidden_dim},   {"cond_dim", cond_dim},
          {"spatial_dim", spatial_dim}, {"out_dim", out_dim},
          {"modality", modality_name(modality)}, {"bn_running_stats", bn_running_stats},
          {"bn_momentum", bn_momentum}, {"bn_eps", bn_eps}};
}

MapperConfig MapperConfig::from_json(const nlohmann::json& j) {
  MapperConfig c;
  c.num_layers = j.value("num_layers", c.num_layers);
  c.use_bn = j.value("use_bn", c.use_bn);
  c.use_dropout = j.value("use_dropout", c.use_dropout);
  c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.cond_dim = j.value("cond_dim", c.cond_dim);
  c.spatial_dim = j.value("spatial_dim", c.spatial_dim);
  c.out_dim = j.value("out_dim", c.out_dim);
  c.modality = parse_modality(j.value("modality", std::string("mask")));
  c.bn_running_stats = j.value("bn_running_stats", c.bn_running_stats);
  c.bn_momentum = j.value("bn_momentum", c.bn_momentum);
  c.bn_eps = j.value("bn_eps", c.bn_eps);
  c.validate();
  return c;
}

MappingNet::MappingNet(MapperConfig config, std::uint64_t seed) : config_(config), seed_(seed) {
  config_.validate();
  Eigen::Index off = 0;
  for (int i = 0; i < config_.num_layers; ++i) {
    Layer l;
    l.hidden = i + 1 < config_.num_layers;
    l.in = i == 0 ? config_.in_dim() : config_.hidden_dim;
    l.out = l.hidden ? config_.hidden_dim : config_.out_dim;
    l.w_off = off;
    l.b_off = off + static_cast<Eigen::Index>(l.in) * l.out;
    off = l.b_off + l.out;
    if (l.hidden && config_.use_bn) {
      l.gamma_off = off;
      l.beta_off = off + l.out;
      off += 2 * l.out;
    }
    layers_.push_back(l);
  }
  params_ = Vec::Zero(off);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (const Layer& l : layers_) {
    const double gain = l.hidden ? 2.0 / (1.0 + kSlope * kSlope) : 1.0;
    const double std = std::sqrt(gain / l.in);
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(l.in) * l.out; ++k) params_[l.w_off + k] = n01(rng) * std;
    if (l.gamma_off >= 0) {
      params_.segment(l.gamma_off, l.out).setOnes();
      running_mean_.push_back(Vec::Zero(l.out));
      running_var_.push_back(Vec::Ones(l.out));
    }
  }
}

Mat MappingNet::pack(std::span<const EmbeddingVector> f_cond, std::span<const SpatialCode> f_spatial) const {
  require(f_cond.size() == f_spatial.size(), ErrorKind::kInvalidArgument, "condition and spatial batches differ in size");
  Mat x(config_.in_dim(), static_cast<Eigen::Index>(f_cond.size()));
  for (std::size_t b = 0; b < f_cond.size(); ++b) {
    require(f_cond[b].dim() == config_.cond_dim, ErrorKind::kShapeMismatch,
            "condition embedding has dimension " + std::to_string(f_cond[b].dim()) + ", mapper expects " +
                std::to_string(config_.cond_dim));
    require(f_spatial[b].dim() == config_.spatial_dim, ErrorKind::kShapeMismatch,
            "spatial code has dimension " + std::to_string(f_spatial[b].dim()) + ", mapper expects " +
                std::to_string(config_.spatial_dim));
    require(f_spatial[b].modality == config_.modality, ErrorKind::kInvalidArgument,
            "mapper was trained on " + std::string(modality_name(config_.modality)) + " codes, got " +
                std::string(modality_name(f_spatial[b].modality)));
    x.col(b) << f_cond[b].values, f_spatial[b].values;
  }
  return x;
}

LatentCode MappingNet::map(const EmbeddingVector& f_cond, const SpatialCode& f_spatial, MapperMode mode,
                           std::uint64_t seed) const {
  const Mat y = forward(pack(std::span(&f_cond, 1), std::span(&f_spatial, 1)), mode, seed);
  return LatentCode{y.col(0)};
}

Mat MappingNet::forward(const Mat& x, MapperMode mode, std::uint64_t seed, Cache* cache) const {
  require(x.rows() == config_.in_dim(), ErrorKind::kShapeMismatch,
          "mapper input has " + std::to_string(x.rows()) + " rows, expected " + std::to_string(config_.in_dim()));
  require(x.cols() >= 1, ErrorKind::kInvalidArgument, "empty mapper batch");
  const Eigen::Index batch = x.cols();
  if (cache) *cache = Cache{};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Mat a = x;
  std::size_t bn = 0;
  for (const Layer& l : layers_) {
    if (cache) cache->inputs.push_back(a);
    const Eigen::Map<const Mat> w(params_.data() + l.w_off, l.out, l.in);
    Mat z = w * a;
    z.colwise() += params_.segment(l.b_off, l.out);
    if (!l.hidden) {
      a = std::move(z);
      break;
    }
    if (l.gamma_off >= 0) {
      const bool use_batch =
          batch > 1 && (mode == MapperMode::kTrain || !config_.bn_running_stats);
      Vec mean, var;
      if (use_batch) {
        mean = z.rowwise().mean();
        var = (z.colwise() - mean).array().square().rowwise().mean();
      } else {
        mean = running_mean_[bn];
        var = running_var_[bn];
      }
      const Vec inv = (var.array() + config_.bn_eps).rsqrt();
      Mat xhat = (z.colwise() - mean).array().colwise() * inv.array();
      z = (xhat.array().colwise() * params_.segment(l.gamma_off, l.out).array()).colwise() +
          params_.segment(l.beta_off, l.out).array();
      if (cache) {
        cache->xhat.push_back(std::move(xhat));
        cache->inv_std.push_back(inv);
        cache->batch_stats.push_back(use_batch);
        cache->batch_mean.push_back(mean);
        cache->batch_var.push_back(var);
      }
      ++bn;
    }
    a = z.unaryExpr(&leaky);
    if (cache) cache->pre_act.push_back(std::move(z));
    if (config_.use_dropout && mode == MapperMode::kTrain && config_.dropout_rate > 0.0) {
      const double keep = 1.0 - config_.dropout_rate;
      Mat mask(l.out, batch);
      for (Eigen::Index k = 0; k < mask.size(); ++k) mask.data()[k] = unif(rng) < keep ? 1.0 / keep : 0.0;
      a = a.cwiseProduct(mask);
      if (cache) cache->dropout.push_back(std::move(mask));
    } else if (cache) {
      cache->dropout.emplace_back();
    }
  }
  return a;
}

Vec MappingNet::backward(const Cache& cache, const Mat& grad_out) const {
  require(cache.inputs.size() == layers_.size(), ErrorKind::kInvalidArgument, "backward needs a cache from forward");
  Vec grad = Vec::Zero(params_.size());
  Mat g = grad_out;
  std::size_t bn = cache.xhat.size();
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const Layer& l = layers_[i];
    if (l.hidden) {
      if (cache.dropout[i].size() > 0) g = g.cwiseProduct(cache.dropout[i]);
      g = (cache.pre_act[i].array() >= 0.0).select(g, kSlope * g);
      if (l.gamma_off >= 0) {
        --bn;
        const Mat& xhat = cache.xhat[bn];
        grad.segment(l.gamma_off, l.out) = g.cwiseProduct(xhat).rowwise().sum();
        grad.segment(l.beta_off, l.out) = g.rowwise().sum();
        const Mat dxhat = g.array().colwise() * params_.segment(l.gamma_off, l.out).array();
        const Vec& inv = cache.inv_std[bn];
        if (cache.batch_stats[bn]) {
          const double n = static_cast<double>(g.cols());
          const Vec s1 = dxhat.rowwise().sum();
          const Vec s2 = dxhat.cwiseProduct(xhat).rowwise().sum();
          Mat centred = (n * dxhat).colwise() - s1;
          centred -= (xhat.array().colwise() * s2.array()).matrix();
          g = centred.array().colwise() * (inv.array() / n);
        } else {
          g = dxhat.array().colwise() * inv.array();
        }
      }
    }
    Eigen::Map<Mat>(grad.data() + l.w_off, l.out, l.in).noalias() = g * cache.inputs[i].transpose();
    grad.segment(l.b_off, l.out) = g.rowwise().sum();
    if (i > 0) {
      const Eigen::Map<const Mat> w(params_.data() + l.w_off, l.out, l.in);
      g = w.transpose() * g;
    }
  }
  return grad;
}

void MappingNet::update_running_stats(const Cache& cache) {
  const double m = config_.bn_momentum;
  for (std::size_t k = 0; k < cache.batch_mean.size() && k < running_mean_.size(); ++k) {
    if (!cache.batch_stats[k]) continue;
    const double n = static_cast<double>(cache.xhat[k].cols());
    running_mean_[k] = (1.0 - m) * running_mean_[k] + m * cache.batch_mean[k];
    running_var_[k] = (1.0 - m) * running_var_[k] + m * cache.batch_var[k] * (n / (n - 1.0));
  }
}

std::uint64_t MappingNet::digest() const {
  Digest d;
  d.str(config_.to_json().dump());
  d.span(std::span<const double>(params_.data(), static_cast<std::size_t>(params_.size())));
  for (std::size_t k = 0; k < running_mean_.size(); ++k) {
    d.span(std::span<const double>(running_mean_[k].data(), static_cast<std::size_t>(running_mean_[k].size())));
    d.span(std::span<const double>(running_var_[k].data(), static_cast<std::size_t>(running_var_[k].size())));
  }
  return d.value();
}

Checkpoint MappingNet::to_checkpoint() const {
  Checkpoint c;
  c.kind = "mapping_net";
  c.header = {{"config", config_.to_json()},
              {"nonlinearity", "leaky_relu(0.2)"},
              {"block", "linear, batch_norm?, nonlinearity, dropout?; final linear"},
              {"init", "normal fan-in"},
              {"init_seed", seed_},
              {"dtype", "float64"},
              {"param_count", params_.size()},
              {"bn_layers", running_mean_.size()}};
  std::size_t n = static_cast<std::size_t>(params_.size());
  for (const Vec& v : running_mean_) n += 2 * static_cast<std::size_t>(v.size());
  c.payload.resize(n * sizeof(double));
  std::uint8_t* p = c.payload.data();
  auto put = [&p](const Vec& v) {
    std::memcpy(p, v.data(), sizeof(double) * v.size());
    p += sizeof(double) * v.size();
  };
  put(params_);
  for (std::size_t k = 0; k < running_mean_.size(); ++k) {
    put(running_mean_[k]);
    put(running_var_[k]);
  }
  return c;
}

MappingNet MappingNet::from_checkpoint(const Checkpoint& ckpt) {
  require(ckpt.kind == "mapping_net", ErrorKind::kIo, "checkpoint is a '" + ckpt.kind + "', not a mapping_net");
  MappingNet net(MapperConfig::from_json(ckpt.header.at("config")), ckpt.header.value("init_seed", std::uint64_t{0}));
  std::size_t n = static_cast<std::size_t>(net.params_.size());
  for (const Vec& v : net.running_mean_) n += 2 * static_cast<std::size_t>(v.size());
  require(ckpt.payload.size() == n * sizeof(double), ErrorKind::kIo,
          "mapper checkpoint payload does not match its declared architecture");
  const std::uint8_t* p = ckpt.payload.data();
  auto get = [&p](Vec& v) {
    std::memcpy(v.data(), p, sizeof(double) * v.size());
    p += sizeof(double) * v.size();
  };
  get(net.params_);
  for (std::size_t k = 0; k < net.running_mean_.size(); ++k) {
    get(net.running_mean_[k]);
    get(net.running_var_[k]);
  }
  return net;
}

EditDirection edit_direction_text(const MappingNet& net, const EmbeddingVector& f_tar, const EmbeddingVector& f_piv,
                                  const SpatialCode& f_spatial, std::string target_desc, std::string pivot_desc) {
  EditDirection d;
  d.values = net.map(f_tar, f_spatial).values - net.map(f_piv, f_spatial).values;
  d.source = EditDirection::Source::kText;
  d.target_desc = std::move(target_desc);
  d.pivot_desc = std::move(pivot_desc);
  return d;
}

EditDirection edit_direction_spatial(const MappingNet& net, const EmbeddingVector& f_img,
                                     const SpatialCode& f_spatial_tar, const SpatialCode& f_spatial_piv,
                                     std::string target_desc, std::string pivot_desc) {
  EditDirection d;
  d.values = net.map(f_img, f_spatial_tar).values - net.map(f_img, f_spatial_piv).values;
  d.source = EditDirection::Source::kSpatial;
  d.target_desc = std::move(target_desc);
  d.pivot_desc = std::move(pivot_desc);
  return d;
}

}  // namespace latentface
