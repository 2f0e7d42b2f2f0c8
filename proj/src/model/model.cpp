// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/model.hpp"

#include <cstring>

#include "airloom/common.hpp"

namespace airloom {

using nlohmann::json;

void ModelConfig::validate() const {
  if (coarse_resolution < 2 || fine_resolution < coarse_resolution) {
    throw InvalidArgument("model: resolutions must satisfy 2 <= coarse <= fine");
  }
  if (fine_resolution % coarse_resolution != 0) {
    throw InvalidArgument("model: fine_resolution must be divisible by coarse_resolution");
  }
  if (!(truncation > 0.0f)) throw InvalidArgument("model: truncation must be positive");
  if (band_width < 1) throw InvalidArgument("model: band_width must be positive");
  encoder.validate();
  coarse.validate();
  fine.validate();
  if (coarse.in_channels != 2) throw InvalidArgument("model: coarse denoiser takes 2 input channels");
  if (fine.in_channels != 4) throw InvalidArgument("model: fine denoiser takes 4 input channels");
  if (coarse.out_channels != 1 || fine.out_channels != 1) throw InvalidArgument("model: denoisers emit 1 channel");
  if (coarse_resolution % (1 << (coarse.levels() - 1)) != 0 || fine_resolution % (1 << (fine.levels() - 1)) != 0) {
    throw InvalidArgument("model: resolution not divisible by 2^(levels-1)");
  }
}

void DiffusionConfig::validate() const {
  if (timesteps < 10) throw InvalidArgument("diffusion: timesteps must be >= 10");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw InvalidArgument("diffusion: need 0 < beta_start <= beta_end < 1");
  }
  if (sampling_steps < 1 || sampling_steps > timesteps) {
    throw InvalidArgument("diffusion: sampling_steps must lie in [1, timesteps]");
  }
  if (!(guidance >= 0.0) || !std::isfinite(guidance)) throw InvalidArgument("diffusion: guidance must be >= 0");
  if (!(cond_dropout >= 0.0 && cond_dropout <= 1.0)) throw InvalidArgument("diffusion: cond_dropout in [0, 1]");
  if (!(self_cond_prob >= 0.0 && self_cond_prob <= 1.0)) throw InvalidArgument("diffusion: self_cond_prob in [0, 1]");
}

namespace {

json unet_json(const nn::UNetConfig& c) {
  return {{"in_channels", c.in_channels},   {"out_channels", c.out_channels}, {"channels", c.channels},
          {"attention", c.attention},       {"time_dim", c.time_dim},         {"context_tokens", c.context_tokens},
          {"context_dim", c.context_dim},   {"heads", c.heads},               {"groups", c.groups}};
}

nn::UNetConfig unet_from_json(const json& j) {
  nn::UNetConfig c;
  c.in_channels = j.at("in_channels").get<int>();
  c.out_channels = j.at("out_channels").get<int>();
  c.channels = j.at("channels").get<std::vector<int>>();
  c.attention = j.at("attention").get<std::vector<bool>>();
  c.time_dim = j.at("time_dim").get<int>();
  c.context_tokens = j.at("context_tokens").get<int>();
  c.context_dim = j.at("context_dim").get<int>();
  c.heads = j.at("heads").get<int>();
  c.groups = j.at("groups").get<int>();
  return c;
}

}  // namespace

json to_json(const ModelConfig& c) {
  return {{"coarse_resolution", c.coarse_resolution},
          {"fine_resolution", c.fine_resolution},
          {"truncation", c.truncation},
          {"band_width", c.band_width},
          {"encoder",
           {{"token_count", c.encoder.token_count},
            {"layers", c.encoder.layers},
            {"heads", c.encoder.heads},
            {"width", c.encoder.width},
            {"neighbors", c.encoder.neighbors}}},
          {"coarse", unet_json(c.coarse)},
          {"fine", unet_json(c.fine)}};
}

ModelConfig model_config_from_json(const json& j) {
  try {
    ModelConfig c;
    c.coarse_resolution = j.at("coarse_resolution").get<int>();
    c.fine_resolution = j.at("fine_resolution").get<int>();
    c.truncation = j.at("truncation").get<float>();
    c.band_width = j.at("band_width").get<int>();
    const auto& e = j.at("encoder");
    c.encoder.token_count = e.at("token_count").get<int>();
    c.encoder.layers = e.at("layers").get<int>();
    c.encoder.heads = e.at("heads").get<int>();
    c.encoder.width = e.at("width").get<int>();
    c.encoder.neighbors = e.at("neighbors").get<int>();
    c.coarse = unet_from_json(j.at("coarse"));
    c.fine = unet_from_json(j.at("fine"));
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("model config: ") + e.what());
  }
}

json to_json(const DiffusionConfig& c) {
  return {{"timesteps", c.timesteps},       {"beta_start", c.beta_start},     {"beta_end", c.beta_end},
          {"sampling_steps", c.sampling_steps}, {"guidance", c.guidance},     {"cond_dropout", c.cond_dropout},
          {"self_cond_prob", c.self_cond_prob}};
}

DiffusionConfig diffusion_config_from_json(const json& j) {
  try {
    DiffusionConfig c;
    c.timesteps = j.at("timesteps").get<int>();
    c.beta_start = j.at("beta_start").get<double>();
    c.beta_end = j.at("beta_end").get<double>();
    c.sampling_steps = j.at("sampling_steps").get<int>();
    c.guidance = j.at("guidance").get<double>();
    c.cond_dropout = j.at("cond_dropout").get<double>();
    c.self_cond_prob = j.at("self_cond_prob").get<double>();
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("diffusion config: ") + e.what());
  }
}

GarmentModelImpl::GarmentModelImpl(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  torch::manual_seed(seed);
  coarse = register_module("coarse", nn::UNet3d(cfg_.coarse));
  fine = register_module("fine", nn::UNet3d(cfg_.fine));
  pc_encoder = register_module("pc_encoder", PointEncoder(cfg_.encoder));
  sketch_encoder = register_module("sketch_encoder", PointEncoder(cfg_.encoder));
  null_embedding = register_parameter("null_embedding", torch::randn({nn::kConditionDim}) * 0.02);
}

std::vector<torch::Tensor> group_parameters(const GarmentModel& model, const std::string& prefix) {
  std::vector<torch::Tensor> out;
  for (const auto& item : model->named_parameters()) {
    if (item.key().rfind(prefix, 0) == 0) out.push_back(item.value());
  }
  return out;
}

namespace {

ConditionEmbedding to_embedding(const torch::Tensor& t, EmbeddingSource source) {
  auto c = t.detach().contiguous().to(torch::kFloat32);
  ConditionEmbedding e;
  e.source = source;
  e.vector.assign(c.data_ptr<float>(), c.data_ptr<float>() + c.numel());
  e.validate();
  return e;
}

}  // namespace

ConditionEmbedding encode_pointcloud(GarmentModel& model, const geometry::PointCloud& pc, EncodeMode mode) {
  return to_embedding(encode_points(model->pc_encoder, pc.points, mode), EmbeddingSource::pointcloud);
}

ConditionEmbedding encode_sketch(GarmentModel& model, const geometry::SketchCloud& sk, EncodeMode mode) {
  if (sk.points.size() != geometry::kSketchPoints) {
    throw InvalidArgument("encode_sketch: expected 4096 points, got " + std::to_string(sk.points.size()));
  }
  return to_embedding(encode_points(model->sketch_encoder, sk.points, mode), EmbeddingSource::sketch);
}

ConditionEmbedding null_embedding(const GarmentModel& model) {
  return to_embedding(model->null_embedding, EmbeddingSource::null);
}

void init_sketch_from_pointcloud(GarmentModel& model) {
  torch::NoGradGuard ng;
  auto src = model->pc_encoder->named_parameters();
  auto dst = model->sketch_encoder->named_parameters();
  for (const auto& item : src) dst[item.key()].copy_(item.value());
}

}  // namespace airloom
