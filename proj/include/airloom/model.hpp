// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

// The full generator: coarse and fine denoisers, both condition encoders and
// the learned null condition, plus the configuration needed to rebuild it.

#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <json.hpp>
#include <string>

#include "airloom/conditioning.hpp"
#include "airloom/geometry/types.hpp"
#include "airloom/nn.hpp"

namespace airloom {

struct ModelConfig {
  int coarse_resolution = 16;
  int fine_resolution = 32;
  float truncation = 0.1f;
  int band_width = 3;
  EncoderConfig encoder;
  nn::UNetConfig coarse{2, 1, {16, 32, 48, 64, 64}, {false, false, true, true, true}};
  nn::UNetConfig fine{4, 1, {8, 16, 32, 64}, {false, false, true, true}};
  void validate() const;
};

struct DiffusionConfig {
  int timesteps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  int sampling_steps = 50;
  double guidance = 3.0;
  double cond_dropout = 0.1;
  double self_cond_prob = 0.5;
  void validate() const;
};

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DiffusionConfig& c);
DiffusionConfig diffusion_config_from_json(const nlohmann::json& j);

class GarmentModelImpl : public torch::nn::Module {
 public:
  /// Parameters are initialized from `seed` only.
  GarmentModelImpl(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }

  nn::UNet3d coarse{nullptr};
  nn::UNet3d fine{nullptr};
  PointEncoder pc_encoder{nullptr};
  PointEncoder sketch_encoder{nullptr};
  torch::Tensor null_embedding;  // [1024]

 private:
  ModelConfig cfg_;
};
TORCH_MODULE(GarmentModel);

/// Parameter-name prefixes of the five trainable groups.
inline constexpr const char* kCoarseGroup = "coarse.";
inline constexpr const char* kFineGroup = "fine.";
inline constexpr const char* kPointCloudGroup = "pc_encoder.";
inline constexpr const char* kSketchGroup = "sketch_encoder.";
inline constexpr const char* kNullGroup = "null_embedding";

/// Parameters whose name starts with `prefix`, in registration order.
std::vector<torch::Tensor> group_parameters(const GarmentModel& model, const std::string& prefix);

ConditionEmbedding encode_pointcloud(GarmentModel& model, const geometry::PointCloud& pc, EncodeMode mode);
/// Throws unless the sketch has exactly 4096 points.
ConditionEmbedding encode_sketch(GarmentModel& model, const geometry::SketchCloud& sk, EncodeMode mode);
ConditionEmbedding null_embedding(const GarmentModel& model);

/// Copies the point-cloud encoder weights into the sketch encoder.
void init_sketch_from_pointcloud(GarmentModel& model);

}  // namespace airloom
