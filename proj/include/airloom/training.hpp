// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

// Three-stage training: (1) denoisers and point-cloud encoder under
// point-cloud conditions, (2) sketch encoder regressed onto the frozen
// point-cloud embeddings, (3) joint fine-tuning under sketch conditions with
// the adaptive curriculum.

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "airloom/checkpoint.hpp"
#include "airloom/config.hpp"
#include "airloom/dataset.hpp"
#include "airloom/diffusion.hpp"

namespace airloom {

/// Raised when training cannot continue (non-finite loss, stage gating).
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// One training sample with everything precomputed for the model config.
struct TrainItem {
  std::string id;
  PointTokens pc_tokens;      // from the mesh-surface conditioning cloud
  PointTokens sketch_tokens;
  torch::Tensor coarse_z0;    // [1, r, r, r] occupancy field
  torch::Tensor fine_z0;      // [1, R, R, R] sdf / truncation on the band, inactive fill elsewhere
  torch::Tensor coarse_up;    // [1, R, R, R] upsampled coarse occupancy field
  torch::Tensor band;         // [1, R, R, R] active mask
  std::vector<std::int64_t> query_index;  // curriculum query voxels (flat fine indices)
  std::vector<float> query_sdf;           // their ground-truth SDF
};

struct TrainingData {
  std::vector<TrainItem> items;
  std::map<std::string, std::size_t> index;  // id -> position
  std::vector<std::string> ids() const;
  const TrainItem& at(const std::string& id) const;
};

TrainingData prepare_training_data(const std::vector<dataset::Sample>& samples, const TrainConfig& cfg);
/// Loads one split of a manifest; throws TrainingError when it is empty.
TrainingData load_training_data(const dataset::Manifest& manifest, dataset::Split split, const TrainConfig& cfg);

/// Batch tensors of one stage; `cond` is [B, 1024].
StageBatch make_stage_batch(const TrainingData& data, const std::vector<std::string>& ids, Stage stage,
                            const torch::Tensor& cond);

/// Shuffled order of `ids` for one epoch, chunked into batches.
std::vector<std::vector<std::string>> plain_batches(const std::vector<std::string>& ids, std::uint64_t seed,
                                                    int stage, int epoch, int batch_size);

struct TrainOptions {
  std::filesystem::path log_dir;                   // loss/curriculum traces; empty = none
  std::function<void(const std::string&)> log;     // progress lines; may be empty
};

Checkpoint make_initial_checkpoint(const TrainConfig& cfg);

Checkpoint run_stage1(const TrainConfig& cfg, const TrainingData& data, const TrainOptions& opts = {});
/// Requires a stage-1 checkpoint.
Checkpoint run_stage2(const TrainConfig& cfg, const TrainingData& data, const Checkpoint& stage1,
                      const TrainOptions& opts = {});
/// Requires a stage-2 checkpoint.
Checkpoint run_stage3(const TrainConfig& cfg, const TrainingData& data, const Checkpoint& stage2,
                      const TrainOptions& opts = {});
/// Stage 3 without any pre-training (untrained input, no regression term).
Checkpoint run_stage3_from_scratch(const TrainConfig& cfg, const TrainingData& data, const TrainOptions& opts = {});

/// Denoising loss of one stage over all items with fixed noise, stratified
/// timesteps, point-cloud conditions and no dropout or self-conditioning.
double fixed_batch_loss(GarmentModel& model, const TrainingData& data, const NoiseSchedule& sched, Stage stage,
                        std::uint64_t seed);

/// Curriculum difficulty of each listed sample under `cond` ([B, 1024]).
std::map<std::string, double> curriculum_scores(GarmentModel& model, const TrainingData& data,
                                                const std::vector<std::string>& ids, const torch::Tensor& cond,
                                                const NoiseSchedule& sched, const TrainConfig& cfg);

/// Point-cloud embeddings of the listed items, eval mode, [B, 1024].
torch::Tensor pointcloud_conditions(GarmentModel& model, const TrainingData& data, const std::vector<std::string>& ids);
/// Sketch embeddings, eval mode.
torch::Tensor sketch_conditions(GarmentModel& model, const TrainingData& data, const std::vector<std::string>& ids);

}  // namespace airloom
