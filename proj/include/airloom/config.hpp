// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

// Training configuration, read from TOML with sections [data], [model],
// [diffusion], [curriculum], [stage1], [stage2], [stage3]. Unknown keys are
// rejected; missing keys keep their defaults.

#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>

#include <json.hpp>

#include "airloom/curriculum.hpp"
#include "airloom/model.hpp"

namespace airloom {

struct DataConfig {
  std::filesystem::path manifest;  // relative paths resolve against the config file
  std::uint64_t seed = 0;          // model init, batch order, noise
};

struct CurriculumConfig {
  curriculum::DifficultyParams difficulty;
  curriculum::PacingParams pacing;
  int queries = 2048;           // SDF query points per sample
  int score_timestep = 100;     // t of the scoring reconstruction pass
  void validate() const;
};

enum class Optimizer { adam, adamw };
std::string to_string(Optimizer o);
Optimizer parse_optimizer(const std::string& s);

struct StageConfig {
  int stage = 1;
  Optimizer optimizer = Optimizer::adam;
  double learning_rate = 2e-4;
  int epochs = 800;
  int batch_size = 8;
  bool curriculum_enabled = false;
  std::set<std::string> frozen_components;
  void validate() const;
};

struct TrainConfig {
  DataConfig data;
  ModelConfig model;
  DiffusionConfig diffusion;
  CurriculumConfig curriculum;
  StageConfig stage1_coarse{1, Optimizer::adam, 2e-4, 800, 8, false, {}};
  StageConfig stage1_fine{1, Optimizer::adamw, 1e-4, 500, 8, false, {}};
  StageConfig stage2{2, Optimizer::adam, 2e-4, 300, 8, false, {"coarse", "fine", "pc_encoder", "null_embedding"}};
  StageConfig stage3{3, Optimizer::adam, 2e-4, 300, 8, true, {"pc_encoder"}};
  double stage3_align_weight = 1.0;  // weight of the sketch-to-point-cloud regression term
  double scale = 1.0;                // multiplies every epoch count

  /// max(1, round(epochs * scale)).
  int scaled_epochs(const StageConfig& s) const;
  void validate() const;
};

/// Parses TOML text; `base_dir` resolves a relative data.manifest.
TrainConfig parse_config(const std::string& toml_text, const std::filesystem::path& base_dir);
TrainConfig load_config(const std::filesystem::path& path);

/// Snapshot stored in checkpoints and reports.
nlohmann::json to_json(const TrainConfig& c);
/// FNV-1a of the snapshot's canonical dump.
std::string config_fingerprint(const TrainConfig& c);

}  // namespace airloom
