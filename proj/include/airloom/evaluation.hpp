// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "airloom/checkpoint.hpp"
#include "airloom/config.hpp"
#include "airloom/dataset.hpp"
#include "airloom/diffusion.hpp"

namespace airloom {

/// Surface samples per mesh for the chamfer distance, and their fixed seed.
inline constexpr std::size_t kChamferSamples = 4096;
inline constexpr std::uint64_t kChamferSeed = 0x43686d66;

struct SampleMetrics {
  std::string id;
  double iou = 0.0;
  double cd = 0.0;
  std::size_t faces = 0;
};

struct EvalReport {
  std::vector<SampleMetrics> samples;
  double mean_iou = 0.0;
  double mean_cd = 0.0;
  std::string config_fingerprint;
  std::string checkpoint_id;
  std::string split;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  std::string table() const;
  std::string csv() const;
};

/// IoU of fine occupancies and chamfer distance of 4096-point surface
/// samples. An empty predicted mesh is scored as a single point at the origin.
SampleMetrics score_prediction(const std::string& id, const geometry::SDFGrid& pred_sdf,
                               const geometry::TriangleMesh& pred_mesh, const dataset::Sample& truth);

/// Arithmetic means over samples.
EvalReport summarize(std::vector<SampleMetrics> samples);

struct EvalOptions {
  double guidance = 3.0;
  int steps = 50;
  std::function<void(const std::string&)> log;
};

/// Encodes each sketch, generates with seed derive_seed(seed, fnv1a(id)) and
/// scores against the ground truth. Needs a stage 2 or 3 checkpoint.
EvalReport evaluate(Checkpoint& ckpt, const std::vector<dataset::Sample>& samples, std::uint64_t seed,
                    const EvalOptions& opts = {});
EvalReport evaluate(Checkpoint& ckpt, const dataset::Manifest& manifest, dataset::Split split, std::uint64_t seed,
                    const EvalOptions& opts = {});

inline const std::vector<std::string> kAblationVariants = {"no-prior", "no-curriculum", "full"};

struct AblationOptions {
  std::vector<std::string> variants = kAblationVariants;
  std::filesystem::path work_dir;  // checkpoints and traces per seed/variant; empty = keep nothing
  EvalOptions eval;
};

struct AblationRow {
  std::string variant;
  std::string config_fingerprint;
  std::vector<double> iou;  // per seed
  std::vector<double> cd;
  double median_iou = 0.0;
  double median_cd = 0.0;
};

struct AblationTable {
  std::vector<std::uint64_t> seeds;
  std::vector<AblationRow> rows;
  const AblationRow& row(const std::string& variant) const;
  nlohmann::json to_json() const;
  std::string table() const;
  std::string csv() const;
};

double median(std::vector<double> v);

/// Trains and evaluates the variants for each seed: no-prior runs stage 3
/// only, no-curriculum runs stages 1-3 with the stage-3 curriculum off, full
/// runs stages 1-3 as configured. Stages 1-2 are shared within a seed.
AblationTable ablation_run(const TrainConfig& base, const dataset::Manifest& manifest,
                           const std::vector<std::uint64_t>& seeds, const AblationOptions& opts = {});

}  // namespace airloom
