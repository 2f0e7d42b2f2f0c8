// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

// A checkpoint is a directory:
//   weights.bin  "AIRLOOMW", u32 version, u32 stage, u64 count, then per
//                tensor in name order: u32 name length, name, u32 rank,
//                i64 dims, float32 data (all little-endian)
//   ckpt.json    stage, resolutions, T, band_width, dropout, data seed,
//                model and diffusion configs, config snapshot, weights hash

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "airloom/model.hpp"

namespace airloom {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  int stage = 0;  // 0 = untrained, 1..3 = last completed stage
  GarmentModel model{nullptr};
  DiffusionConfig diffusion;
  std::uint64_t data_seed = 0;
  nlohmann::json config_snapshot = nlohmann::json::object();

  /// "s<stage>-<12 hex digits of the weights hash>".
  std::string id() const;
};

/// Serialized weights; also the input of the content hash.
std::string serialize_weights(const GarmentModel& model, int stage);

/// Deep copy (parameters cloned).
Checkpoint clone_checkpoint(const Checkpoint& c);

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& dir);

/// Throws IoError on unreadable files and InvalidArgument on version,
/// stage or hash mismatches between weights.bin and ckpt.json.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

/// Names of parameters whose bytes differ between two models of the same shape.
std::vector<std::string> differing_parameters(const GarmentModel& a, const GarmentModel& b);

}  // namespace airloom
