// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

// On-disk corpus layout:
//   manifest.jsonl            one JSON record per line
//   <id>/mesh.obj             normalized watertight mesh
//   <id>/sketch.json          {"strokes": [[[x,y,z],...],...], "points": [[x,y,z] x 4096]}
//   <id>/sdf_<R>.f32          truncated SDF, little-endian float32, index (x*R + y)*R + z
//   <id>/occ_<r>.u8           coarse occupancy, one byte per voxel, same ordering
//   <id>/meta.json            {"resolution", "coarse_resolution", "truncation", "bbox"}

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "airloom/geometry/types.hpp"

namespace airloom::dataset {

inline constexpr int kFormatVersion = 1;

enum class Split { train, test };

std::string to_string(Split s);
Split parse_split(const std::string& s);

struct Sample {
  std::string id;
  geometry::TriangleMesh mesh;
  geometry::SketchCloud sketch;
  geometry::SDFGrid sdf;
  geometry::OccupancyGrid coarse;

  /// Throws InvalidArgument naming the failed invariant.
  void validate() const;
};

struct SampleRecord {
  std::string id;
  Split split = Split::train;
  std::string mesh_path, sketch_path, sdf_path, occ_path, meta_path;  // relative to the corpus root
  nlohmann::json params = nlohmann::json::object();

  bool operator==(const SampleRecord&) const = default;
};

struct Manifest {
  std::vector<SampleRecord> records;
  int format_version = kFormatVersion;
  std::filesystem::path root;  // directory holding manifest.jsonl; not serialized

  std::size_t count(Split s) const;
  std::vector<SampleRecord> of(Split s) const;
};

struct SplitRatio {
  int train = 8;
  int test = 2;
};

/// Validates the sample and writes it under root/<id>/. The returned record
/// has split = train until split_manifest assigns one.
SampleRecord write_sample(const Sample& sample, const std::filesystem::path& root);

/// Reads and revalidates one sample; errors name the id and offending path.
Sample read_sample(const std::filesystem::path& root, const SampleRecord& record);

/// Seeded shuffle assigning round(n * train / (train + test)) records to the
/// train split; record order is preserved. Needs at least 5 records.
Manifest split_manifest(const Manifest& manifest, SplitRatio ratio, std::uint64_t seed);

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

/// Loads every sample of one split in manifest order.
std::vector<Sample> load_split(const Manifest& manifest, Split split);

/// sketch.json text. Coordinates use the shortest round-trip representation.
std::string sketch_to_json(const geometry::SketchCloud& sketch);
/// Parses sketch.json; `points` may have any length here, callers validate.
geometry::SketchCloud sketch_from_json(const std::string& text);

/// Surface point cloud used as the stage-1 condition of a sample.
geometry::PointCloud conditioning_cloud(const Sample& sample, std::uint64_t seed);

}  // namespace airloom::dataset
