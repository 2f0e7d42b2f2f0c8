// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

// Procedural garment shells and synthetic 3D sketches drawn around them.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>

#include "airloom/dataset.hpp"
#include "airloom/geometry/types.hpp"

namespace airloom::synth {

struct GarmentParams {
  bool has_sleeves = true;
  double sleeve_length = 0.5;    // [0, 1]
  double torso_length = 0.7;     // [0.4, 1]
  double neckline_depth = 0.1;   // [0, 0.3]
  double flare = 0.2;            // [0, 0.5]
  double shell_thickness = 0.04; // [0.02, 0.06]
  std::uint64_t seed = 0;

  /// Throws InvalidArgument naming the first field outside its range.
  void validate() const;
};

struct SketchStyle {
  int stroke_count = 20;       // [6, 40]
  double jitter_sigma = 0.0;   // [0, 0.03]
  double drop_fraction = 0.0;  // [0, 0.4]
  std::uint64_t seed = 0;

  void validate() const;
};

/// Watertight, normalized garment shell. The torso is a flared elliptic tube
/// with a domed yoke, open at the hem and neck; sleeves are open tubes.
/// Deterministic per params (including seed).
geometry::TriangleMesh make_garment(const GarmentParams& params);

/// Strokes along horizontal rings and vertical seam sections of the mesh,
/// with a fraction dropped and Gaussian jitter applied, resampled to 4096
/// points. Coordinates are quantized to 1e-5.
geometry::SketchCloud make_sketch(const geometry::TriangleMesh& mesh, const SketchStyle& style);

/// Parameters drawn for sample `index` of a corpus with the given seed.
GarmentParams sample_params(std::uint64_t seed, std::size_t index);
SketchStyle sample_style(std::uint64_t seed, std::size_t index);

struct GenerateOptions {
  int resolution = 32;
  int coarse_resolution = 16;
  float truncation = 0.1f;
  /// Called after each sample is written with (done, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

/// Writes `count` samples plus manifest.jsonl under out_dir, split 8:2 with
/// the same seed. Byte-identical output for identical arguments.
dataset::Manifest generate_dataset(std::size_t count, std::uint64_t seed,
                                   const std::filesystem::path& out_dir,
                                   const GenerateOptions& options = {});

}  // namespace airloom::synth
