// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>

#include "airloom/common.hpp"
#include "airloom/geometry/sdf.hpp"
#include "airloom/synthdata.hpp"

namespace airloom::synth {

GarmentParams sample_params(std::uint64_t seed, std::size_t index) {
  Rng rng(derive_seed(derive_seed(seed, 0x70617261), index));
  GarmentParams p;
  p.has_sleeves = rng.bernoulli(0.6);
  p.sleeve_length = rng.uniform(0.0, 1.0);
  p.torso_length = rng.uniform(0.4, 1.0);
  p.neckline_depth = rng.uniform(0.0, 0.3);
  p.flare = rng.uniform(0.0, 0.5);
  p.shell_thickness = rng.uniform(0.02, 0.06);
  p.seed = rng.next_u64();
  return p;
}

SketchStyle sample_style(std::uint64_t seed, std::size_t index) {
  Rng rng(derive_seed(derive_seed(seed, 0x7374796c), index));
  SketchStyle s;
  s.stroke_count = 12 + static_cast<int>(rng.index(17));
  s.jitter_sigma = rng.uniform(0.0, 0.01);
  s.drop_fraction = rng.uniform(0.0, 0.2);
  s.seed = rng.next_u64();
  return s;
}

dataset::Manifest generate_dataset(std::size_t count, std::uint64_t seed,
                                   const std::filesystem::path& out_dir,
                                   const GenerateOptions& options) {
  if (count == 0) throw InvalidArgument("generate_dataset: count must be positive");
  if (options.coarse_resolution <= 0 || options.resolution % options.coarse_resolution != 0) {
    throw InvalidArgument("coarse resolution must divide the fine resolution");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  dataset::Manifest manifest;
  manifest.root = out_dir;
  for (std::size_t i = 0; i < count; ++i) {
    const auto params = sample_params(seed, i);
    const auto style = sample_style(seed, i);
    char id[32];
    std::snprintf(id, sizeof(id), "g%05zu", i);

    dataset::Sample s;
    s.id = id;
    s.mesh = make_garment(params);
    s.sketch = make_sketch(s.mesh, style);
    s.sdf = geometry::mesh_to_sdf_grid(s.mesh, options.resolution, options.truncation);
    s.coarse = geometry::downsample_occupancy(geometry::occupancy_from_sdf(s.sdf),
                                              options.resolution / options.coarse_resolution);
    auto rec = dataset::write_sample(s, out_dir);
    rec.params = {{"has_sleeves", params.has_sleeves},
                  {"sleeve_length", params.sleeve_length},
                  {"torso_length", params.torso_length},
                  {"neckline_depth", params.neckline_depth},
                  {"flare", params.flare},
                  {"shell_thickness", params.shell_thickness},
                  {"garment_seed", params.seed},
                  {"stroke_count", style.stroke_count},
                  {"jitter_sigma", style.jitter_sigma},
                  {"drop_fraction", style.drop_fraction},
                  {"sketch_seed", style.seed}};
    manifest.records.push_back(std::move(rec));
    if (options.progress) options.progress(i + 1, count);
  }
  if (manifest.records.size() >= 5) manifest = dataset::split_manifest(manifest, {}, seed);
  dataset::write_manifest(manifest, out_dir / "manifest.jsonl");
  return manifest;
}

}  // namespace airloom::synth
