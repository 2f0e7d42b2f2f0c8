// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "airloom/common.hpp"
#include "airloom/geometry/mesh.hpp"
#include "airloom/geometry/points.hpp"
#include "airloom/synthdata.hpp"

namespace airloom::synth {

using geometry::Polyline;
using geometry::SketchCloud;
using geometry::TriangleMesh;
using geometry::Vec3;

namespace {

// Points drawn along the kept strokes before reduction to the sketch size.
constexpr std::size_t kDensePoints = 6144;

Vec3 centroid(const Polyline& line) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : line) c += p;
  return c / static_cast<double>(line.size());
}

// Loops of one section, longest first, skipping near-parallel copies (the
// inner and outer faces of a shell produce two almost identical loops).
std::vector<Polyline> section_strokes(const TriangleMesh& mesh, const Vec3& normal, double offset) {
  auto loops = geometry::slice_mesh(mesh, normal, offset);
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    if (loops[i].size() >= 3) order.emplace_back(-geometry::polyline_length(loops[i]), i);
  }
  std::sort(order.begin(), order.end());
  std::vector<Polyline> kept;
  std::vector<double> kept_len;
  for (const auto& [neg_len, i] : order) {
    const double len = -neg_len;
    if (!kept_len.empty() && len < 0.3 * kept_len.front()) break;
    bool duplicate = false;
    for (std::size_t k = 0; k < kept.size(); ++k) {
      if ((centroid(kept[k]) - centroid(loops[i])).norm() < 0.08 && len > 0.6 * kept_len[k]) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    kept.push_back(std::move(loops[i]));
    kept_len.push_back(len);
  }
  return kept;
}

double quantize(double v) { return std::round(v * 1e5) / 1e5; }

}  // namespace

void SketchStyle::validate() const {
  if (stroke_count < 6 || stroke_count > 40) {
    throw InvalidArgument("stroke_count = " + std::to_string(stroke_count) + " outside [6, 40]");
  }
  if (!(jitter_sigma >= 0.0 && jitter_sigma <= 0.03)) {
    throw InvalidArgument("jitter_sigma = " + std::to_string(jitter_sigma) + " outside [0, 0.03]");
  }
  if (!(drop_fraction >= 0.0 && drop_fraction <= 0.4)) {
    throw InvalidArgument("drop_fraction = " + std::to_string(drop_fraction) + " outside [0, 0.4]");
  }
}

SketchCloud make_sketch(const TriangleMesh& mesh, const SketchStyle& style) {
  style.validate();
  mesh.validate();
  if (mesh.empty()) throw InvalidArgument("make_sketch: empty mesh");
  Rng rng(derive_seed(style.seed, 0x736b6574));
  const auto box = mesh.bounds();
  const Vec3 lo = box.min, ext = box.extent();

  // Roughly 60% horizontal rings, the rest vertical sections alternating
  // between the side plane (z = 0) and front planes (x = const).
  const int rings = std::max(1, static_cast<int>(std::lround(0.6 * style.stroke_count)));
  const int verticals = std::max(1, style.stroke_count - rings);
  std::vector<Polyline> strokes;
  for (int i = 0; i < rings && static_cast<int>(strokes.size()) < style.stroke_count; ++i) {
    const double frac = 0.03 + 0.94 * (i + rng.uniform(0.25, 0.75)) / rings;
    for (auto& s : section_strokes(mesh, Vec3::UnitY(), lo.y() + frac * ext.y())) {
      if (static_cast<int>(strokes.size()) < style.stroke_count) strokes.push_back(std::move(s));
    }
  }
  for (int i = 0; i < verticals && static_cast<int>(strokes.size()) < style.stroke_count; ++i) {
    Vec3 normal;
    double offset;
    if (i % 2 == 0) {
      normal = Vec3::UnitZ();
      offset = box.center().z() + rng.uniform(-0.1, 0.1) * ext.z();
    } else {
      normal = Vec3::UnitX();
      offset = box.center().x() + rng.uniform(-0.35, 0.35) * ext.x();
    }
    for (auto& s : section_strokes(mesh, normal, offset)) {
      if (static_cast<int>(strokes.size()) < style.stroke_count) strokes.push_back(std::move(s));
    }
  }
  if (strokes.empty()) throw InvalidArgument("make_sketch: no section of the mesh produced a stroke");

  // Incompleteness: delete floor(drop_fraction * n) strokes, always keeping one.
  const auto drop = std::min(strokes.size() - 1,
                             static_cast<std::size_t>(std::floor(style.drop_fraction * strokes.size())));
  if (drop > 0) {
    std::vector<std::size_t> idx(strokes.size());
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx.begin(), idx.end());
    std::vector<bool> removed(strokes.size(), false);
    for (std::size_t k = 0; k < drop; ++k) removed[idx[k]] = true;
    std::vector<Polyline> kept;
    for (std::size_t i = 0; i < strokes.size(); ++i) {
      if (!removed[i]) kept.push_back(std::move(strokes[i]));
    }
    strokes = std::move(kept);
  }

  // Points per stroke proportional to length (largest remainder), >= 2 each.
  std::vector<double> len(strokes.size());
  for (std::size_t i = 0; i < strokes.size(); ++i) len[i] = geometry::polyline_length(strokes[i]);
  const double total_len = std::accumulate(len.begin(), len.end(), 0.0);
  std::vector<std::size_t> alloc(strokes.size());
  std::vector<std::pair<double, std::size_t>> remainder;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < strokes.size(); ++i) {
    const double share = kDensePoints * len[i] / total_len;
    alloc[i] = static_cast<std::size_t>(std::floor(share));
    assigned += alloc[i];
    remainder.emplace_back(-(share - std::floor(share)), i);
  }
  std::sort(remainder.begin(), remainder.end());
  for (std::size_t k = 0; assigned < kDensePoints; ++k, ++assigned) ++alloc[remainder[k % remainder.size()].second];
  for (auto& a : alloc) a = std::max<std::size_t>(a, 2);

  SketchCloud sketch;
  geometry::PointCloud dense;
  for (std::size_t i = 0; i < strokes.size(); ++i) {
    Polyline line = geometry::resample_polyline(strokes[i], alloc[i]);
    for (auto& p : line) {
      for (int a = 0; a < 3; ++a) {
        const double jittered = p[a] + (style.jitter_sigma > 0.0 ? style.jitter_sigma * rng.normal() : 0.0);
        p[a] = quantize(std::clamp(jittered, -1.0, 1.0));
      }
      dense.points.push_back(p);
    }
    sketch.strokes.push_back(std::move(line));
  }
  sketch.points = geometry::resample_points(dense, geometry::kSketchPoints, rng.next_u64()).points;
  return sketch;
}

}  // namespace airloom::synth
