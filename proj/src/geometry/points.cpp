// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/geometry/points.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "airloom/common.hpp"

namespace airloom::geometry {

std::vector<std::size_t> farthest_point_indices(const std::vector<Vec3>& points,
                                                std::size_t count, std::size_t start) {
  const std::size_t n = points.size();
  if (count > n) throw InvalidArgument("farthest point sampling: count exceeds point count");
  std::vector<std::size_t> picked;
  if (count == 0) return picked;
  picked.reserve(count);
  std::vector<double> d(n, std::numeric_limits<double>::infinity());
  std::size_t cur = start;
  for (std::size_t k = 0; k < count; ++k) {
    picked.push_back(cur);
    const Vec3 c = points[cur];
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = std::min(d[i], (points[i] - c).squaredNorm());
      if (d[i] > best_d) {
        best_d = d[i];
        best = i;
      }
    }
    cur = best;
  }
  return picked;
}

PointCloud resample_points(const PointCloud& points, std::size_t target, std::uint64_t seed) {
  if (points.points.empty()) throw InvalidArgument("resample_points: empty input");
  if (target == 0) throw InvalidArgument("resample_points: target must be positive");
  Rng rng(seed);
  const auto& in = points.points;
  PointCloud out;
  out.points.reserve(target);
  if (in.size() >= target) {
    const auto start = static_cast<std::size_t>(rng.index(in.size()));
    for (auto i : farthest_point_indices(in, target, start)) out.points.push_back(in[i]);
    return out;
  }
  out.points = in;
  // Uniform offsets in a cube of half-side 1e-4/sqrt(3) have norm <= 1e-4.
  const double half = 1e-4 / std::sqrt(3.0);
  while (out.points.size() < target) {
    const Vec3& src = in[rng.index(in.size())];
    Vec3 p;
    for (int a = 0; a < 3; ++a) {
      p[a] = std::clamp(src[a] + rng.uniform(-half, half), -1.0, 1.0);
    }
    out.points.push_back(p);
  }
  return out;
}

}  // namespace airloom::geometry
