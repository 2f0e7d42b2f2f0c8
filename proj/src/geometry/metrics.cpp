// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/geometry/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "airloom/common.hpp"
#include "airloom/geometry/spatial.hpp"

namespace airloom::geometry {

double voxel_iou(const OccupancyGrid& a, const OccupancyGrid& b) {
  a.validate_shape();
  b.validate_shape();
  if (a.resolution != b.resolution) {
    throw InvalidArgument("voxel_iou: resolution mismatch (" + std::to_string(a.resolution) +
                          " vs " + std::to_string(b.resolution) + ")");
  }
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    const bool x = a.bits[i] != 0, y = b.bits[i] != 0;
    inter += (x && y) ? 1 : 0;
    uni += (x || y) ? 1 : 0;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

double directed_mean_sq(const std::vector<Vec3>& from, const PointIndex& to) {
  double sum = 0.0;
  for (const auto& p : from) sum += to.nearest(p).squared_distance;
  return sum / static_cast<double>(from.size());
}

}  // namespace

double chamfer_distance(const PointCloud& p, const PointCloud& q) {
  if (p.points.empty() || q.points.empty()) {
    throw InvalidArgument("chamfer_distance: point clouds must be non-empty");
  }
  const PointIndex pi(p.points), qi(q.points);
  return directed_mean_sq(p.points, qi) + directed_mean_sq(q.points, pi);
}

}  // namespace airloom::geometry
