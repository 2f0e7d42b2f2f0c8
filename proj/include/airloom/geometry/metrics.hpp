// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "airloom/geometry/types.hpp"

namespace airloom::geometry {

/// |a AND b| / |a OR b|; 1.0 when both grids are empty.
double voxel_iou(const OccupancyGrid& a, const OccupancyGrid& b);

/// Symmetric chamfer distance with squared nearest-neighbor distances:
/// mean_p min_q |p-q|^2 + mean_q min_p |q-p|^2.
double chamfer_distance(const PointCloud& p, const PointCloud& q);

}  // namespace airloom::geometry
