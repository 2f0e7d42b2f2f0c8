// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "airloom/geometry/types.hpp"

namespace airloom::geometry {

/// Exactly `target` points. With at least `target` inputs the result is a
/// farthest-point subset (start point drawn from the seed); with fewer, all
/// inputs are kept and random inputs are duplicated with jitter of norm at
/// most 1e-4.
PointCloud resample_points(const PointCloud& points, std::size_t target, std::uint64_t seed);

/// Indices of a farthest-point subset of size `count`, starting at `start`.
std::vector<std::size_t> farthest_point_indices(const std::vector<Vec3>& points,
                                                std::size_t count, std::size_t start);

}  // namespace airloom::geometry
