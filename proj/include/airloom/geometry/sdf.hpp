// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "airloom/geometry/types.hpp"

namespace airloom::geometry {

/// Default truncation of signed distances, in normalized units.
inline constexpr float kDefaultTruncation = 0.1f;

/// Truncated signed distance sampled at cell centers. Magnitude is the exact
/// distance to the closest triangle (clamped to the truncation); the sign is
/// negative inside, decided by a majority vote of ray-parity along +x, +y, +z.
/// The mesh must be watertight; otherwise InvalidArgument names the number of
/// open edges.
SDFGrid mesh_to_sdf_grid(const TriangleMesh& mesh, int resolution,
                         float truncation = kDefaultTruncation,
                         const BBox& bbox = BBox::unit());

/// Bit set iff value < 0.
OccupancyGrid occupancy_from_sdf(const SDFGrid& grid);

/// Block-OR pooling by an integer factor dividing the resolution.
OccupancyGrid downsample_occupancy(const OccupancyGrid& occ, int factor);

/// Nearest-neighbor upsampling (each voxel becomes a factor^3 block).
OccupancyGrid upsample_occupancy(const OccupancyGrid& occ, int factor);

/// Marching cubes over the cell-center lattice. Vertices are placed on
/// lattice edges by linear interpolation and shared between neighboring
/// cubes. Returns an empty mesh when nothing crosses `iso`.
TriangleMesh extract_mesh(const SDFGrid& grid, float iso = 0.0f);

}  // namespace airloom::geometry
