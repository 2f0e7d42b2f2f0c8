// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "airloom/geometry/types.hpp"

namespace airloom::geometry {

/// Half of the normalized bounding box edge: meshes are scaled so their
/// longest axis spans [-0.9, 0.9].
inline constexpr double kNormalizedHalfExtent = 0.9;

/// Number of undirected edges not shared by exactly two faces.
std::size_t open_edge_count(const TriangleMesh& mesh);

inline bool is_watertight(const TriangleMesh& mesh) {
  return !mesh.empty() && open_edge_count(mesh) == 0;
}

/// Centers the mesh at the origin and scales its longest bbox axis to 1.8.
/// Throws InvalidArgument for zero-extent meshes.
std::pair<TriangleMesh, Similarity> normalize_mesh(const TriangleMesh& mesh);

/// Area-weighted uniform surface samples, deterministic per seed.
PointCloud sample_surface(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed);

/// Closed polylines where the mesh crosses the plane dot(n, p) = offset.
/// Vertices exactly on the plane are treated as lying on the positive side.
std::vector<Polyline> slice_mesh(const TriangleMesh& mesh, const Vec3& normal, double offset);

double polyline_length(const Polyline& line);

/// Resamples a polyline at `count` points equally spaced in arc length
/// (endpoints included; a closed loop must repeat its first point to be
/// sampled around its full length).
Polyline resample_polyline(const Polyline& line, std::size_t count);

/// Geodesic sphere from a subdivided icosahedron; watertight.
TriangleMesh make_icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero());

/// Axis-aligned box with 12 outward-facing triangles.
TriangleMesh make_box(const Vec3& min, const Vec3& max);

}  // namespace airloom::geometry
