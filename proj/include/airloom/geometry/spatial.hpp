// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "airloom/geometry/types.hpp"

namespace airloom::geometry {

/// Closest point on triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Static k-d tree over a point set for exact nearest-neighbor queries.
class PointIndex {
 public:
  explicit PointIndex(std::vector<Vec3> points);

  struct Hit {
    std::size_t index = 0;
    double squared_distance = 0.0;
  };

  /// Exact nearest neighbor; the point set must be non-empty.
  Hit nearest(const Vec3& query) const;

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

 private:
  struct Node {
    std::uint32_t begin = 0, end = 0;  // range into order_
    std::int32_t left = -1, right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Vec3& q, Hit& best) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// Unsigned point-to-surface distance accelerated by a uniform grid of
/// triangle buckets.
class MeshDistance {
 public:
  explicit MeshDistance(const TriangleMesh& mesh, int buckets_per_axis = 32);

  /// Exact distance to the closest triangle.
  double distance(const Vec3& p) const;

 private:
  const TriangleMesh& mesh_;
  BBox box_;
  int res_;
  Vec3 cell_;
  std::vector<std::uint32_t> start_;
  std::vector<std::uint32_t> tris_;
};

}  // namespace airloom::geometry
