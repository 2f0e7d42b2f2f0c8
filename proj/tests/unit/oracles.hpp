// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

// Slow, obviously-correct reference implementations used by the unit tests.

#pragma once

#include <algorithm>
#include <limits>
#include <iterator>
#include <set>
#include <tuple>
#include <vector>

#include "airloom/common.hpp"
#include "airloom/geometry/types.hpp"

namespace oracle {

using airloom::geometry::OccupancyGrid;
using airloom::geometry::PointCloud;
using airloom::geometry::TriangleMesh;
using airloom::geometry::Vec3;

inline OccupancyGrid block_or(const OccupancyGrid& g, int factor) {
  const int r = g.resolution / factor;
  OccupancyGrid out(r);
  for (int x = 0; x < g.resolution; ++x)
    for (int y = 0; y < g.resolution; ++y)
      for (int z = 0; z < g.resolution; ++z)
        if (g.at(x, y, z)) out.set(x / factor, y / factor, z / factor, true);
  return out;
}

inline double iou_by_sets(const OccupancyGrid& a, const OccupancyGrid& b) {
  using Cell = std::tuple<int, int, int>;
  std::set<Cell> sa, sb, inter, uni;
  const int r = a.resolution;
  for (int x = 0; x < r; ++x)
    for (int y = 0; y < r; ++y)
      for (int z = 0; z < r; ++z) {
        if (a.at(x, y, z)) sa.emplace(x, y, z);
        if (b.at(x, y, z)) sb.emplace(x, y, z);
      }
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(inter, inter.end()));
  std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(uni, uni.end()));
  if (uni.empty()) return 1.0;
  return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

inline PointCloud random_cloud(airloom::Rng& rng, std::size_t n) {
  PointCloud pc;
  for (std::size_t i = 0; i < n; ++i) pc.points.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  return pc;
}

inline double chamfer_brute_force(const PointCloud& p, const PointCloud& q) {
  auto directed = [](const PointCloud& a, const PointCloud& b) {
    double sum = 0.0;
    for (const auto& x : a.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : b.points) best = std::min(best, (x - y).squaredNorm());
      sum += best;
    }
    return sum / static_cast<double>(a.points.size());
  };
  return directed(p, q) + directed(q, p);
}

// Greedy farthest-point selection recomputing every set distance from scratch;
// ties go to the lowest index.
inline std::vector<std::size_t> greedy_farthest(const std::vector<Vec3>& pts, std::size_t k, std::size_t start) {
  std::vector<std::size_t> chosen{start};
  while (chosen.size() < k) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (auto c : chosen) d = std::min(d, (pts[i] - pts[c]).squaredNorm());
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    chosen.push_back(best);
  }
  return chosen;
}

// Distance to a triangle by projecting onto the plane when inside, else the
// minimum over the three edge segments.
inline double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a);
  if (n.squaredNorm() > 0) {
    const Vec3 u = n.normalized();
    const Vec3 proj = p - u * (p - a).dot(u);
    const double s0 = (b - a).cross(proj - a).dot(n);
    const double s1 = (c - b).cross(proj - b).dot(n);
    const double s2 = (a - c).cross(proj - c).dot(n);
    if (s0 >= 0 && s1 >= 0 && s2 >= 0) return std::abs((p - a).dot(u));
  }
  auto seg = [&](const Vec3& s, const Vec3& e) {
    const Vec3 d = e - s;
    const double len2 = d.squaredNorm();
    const double t = len2 > 0 ? std::clamp((p - s).dot(d) / len2, 0.0, 1.0) : 0.0;
    return (p - (s + t * d)).norm();
  };
  return std::min({seg(a, b), seg(b, c), seg(c, a)});
}

inline double mesh_distance_brute_force(const TriangleMesh& m, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : m.faces) {
    best = std::min(best, point_triangle_distance(p, m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]]));
  }
  return best;
}

}  // namespace oracle
