// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/geometry/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "airloom/common.hpp"

namespace airloom::geometry {

// Ericson, Real-Time Collision Detection, 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

PointIndex::PointIndex(std::vector<Vec3> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t PointIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= 8) return id;

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (auto i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const auto mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[order_[mid]][axis];
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void PointIndex::search(std::int32_t id, const Vec3& q, Hit& best) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (auto i = node.begin; i < node.end; ++i) {
      const double d = (points_[order_[i]] - q).squaredNorm();
      if (d < best.squared_distance ||
          (d == best.squared_distance && order_[i] < best.index)) {
        best = {order_[i], d};
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const auto near = diff < 0.0 ? node.left : node.right;
  const auto far = diff < 0.0 ? node.right : node.left;
  search(near, q, best);
  if (diff * diff <= best.squared_distance) search(far, q, best);
}

PointIndex::Hit PointIndex::nearest(const Vec3& query) const {
  if (points_.empty()) throw InvalidArgument("nearest neighbor query on an empty point set");
  Hit best{0, std::numeric_limits<double>::infinity()};
  search(0, query, best);
  return best;
}

MeshDistance::MeshDistance(const TriangleMesh& mesh, int buckets_per_axis)
    : mesh_(mesh), res_(std::max(1, buckets_per_axis)) {
  if (mesh.empty()) throw InvalidArgument("MeshDistance: mesh has no faces");
  box_ = mesh.bounds();
  const Vec3 pad = Vec3::Constant(1e-9 + 1e-6 * box_.extent().maxCoeff());
  box_.min -= pad;
  box_.max += pad;
  cell_ = box_.extent() / res_;

  auto bucket_range = [&](const Face& f, Eigen::Vector3i& lo, Eigen::Vector3i& hi) {
    Vec3 mn = mesh.vertices[f[0]], mx = mn;
    for (int k = 1; k < 3; ++k) {
      mn = mn.cwiseMin(mesh.vertices[f[k]]);
      mx = mx.cwiseMax(mesh.vertices[f[k]]);
    }
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::clamp(static_cast<int>(std::floor((mn[a] - box_.min[a]) / cell_[a])), 0, res_ - 1);
      hi[a] = std::clamp(static_cast<int>(std::floor((mx[a] - box_.min[a]) / cell_[a])), 0, res_ - 1);
    }
  };
  const std::size_t nb = static_cast<std::size_t>(res_) * res_ * res_;
  std::vector<std::uint32_t> counts(nb + 1, 0);
  Eigen::Vector3i lo, hi;
  for (const auto& f : mesh.faces) {
    bucket_range(f, lo, hi);
    for (int x = lo[0]; x <= hi[0]; ++x)
      for (int y = lo[1]; y <= hi[1]; ++y)
        for (int z = lo[2]; z <= hi[2]; ++z) ++counts[(static_cast<std::size_t>(x) * res_ + y) * res_ + z + 1];
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  start_ = counts;
  tris_.resize(start_.back());
  std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
  for (std::uint32_t t = 0; t < mesh.faces.size(); ++t) {
    bucket_range(mesh.faces[t], lo, hi);
    for (int x = lo[0]; x <= hi[0]; ++x)
      for (int y = lo[1]; y <= hi[1]; ++y)
        for (int z = lo[2]; z <= hi[2]; ++z) tris_[fill[(static_cast<std::size_t>(x) * res_ + y) * res_ + z]++] = t;
  }
}

double MeshDistance::distance(const Vec3& p) const {
  Eigen::Vector3i c;
  for (int a = 0; a < 3; ++a) {
    c[a] = std::clamp(static_cast<int>(std::floor((p[a] - box_.min[a]) / cell_[a])), 0, res_ - 1);
  }
  const double min_cell = cell_.minCoeff();
  double best2 = std::numeric_limits<double>::infinity();
  for (int r = 0; r < res_; ++r) {
    for (int x = c[0] - r; x <= c[0] + r; ++x) {
      if (x < 0 || x >= res_) continue;
      for (int y = c[1] - r; y <= c[1] + r; ++y) {
        if (y < 0 || y >= res_) continue;
        for (int z = c[2] - r; z <= c[2] + r; ++z) {
          if (z < 0 || z >= res_) continue;
          if (std::max({std::abs(x - c[0]), std::abs(y - c[1]), std::abs(z - c[2])}) != r) continue;
          const auto b = (static_cast<std::size_t>(x) * res_ + y) * res_ + z;
          for (auto i = start_[b]; i < start_[b + 1]; ++i) {
            const auto& f = mesh_.faces[tris_[i]];
            const Vec3 q = closest_point_on_triangle(p, mesh_.vertices[f[0]], mesh_.vertices[f[1]],
                                                     mesh_.vertices[f[2]]);
            best2 = std::min(best2, (q - p).squaredNorm());
          }
        }
      }
    }
    // Every bucket on ring r + 1 is at least r cells away from p.
    const double bound = r * min_cell;
    if (best2 <= bound * bound) break;
  }
  return std::sqrt(best2);
}

}  // namespace airloom::geometry
