// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/geometry/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "airloom/common.hpp"

namespace airloom::geometry {
namespace {

bool finite(const Vec3& p) {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

bool in_unit_box(const Vec3& p) { return p.cwiseAbs().maxCoeff() <= 1.0; }

void check_cube(std::size_t size, int res, const char* what) {
  const auto r = static_cast<std::size_t>(res);
  if (res <= 0 || size != r * r * r) {
    throw InvalidArgument(std::string(what) + ": storage size " + std::to_string(size) +
                          " does not match resolution " + std::to_string(res));
  }
}

}  // namespace

BBox BBox::of(const std::vector<Vec3>& points) {
  BBox box;
  if (points.empty()) {
    box.min = box.max = Vec3::Zero();
    return box;
  }
  box.min = Vec3::Constant(std::numeric_limits<double>::infinity());
  box.max = -box.min;
  for (const auto& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

double TriangleMesh::area() const {
  double total = 0.0;
  for (const auto& f : faces) {
    const Vec3& a = vertices[f[0]];
    total += 0.5 * (vertices[f[1]] - a).cross(vertices[f[2]] - a).norm();
  }
  return total;
}

void TriangleMesh::validate() const {
  const auto n = static_cast<std::int64_t>(vertices.size());
  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (auto v : faces[i]) {
      if (v < 0 || v >= n) {
        throw InvalidArgument("mesh face " + std::to_string(i) + " references vertex " +
                              std::to_string(v) + " of " + std::to_string(n));
      }
    }
  }
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!finite(vertices[i])) {
      throw InvalidArgument("mesh vertex " + std::to_string(i) + " is not finite");
    }
  }
}

TriangleMesh Similarity::apply(const TriangleMesh& mesh) const {
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v = apply(v);
  return out;
}

TriangleMesh Similarity::invert(const TriangleMesh& mesh) const {
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v = invert(v);
  return out;
}

void PointCloud::validate() const {
  if (points.empty()) throw InvalidArgument("point cloud is empty");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!finite(points[i])) {
      throw InvalidArgument("point " + std::to_string(i) + " is not finite");
    }
    if (!in_unit_box(points[i])) {
      throw InvalidArgument("point " + std::to_string(i) + " lies outside [-1, 1]^3");
    }
  }
}

void SketchCloud::validate() const {
  if (points.size() != kSketchPoints) {
    throw InvalidArgument("sketch point count: expected " + std::to_string(kSketchPoints) +
                          ", got " + std::to_string(points.size()));
  }
  PointCloud{points}.validate();
  for (std::size_t s = 0; s < strokes.size(); ++s) {
    for (const auto& p : strokes[s]) {
      if (!finite(p)) {
        throw InvalidArgument("sketch stroke " + std::to_string(s) + " has a non-finite point");
      }
    }
  }
}

SDFGrid::SDFGrid(int res, float trunc, BBox box, float fill)
    : resolution(res),
      truncation(trunc),
      bbox(box),
      values(static_cast<std::size_t>(res) * res * res, fill) {}

Vec3 SDFGrid::cell_center(int x, int y, int z) const {
  const Vec3 h = cell_size();
  return bbox.min + Vec3((x + 0.5) * h.x(), (y + 0.5) * h.y(), (z + 0.5) * h.z());
}

void SDFGrid::validate() const {
  if (resolution < 8) {
    throw InvalidArgument("sdf grid resolution " + std::to_string(resolution) + " is below 8");
  }
  check_cube(values.size(), resolution, "sdf grid");
  if (!(truncation > 0.0f) || !std::isfinite(truncation)) {
    throw InvalidArgument("sdf grid truncation must be positive");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = values[i];
    if (!std::isfinite(v)) {
      throw InvalidArgument("sdf grid value " + std::to_string(i) + " is not finite");
    }
    if (std::fabs(v) > truncation) {
      throw InvalidArgument("sdf grid value " + std::to_string(v) + " at " + std::to_string(i) +
                            " exceeds truncation " + std::to_string(truncation));
    }
  }
}

bool SDFGrid::operator==(const SDFGrid& o) const {
  // Bitwise comparison so that round-trips are checked exactly (and -0.0f
  // differs from 0.0f).
  return resolution == o.resolution &&
         std::memcmp(&truncation, &o.truncation, sizeof(float)) == 0 && bbox == o.bbox &&
         values.size() == o.values.size() &&
         std::memcmp(values.data(), o.values.data(), values.size() * sizeof(float)) == 0;
}

OccupancyGrid::OccupancyGrid(int res, bool fill)
    : resolution(res), bits(static_cast<std::size_t>(res) * res * res, fill ? 1 : 0) {}

std::size_t OccupancyGrid::count() const {
  return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(),
                                                [](std::uint8_t b) { return b != 0; }));
}

void OccupancyGrid::validate_shape() const { check_cube(bits.size(), resolution, "occupancy grid"); }

void OccupancyGrid::validate() const {
  if (resolution < 8) {
    throw InvalidArgument("occupancy grid resolution " + std::to_string(resolution) +
                          " is below 8");
  }
  validate_shape();
}

}  // namespace airloom::geometry
