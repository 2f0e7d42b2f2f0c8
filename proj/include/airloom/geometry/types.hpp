// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace airloom::geometry {

using Vec3 = Eigen::Vector3d;
using Face = std::array<std::int32_t, 3>;

/// Number of points in a sketch cloud.
inline constexpr std::size_t kSketchPoints = 4096;

struct BBox {
  Vec3 min = Vec3::Constant(-1.0);
  Vec3 max = Vec3::Constant(1.0);

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  bool operator==(const BBox& o) const { return min == o.min && max == o.max; }

  static BBox of(const std::vector<Vec3>& points);
  static BBox unit() { return {}; }
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  bool empty() const { return faces.empty(); }
  BBox bounds() const { return BBox::of(vertices); }
  double area() const;

  /// Throws InvalidArgument on out-of-range indices or non-finite coordinates.
  void validate() const;

  bool operator==(const TriangleMesh& o) const {
    return vertices == o.vertices && faces == o.faces;
  }
};

/// Uniform scale about a center: p' = (p - center) * scale.
struct Similarity {
  Vec3 center = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return (p - center) * scale; }
  Vec3 invert(const Vec3& p) const { return p / scale + center; }
  TriangleMesh apply(const TriangleMesh& mesh) const;
  TriangleMesh invert(const TriangleMesh& mesh) const;
};

struct PointCloud {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  /// K >= 1, finite, within [-1, 1].
  void validate() const;
  bool operator==(const PointCloud& o) const { return points == o.points; }
};

using Polyline = std::vector<Vec3>;

struct SketchCloud {
  std::vector<Vec3> points;       // exactly kSketchPoints
  std::vector<Polyline> strokes;  // optional raw strokes

  /// Exactly kSketchPoints finite points within [-1, 1].
  void validate() const;
  PointCloud cloud() const { return PointCloud{points}; }
  bool operator==(const SketchCloud& o) const {
    return points == o.points && strokes == o.strokes;
  }
};

/// Dense truncated signed-distance grid. Cell (x, y, z) is stored at
/// (x * R + y) * R + z and sampled at its center.
struct SDFGrid {
  int resolution = 0;
  float truncation = 0.1f;
  BBox bbox;
  std::vector<float> values;

  SDFGrid() = default;
  SDFGrid(int res, float trunc, BBox box = BBox::unit(), float fill = 0.0f);

  std::size_t size() const { return values.size(); }
  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(x) * resolution + y) * resolution + z;
  }
  float at(int x, int y, int z) const { return values[index(x, y, z)]; }
  float& at(int x, int y, int z) { return values[index(x, y, z)]; }
  Vec3 cell_size() const { return bbox.extent() / resolution; }
  Vec3 cell_center(int x, int y, int z) const;

  /// R >= 8, values finite and within +/- truncation, truncation > 0.
  void validate() const;
  bool operator==(const SDFGrid& o) const;
};

struct OccupancyGrid {
  int resolution = 0;
  std::vector<std::uint8_t> bits;

  OccupancyGrid() = default;
  explicit OccupancyGrid(int res, bool fill = false);

  std::size_t size() const { return bits.size(); }
  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(x) * resolution + y) * resolution + z;
  }
  bool at(int x, int y, int z) const { return bits[index(x, y, z)] != 0; }
  void set(int x, int y, int z, bool v) { bits[index(x, y, z)] = v ? 1 : 0; }
  std::size_t count() const;

  /// Same as validate() but allows resolutions below 8; used for the
  /// small grids of the metric oracles.
  void validate_shape() const;
  /// R >= 8 and bits sized R^3.
  void validate() const;
  bool operator==(const OccupancyGrid& o) const {
    return resolution == o.resolution && bits == o.bits;
  }
};

}  // namespace airloom::geometry
