// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/geometry/sdf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "airloom/common.hpp"
#include "airloom/geometry/mesh.hpp"
#include "airloom/geometry/spatial.hpp"

namespace airloom::geometry {
namespace {

double cross2(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

// Inside/outside votes from ray parity along +axis for every cell center.
// votes[i] is incremented when the +axis ray from cell i crosses the surface
// an odd number of times.
void accumulate_parity(const TriangleMesh& mesh, const SDFGrid& grid, int axis,
                       std::vector<std::uint8_t>& votes) {
  const int R = grid.resolution;
  const int u = (axis + 1) % 3, v = (axis + 2) % 3;
  const Vec3 h = grid.cell_size();
  // Sub-cell offsets keep rays off lattice-aligned mesh edges and vertices.
  const double du = 1.2345e-7 * h[u] * (axis + 1), dv = 2.3456e-7 * h[v] * (axis + 1);
  std::vector<std::vector<double>> hits(static_cast<std::size_t>(R) * R);

  for (const auto& f : mesh.faces) {
    const Vec3& A = mesh.vertices[f[0]];
    const Vec3& B = mesh.vertices[f[1]];
    const Vec3& C = mesh.vertices[f[2]];
    const double umin = std::min({A[u], B[u], C[u]}), umax = std::max({A[u], B[u], C[u]});
    const double vmin = std::min({A[v], B[v], C[v]}), vmax = std::max({A[v], B[v], C[v]});
    const int i0 = std::max(0, static_cast<int>(std::ceil((umin - du - grid.bbox.min[u]) / h[u] - 0.5)));
    const int i1 = std::min(R - 1, static_cast<int>(std::floor((umax - du - grid.bbox.min[u]) / h[u] - 0.5)));
    const int j0 = std::max(0, static_cast<int>(std::ceil((vmin - dv - grid.bbox.min[v]) / h[v] - 0.5)));
    const int j1 = std::min(R - 1, static_cast<int>(std::floor((vmax - dv - grid.bbox.min[v]) / h[v] - 0.5)));
    for (int i = i0; i <= i1; ++i) {
      const double qu = grid.bbox.min[u] + (i + 0.5) * h[u] + du;
      for (int j = j0; j <= j1; ++j) {
        const double qv = grid.bbox.min[v] + (j + 0.5) * h[v] + dv;
        const double w0 = cross2(B[u] - qu, B[v] - qv, C[u] - qu, C[v] - qv);
        const double w1 = cross2(C[u] - qu, C[v] - qv, A[u] - qu, A[v] - qv);
        const double w2 = cross2(A[u] - qu, A[v] - qv, B[u] - qu, B[v] - qv);
        const bool pos = w0 >= 0 && w1 >= 0 && w2 >= 0;
        const bool neg = w0 <= 0 && w1 <= 0 && w2 <= 0;
        const double sum = w0 + w1 + w2;
        if ((!pos && !neg) || sum == 0.0) continue;
        hits[static_cast<std::size_t>(i) * R + j].push_back((w0 * A[axis] + w1 * B[axis] + w2 * C[axis]) / sum);
      }
    }
  }

  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < R; ++j) {
      auto& col = hits[static_cast<std::size_t>(i) * R + j];
      std::sort(col.begin(), col.end());
      for (int k = 0; k < R; ++k) {
        const double c = grid.bbox.min[axis] + (k + 0.5) * h[axis];
        const auto above = col.end() - std::upper_bound(col.begin(), col.end(), c);
        if (above % 2 == 1) {
          int idx[3];
          idx[axis] = k;
          idx[u] = i;
          idx[v] = j;
          ++votes[grid.index(idx[0], idx[1], idx[2])];
        }
      }
    }
  }
}

}  // namespace

SDFGrid mesh_to_sdf_grid(const TriangleMesh& mesh, int resolution, float truncation,
                         const BBox& bbox) {
  if (resolution < 8) throw InvalidArgument("sdf resolution must be at least 8");
  if (!(truncation > 0.0f)) throw InvalidArgument("sdf truncation must be positive");
  mesh.validate();
  if (mesh.empty()) throw InvalidArgument("mesh has no faces");
  if (const auto open = open_edge_count(mesh); open != 0) {
    throw InvalidArgument("mesh is not watertight: " + std::to_string(open) + " open edges");
  }

  SDFGrid grid(resolution, truncation, bbox, truncation);
  const Vec3 h = grid.cell_size();
  const double trunc = truncation;
  std::vector<double> dist(grid.size(), trunc);

  for (const auto& f : mesh.faces) {
    const Vec3& A = mesh.vertices[f[0]];
    const Vec3& B = mesh.vertices[f[1]];
    const Vec3& C = mesh.vertices[f[2]];
    const Vec3 mn = A.cwiseMin(B).cwiseMin(C).array() - trunc;
    const Vec3 mx = A.cwiseMax(B).cwiseMax(C).array() + trunc;
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(0, static_cast<int>(std::ceil((mn[a] - bbox.min[a]) / h[a] - 0.5)));
      hi[a] = std::min(resolution - 1, static_cast<int>(std::floor((mx[a] - bbox.min[a]) / h[a] - 0.5)));
    }
    for (int x = lo[0]; x <= hi[0]; ++x)
      for (int y = lo[1]; y <= hi[1]; ++y)
        for (int z = lo[2]; z <= hi[2]; ++z) {
          const Vec3 p = grid.cell_center(x, y, z);
          const double d = (closest_point_on_triangle(p, A, B, C) - p).norm();
          double& slot = dist[grid.index(x, y, z)];
          slot = std::min(slot, d);
        }
  }

  std::vector<std::uint8_t> votes(grid.size(), 0);
  for (int axis = 0; axis < 3; ++axis) accumulate_parity(mesh, grid, axis, votes);

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto mag = static_cast<float>(std::min(dist[i], trunc));
    grid.values[i] = votes[i] >= 2 ? -mag : mag;
  }
  return grid;
}

OccupancyGrid occupancy_from_sdf(const SDFGrid& grid) {
  OccupancyGrid occ(grid.resolution);
  for (std::size_t i = 0; i < grid.size(); ++i) occ.bits[i] = grid.values[i] < 0.0f ? 1 : 0;
  return occ;
}

OccupancyGrid downsample_occupancy(const OccupancyGrid& occ, int factor) {
  occ.validate_shape();
  if (factor < 1 || occ.resolution % factor != 0) {
    throw InvalidArgument("downsample factor " + std::to_string(factor) +
                          " does not divide resolution " + std::to_string(occ.resolution));
  }
  const int r = occ.resolution / factor;
  OccupancyGrid out(r);
  for (int x = 0; x < occ.resolution; ++x)
    for (int y = 0; y < occ.resolution; ++y)
      for (int z = 0; z < occ.resolution; ++z)
        if (occ.at(x, y, z)) out.set(x / factor, y / factor, z / factor, true);
  return out;
}

OccupancyGrid upsample_occupancy(const OccupancyGrid& occ, int factor) {
  occ.validate_shape();
  if (factor < 1) throw InvalidArgument("upsample factor must be positive");
  const int r = occ.resolution * factor;
  OccupancyGrid out(r);
  for (int x = 0; x < r; ++x)
    for (int y = 0; y < r; ++y)
      for (int z = 0; z < r; ++z) out.set(x, y, z, occ.at(x / factor, y / factor, z / factor));
  return out;
}

}  // namespace airloom::geometry
