// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <string>
#include <unordered_map>

#include "airloom/common.hpp"
#include "airloom/geometry/sdf.hpp"

namespace airloom::geometry {
namespace {

constexpr int kTriTable[256][16] = {
#include "mc_tables.inc"
};

// Corner offsets in the table's numbering.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

}  // namespace

TriangleMesh extract_mesh(const SDFGrid& grid, float iso) {
  const int R = grid.resolution;
  if (R < 2 || grid.values.size() != static_cast<std::size_t>(R) * R * R) {
    throw InvalidArgument("extract_mesh: grid storage does not match its resolution");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid.values[i])) {
      throw InvalidArgument("extract_mesh: grid value " + std::to_string(i) + " is not finite");
    }
  }

  TriangleMesh mesh;
  std::unordered_map<std::uint64_t, std::int32_t> edge_vertex;

  // Shared lattice edges are keyed by their lower endpoint and axis, and always
  // interpolated from the lower endpoint so both neighbors agree bit-for-bit.
  auto vertex_on = [&](int x, int y, int z, int a, int b) -> std::int32_t {
    int p[3] = {x + kCorner[a][0], y + kCorner[a][1], z + kCorner[a][2]};
    int q[3] = {x + kCorner[b][0], y + kCorner[b][1], z + kCorner[b][2]};
    int axis = 0;
    while (p[axis] == q[axis]) ++axis;
    if (p[axis] > q[axis]) std::swap(p, q);
    const std::uint64_t key = static_cast<std::uint64_t>(grid.index(p[0], p[1], p[2])) * 3 + axis;
    if (auto it = edge_vertex.find(key); it != edge_vertex.end()) return it->second;
    const float vp = grid.at(p[0], p[1], p[2]);
    const float vq = grid.at(q[0], q[1], q[2]);
    const double t = (static_cast<double>(iso) - vp) / (static_cast<double>(vq) - vp);
    const Vec3 pp = grid.cell_center(p[0], p[1], p[2]);
    const Vec3 pq = grid.cell_center(q[0], q[1], q[2]);
    mesh.vertices.push_back(pp + t * (pq - pp));
    const auto idx = static_cast<std::int32_t>(mesh.vertices.size() - 1);
    edge_vertex.emplace(key, idx);
    return idx;
  };

  for (int x = 0; x + 1 < R; ++x) {
    for (int y = 0; y + 1 < R; ++y) {
      for (int z = 0; z + 1 < R; ++z) {
        int config = 0;
        for (int c = 0; c < 8; ++c) {
          if (grid.at(x + kCorner[c][0], y + kCorner[c][1], z + kCorner[c][2]) < iso) config |= 1 << c;
        }
        if (config == 0 || config == 255) continue;
        const int* tri = kTriTable[config];
        for (int k = 0; tri[k] != -1; k += 3) {
          Face f;
          for (int j = 0; j < 3; ++j) {
            const auto& e = kEdge[tri[k + j]];
            f[j] = vertex_on(x, y, z, e[0], e[1]);
          }
          // The table winds triangles clockwise seen from outside; store them
          // counter-clockwise so normals point toward increasing values.
          std::swap(f[1], f[2]);
          mesh.faces.push_back(f);
        }
      }
    }
  }
  return mesh;
}

}  // namespace airloom::geometry
