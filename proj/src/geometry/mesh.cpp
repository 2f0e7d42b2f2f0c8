// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/geometry/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "airloom/common.hpp"

namespace airloom::geometry {
namespace {

std::uint64_t edge_key(std::int32_t a, std::int32_t b) {
  const auto lo = static_cast<std::uint32_t>(std::min(a, b));
  const auto hi = static_cast<std::uint32_t>(std::max(a, b));
  return (static_cast<std::uint64_t>(lo) << 32) | hi;
}

}  // namespace

std::size_t open_edge_count(const TriangleMesh& mesh) {
  std::vector<std::uint64_t> keys;
  keys.reserve(mesh.faces.size() * 3);
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) keys.push_back(edge_key(f[e], f[(e + 1) % 3]));
  }
  std::sort(keys.begin(), keys.end());
  std::size_t open = 0;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    if (j - i != 2) ++open;
    i = j;
  }
  return open;
}

std::pair<TriangleMesh, Similarity> normalize_mesh(const TriangleMesh& mesh) {
  mesh.validate();
  const BBox box = mesh.bounds();
  const double longest = box.extent().maxCoeff();
  if (mesh.vertices.empty() || !(longest > 0.0)) {
    throw InvalidArgument("cannot normalize a degenerate (zero-extent) mesh");
  }
  Similarity xf{box.center(), 2.0 * kNormalizedHalfExtent / longest};
  return {xf.apply(mesh), xf};
}

PointCloud sample_surface(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw InvalidArgument("sample_surface: count must be positive");
  mesh.validate();
  std::vector<double> cumulative;
  cumulative.reserve(mesh.faces.size());
  double total = 0.0;
  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    total += 0.5 * (mesh.vertices[f[1]] - a).cross(mesh.vertices[f[2]] - a).norm();
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) throw InvalidArgument("sample_surface: mesh has zero surface area");

  Rng rng(seed);
  PointCloud out;
  out.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    const auto& f = mesh.faces[static_cast<std::size_t>(it - cumulative.begin())];
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    out.points.push_back((1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c);
  }
  return out;
}

std::vector<Polyline> slice_mesh(const TriangleMesh& mesh, const Vec3& normal, double offset) {
  std::vector<double> side(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    side[i] = normal.dot(mesh.vertices[i]) - offset;
  }
  auto crossing = [&](std::int32_t a, std::int32_t b) {
    if (a > b) std::swap(a, b);
    const double sa = side[a], sb = side[b];
    const double t = sa / (sa - sb);
    return Vec3(mesh.vertices[a] + t * (mesh.vertices[b] - mesh.vertices[a]));
  };

  std::map<std::uint64_t, std::vector<std::uint64_t>> adjacency;
  std::unordered_map<std::uint64_t, Vec3> position;
  for (const auto& f : mesh.faces) {
    std::uint64_t ends[2];
    int found = 0;
    for (int e = 0; e < 3; ++e) {
      const auto a = f[e], b = f[(e + 1) % 3];
      if ((side[a] >= 0.0) != (side[b] >= 0.0)) {
        const auto key = edge_key(a, b);
        if (!position.count(key)) position.emplace(key, crossing(a, b));
        if (found < 2) ends[found] = key;
        ++found;
      }
    }
    if (found == 2) {
      adjacency[ends[0]].push_back(ends[1]);
      adjacency[ends[1]].push_back(ends[0]);
    }
  }

  std::vector<Polyline> lines;
  std::unordered_map<std::uint64_t, bool> visited;
  auto walk = [&](std::uint64_t start) {
    Polyline line{position.at(start)};
    visited[start] = true;
    std::uint64_t cur = start;
    while (true) {
      const auto& nbrs = adjacency[cur];
      auto next = std::find_if(nbrs.begin(), nbrs.end(), [&](auto n) { return !visited[n]; });
      if (next == nbrs.end()) {
        if (line.size() > 2 && std::find(nbrs.begin(), nbrs.end(), start) != nbrs.end()) {
          line.push_back(position.at(start));  // closed loop
        }
        return line;
      }
      cur = *next;
      visited[cur] = true;
      line.push_back(position.at(cur));
    }
  };
  // Open chains first (from degree-1 endpoints), then remaining loops.
  for (const auto& [key, nbrs] : adjacency) {
    if (nbrs.size() == 1 && !visited[key]) lines.push_back(walk(key));
  }
  for (const auto& [key, nbrs] : adjacency) {
    if (!visited[key]) lines.push_back(walk(key));
  }
  return lines;
}

double polyline_length(const Polyline& line) {
  double len = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) len += (line[i] - line[i - 1]).norm();
  return len;
}

Polyline resample_polyline(const Polyline& line, std::size_t count) {
  if (line.empty() || count == 0) return {};
  if (line.size() == 1 || count == 1) return Polyline(count, line.front());
  std::vector<double> cum(line.size(), 0.0);
  for (std::size_t i = 1; i < line.size(); ++i) cum[i] = cum[i - 1] + (line[i] - line[i - 1]).norm();
  const double total = cum.back();
  Polyline out;
  out.reserve(count);
  std::size_t seg = 1;
  for (std::size_t k = 0; k < count; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(count - 1);
    while (seg + 1 < line.size() && cum[seg] < s) ++seg;
    const double len = cum[seg] - cum[seg - 1];
    const double t = len > 0.0 ? std::clamp((s - cum[seg - 1]) / len, 0.0, 1.0) : 0.0;
    out.push_back(line[seg - 1] + t * (line[seg] - line[seg - 1]));
  }
  return out;
}

TriangleMesh make_icosphere(double radius, int subdivisions, const Vec3& center) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : m.vertices) v.normalize();
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::unordered_map<std::uint64_t, std::int32_t> mid;
    auto midpoint = [&](std::int32_t a, std::int32_t b) {
      const auto key = edge_key(a, b);
      if (auto it = mid.find(key); it != mid.end()) return it->second;
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      const auto idx = static_cast<std::int32_t>(m.vertices.size() - 1);
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(m.faces.size() * 4);
    for (const auto& f : m.faces) {
      const auto a = midpoint(f[0], f[1]);
      const auto b = midpoint(f[1], f[2]);
      const auto c = midpoint(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    m.faces = std::move(next);
  }
  for (auto& v : m.vertices) v = center + radius * v;
  return m;
}

TriangleMesh make_box(const Vec3& lo, const Vec3& hi) {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(),
                            (i & 4) ? hi.z() : lo.z());
  }
  m.faces = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
             {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

}  // namespace airloom::geometry
