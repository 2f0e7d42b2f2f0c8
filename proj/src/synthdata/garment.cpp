// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <unordered_map>

#include "airloom/common.hpp"
#include "airloom/geometry/mesh.hpp"
#include "airloom/synthdata.hpp"

namespace airloom::synth {

using geometry::TriangleMesh;
using geometry::Vec3;

namespace {

void check_range(const char* name, double v, double lo, double hi) {
  if (!(v >= lo && v <= hi)) {
    throw InvalidArgument(std::string(name) + " = " + std::to_string(v) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

// Construction-frame garment. y is up, the neck sits near y = 0 and the hem
// at y = -height; x spans the shoulders. Distances are approximate (F/|grad F|)
// near the surfaces and only need to be accurate within a few shell widths.
struct Garment {
  double a0, b0, dome, height, flare;
  double half_wall;
  Vec3 neck_center, neck_axes;
  bool sleeves;
  Vec3 shoulder[2], sleeve_dir[2];
  double sleeve_radius, sleeve_len;

  explicit Garment(const GarmentParams& p) {
    Rng rng(derive_seed(p.seed, 0x6761726d));
    a0 = 0.36 * rng.uniform(0.95, 1.05);
    b0 = 0.26 * rng.uniform(0.95, 1.05);
    dome = 0.15;
    height = 0.75 + 0.9 * p.torso_length;
    flare = p.flare;
    // Walls stay at least ~1.5 cells thick on a 32^3 grid after normalization.
    half_wall = 0.03 + 1.5 * p.shell_thickness;
    neck_center = Vec3(0.0, dome, 0.12);
    neck_axes = Vec3(0.15, 0.06 + 0.6 * p.neckline_depth, 0.3);
    sleeves = p.has_sleeves;
    const double angle = (35.0 + rng.uniform(-5.0, 5.0)) * M_PI / 180.0;
    sleeve_radius = 0.15 * rng.uniform(0.95, 1.05);
    sleeve_len = 0.1 + 0.7 * p.sleeve_length;
    for (int s = 0; s < 2; ++s) {
      const double side = s == 0 ? 1.0 : -1.0;
      shoulder[s] = Vec3(side * 0.85 * a0, -0.06, 0.0);
      sleeve_dir[s] = Vec3(side * std::cos(angle), -std::sin(angle), 0.0);
    }
  }

  // Signed distance (approximate) to the closed torso body.
  double body(const Vec3& p) const {
    const double x = p.x(), y = p.y(), z = p.z();
    if (y > 0.0) {
      const double X = x / a0, Y = y / dome, Z = z / b0;
      const double r = std::sqrt(X * X + Y * Y + Z * Z);
      const Vec3 g(X / a0, Y / dome, Z / b0);
      const double gn = g.norm();
      if (r < 1e-9 || gn < 1e-9) return -std::min({a0, b0, dome});
      return (r - 1.0) * r / gn;
    }
    const double u = std::clamp(-y / height, 0.0, 1.0);
    const double a = a0 * (1.0 + 0.6 * flare * u);
    const double b = b0 * (1.0 + 0.4 * flare * u);
    const double X = x / a, Z = z / b;
    const double r = std::sqrt(X * X + Z * Z);
    if (r < 1e-9) return -std::min(a, b);
    // d/dy of r through the flared semi-axes (zero outside the flared span).
    double dr_dy = 0.0;
    if (u > 0.0 && u < 1.0) {
      const double da = -a0 * 0.6 * flare / height, db = -b0 * 0.4 * flare / height;
      dr_dy = -(X * X * da / a + Z * Z * db / b) / r;
    }
    const Vec3 g(X / (a * r), dr_dy, Z / (b * r));
    return (r - 1.0) / g.norm();
  }

  double neck(const Vec3& p) const {
    const Vec3 q = (p - neck_center).cwiseQuotient(neck_axes);
    const double r = q.norm();
    if (r < 1e-9) return -neck_axes.minCoeff();
    const Vec3 g = q.cwiseQuotient(neck_axes) / r;
    return (r - 1.0) / g.norm();
  }

  double sleeve(const Vec3& p, int s) const {
    const Vec3 d = p - shoulder[s];
    const double t = d.dot(sleeve_dir[s]);
    const double radial = (d - t * sleeve_dir[s]).norm();
    const double tube = std::abs(radial - sleeve_radius) - half_wall;
    return std::max({tube, -t, t - sleeve_len});
  }

  // Negative inside the garment material.
  double operator()(const Vec3& p) const {
    const double fb = body(p);
    double f = std::max(std::abs(fb) - half_wall, -height - p.y());
    f = std::max(f, -neck(p));
    if (sleeves) {
      for (int s = 0; s < 2; ++s) f = std::min(f, std::max(sleeve(p, s), -fb));
    }
    return f;
  }

  // Conservative bounds of the material.
  void bounds(Vec3& lo, Vec3& hi) const {
    const double wide = a0 * (1.0 + 0.6 * flare) + half_wall;
    const double deep = b0 * (1.0 + 0.4 * flare) + half_wall;
    lo = Vec3(-wide, -height - half_wall, -deep);
    hi = Vec3(wide, dome + half_wall, deep);
    if (sleeves) {
      for (int s = 0; s < 2; ++s) {
        const Vec3 tip = shoulder[s] + sleeve_len * sleeve_dir[s];
        const double r = sleeve_radius + half_wall;
        lo = lo.cwiseMin(tip - Vec3::Constant(r));
        hi = hi.cwiseMax(tip + Vec3::Constant(r));
      }
    }
  }
};

// Marching tetrahedra over a regular lattice (six tetrahedra per cube around
// the main diagonal). Neighboring cubes split shared faces along the same
// diagonal, so the output is watertight whenever the field is positive on
// the lattice boundary.
template <class Field>
TriangleMesh polygonize(const Field& field, const Vec3& lo, const Vec3& hi, double cell) {
  std::array<int, 3> n{};
  for (int a = 0; a < 3; ++a) n[a] = static_cast<int>(std::ceil((hi[a] - lo[a]) / cell)) + 1;
  const auto id = [&](int x, int y, int z) {
    return (static_cast<std::uint64_t>(x) * n[1] + y) * n[2] + z;
  };
  const auto pos = [&](std::uint64_t i) {
    const auto z = static_cast<int>(i % n[2]);
    const auto y = static_cast<int>((i / n[2]) % n[1]);
    const auto x = static_cast<int>(i / (static_cast<std::uint64_t>(n[1]) * n[2]));
    return Vec3(lo.x() + x * cell, lo.y() + y * cell, lo.z() + z * cell);
  };
  const std::uint64_t total = static_cast<std::uint64_t>(n[0]) * n[1] * n[2];
  std::vector<double> f(total);
  for (std::uint64_t i = 0; i < total; ++i) {
    const double v = field(pos(i));
    // Exact zeros would create vertices shared by several edges.
    f[i] = v == 0.0 ? 1e-12 : v;
  }

  TriangleMesh mesh;
  std::unordered_map<std::uint64_t, std::int32_t> edge_vertex;
  auto vertex_on = [&](std::uint64_t a, std::uint64_t b) {
    if (a > b) std::swap(a, b);
    const std::uint64_t key = a * total + b;
    if (auto it = edge_vertex.find(key); it != edge_vertex.end()) return it->second;
    const double t = f[a] / (f[a] - f[b]);
    const Vec3 pa = pos(a), pb = pos(b);
    mesh.vertices.push_back(pa + t * (pb - pa));
    const auto v = static_cast<std::int32_t>(mesh.vertices.size() - 1);
    edge_vertex.emplace(key, v);
    return v;
  };
  auto emit = [&](std::int32_t i, std::int32_t j, std::int32_t k, const Vec3& outward) {
    const Vec3& a = mesh.vertices[i];
    const Vec3 nrm = (mesh.vertices[j] - a).cross(mesh.vertices[k] - a);
    if (nrm.dot(outward) < 0.0) std::swap(j, k);
    mesh.faces.push_back({i, j, k});
  };

  static constexpr int kTets[6][4] = {{0, 1, 3, 7}, {0, 3, 2, 7}, {0, 2, 6, 7},
                                      {0, 6, 4, 7}, {0, 4, 5, 7}, {0, 5, 1, 7}};
  for (int x = 0; x + 1 < n[0]; ++x) {
    for (int y = 0; y + 1 < n[1]; ++y) {
      for (int z = 0; z + 1 < n[2]; ++z) {
        std::uint64_t corner[8];
        bool any_in = false, any_out = false;
        for (int c = 0; c < 8; ++c) {
          corner[c] = id(x + (c & 1), y + ((c >> 1) & 1), z + ((c >> 2) & 1));
          (f[corner[c]] < 0.0 ? any_in : any_out) = true;
        }
        if (!any_in || !any_out) continue;
        for (const auto& tet : kTets) {
          std::uint64_t in[4], out[4];
          int ni = 0, no = 0;
          for (int k = 0; k < 4; ++k) {
            const auto v = corner[tet[k]];
            if (f[v] < 0.0) in[ni++] = v; else out[no++] = v;
          }
          if (ni == 0 || no == 0) continue;
          Vec3 cin = Vec3::Zero(), cout = Vec3::Zero();
          for (int k = 0; k < ni; ++k) cin += pos(in[k]) / ni;
          for (int k = 0; k < no; ++k) cout += pos(out[k]) / no;
          const Vec3 outward = cout - cin;
          if (ni == 1 || no == 1) {
            const auto lone = ni == 1 ? in[0] : out[0];
            const auto* rest = ni == 1 ? out : in;
            emit(vertex_on(lone, rest[0]), vertex_on(lone, rest[1]), vertex_on(lone, rest[2]), outward);
          } else {
            const auto ac = vertex_on(in[0], out[0]), ad = vertex_on(in[0], out[1]);
            const auto bd = vertex_on(in[1], out[1]), bc = vertex_on(in[1], out[0]);
            emit(ac, ad, bd, outward);
            emit(ac, bd, bc, outward);
          }
        }
      }
    }
  }
  return mesh;
}

}  // namespace

void GarmentParams::validate() const {
  check_range("sleeve_length", sleeve_length, 0.0, 1.0);
  check_range("torso_length", torso_length, 0.4, 1.0);
  check_range("neckline_depth", neckline_depth, 0.0, 0.3);
  check_range("flare", flare, 0.0, 0.5);
  check_range("shell_thickness", shell_thickness, 0.02, 0.06);
}

TriangleMesh make_garment(const GarmentParams& params) {
  params.validate();
  const Garment g(params);
  Vec3 lo, hi;
  g.bounds(lo, hi);
  const double cell = std::clamp(g.half_wall / 1.5, 0.03, 0.05);
  const Vec3 margin = Vec3::Constant(2.0 * cell);
  auto mesh = polygonize(g, lo - margin, hi + margin, cell);
  auto [normalized, xf] = geometry::normalize_mesh(mesh);
  // Quantized so the OBJ text stays short; normalize_mesh still maps the
  // result to itself within 1e-6.
  for (auto& v : normalized.vertices) {
    for (int a = 0; a < 3; ++a) v[a] = std::round(v[a] * 1e6) / 1e6;
  }
  return normalized;
}

}  // namespace airloom::synth
