// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/dataset.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "airloom/common.hpp"
#include "airloom/geometry/io.hpp"
#include "airloom/geometry/mesh.hpp"

namespace airloom::dataset {

namespace fs = std::filesystem;
using nlohmann::json;
using geometry::Vec3;

namespace {

json point_json(const Vec3& p) { return json::array({p.x(), p.y(), p.z()}); }

Vec3 parse_point(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument("expected a [x, y, z] array");
  Vec3 p;
  for (int a = 0; a < 3; ++a) {
    if (!j[a].is_number()) throw InvalidArgument("point coordinate is not a number");
    p[a] = j[a].get<double>();
  }
  return p;
}

std::string sdf_name(int r) { return "sdf_" + std::to_string(r) + ".f32"; }
std::string occ_name(int r) { return "occ_" + std::to_string(r) + ".u8"; }

json record_json(const SampleRecord& r, int version) {
  return json{{"format_version", version}, {"id", r.id},
              {"split", to_string(r.split)}, {"mesh_path", r.mesh_path},
              {"sketch_path", r.sketch_path}, {"sdf_path", r.sdf_path},
              {"occ_path", r.occ_path},   {"meta_path", r.meta_path},
              {"params", r.params}};
}

}  // namespace

std::string to_string(Split s) { return s == Split::train ? "train" : "test"; }

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw InvalidArgument("unknown split '" + s + "' (expected train or test)");
}

void Sample::validate() const {
  if (id.empty() || id.find('/') != std::string::npos || id == "." || id == "..") {
    throw InvalidArgument("sample id '" + id + "' is not a valid directory name");
  }
  mesh.validate();
  if (mesh.empty()) throw InvalidArgument("sample " + id + ": mesh has no faces");
  sketch.validate();
  sdf.validate();
  coarse.validate();
  if (sdf.resolution % coarse.resolution != 0) {
    throw InvalidArgument("sample " + id + ": coarse resolution " + std::to_string(coarse.resolution) +
                          " does not divide " + std::to_string(sdf.resolution));
  }
}

std::size_t Manifest::count(Split s) const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.split == s ? 1 : 0;
  return n;
}

std::vector<SampleRecord> Manifest::of(Split s) const {
  std::vector<SampleRecord> out;
  for (const auto& r : records) {
    if (r.split == s) out.push_back(r);
  }
  return out;
}

std::string sketch_to_json(const geometry::SketchCloud& sketch) {
  json strokes = json::array();
  for (const auto& line : sketch.strokes) {
    json l = json::array();
    for (const auto& p : line) l.push_back(point_json(p));
    strokes.push_back(std::move(l));
  }
  json points = json::array();
  for (const auto& p : sketch.points) points.push_back(point_json(p));
  return json{{"strokes", std::move(strokes)}, {"points", std::move(points)}}.dump();
}

geometry::SketchCloud sketch_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("sketch.json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("points") || !j["points"].is_array()) {
    throw InvalidArgument("sketch.json: missing \"points\" array");
  }
  geometry::SketchCloud sk;
  for (const auto& p : j["points"]) sk.points.push_back(parse_point(p));
  if (j.contains("strokes")) {
    if (!j["strokes"].is_array()) throw InvalidArgument("sketch.json: \"strokes\" must be an array");
    for (const auto& s : j["strokes"]) {
      if (!s.is_array()) throw InvalidArgument("sketch.json: stroke must be an array of points");
      geometry::Polyline line;
      for (const auto& p : s) line.push_back(parse_point(p));
      sk.strokes.push_back(std::move(line));
    }
  }
  return sk;
}

SampleRecord write_sample(const Sample& sample, const fs::path& root) {
  sample.validate();
  const fs::path dir = root / sample.id;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  SampleRecord rec;
  rec.id = sample.id;
  rec.mesh_path = sample.id + "/mesh.obj";
  rec.sketch_path = sample.id + "/sketch.json";
  rec.sdf_path = sample.id + "/" + sdf_name(sample.sdf.resolution);
  rec.occ_path = sample.id + "/" + occ_name(sample.coarse.resolution);
  rec.meta_path = sample.id + "/meta.json";

  geometry::write_obj(root / rec.mesh_path, sample.mesh);
  geometry::write_text(root / rec.sketch_path, sketch_to_json(sample.sketch));
  geometry::write_f32(root / rec.sdf_path, sample.sdf.values);
  geometry::write_u8(root / rec.occ_path, sample.coarse.bits);
  const json meta{{"resolution", sample.sdf.resolution},
                  {"coarse_resolution", sample.coarse.resolution},
                  {"truncation", static_cast<double>(sample.sdf.truncation)},
                  {"bbox", {{"min", point_json(sample.sdf.bbox.min)}, {"max", point_json(sample.sdf.bbox.max)}}}};
  geometry::write_text(root / rec.meta_path, meta.dump(2) + "\n");
  return rec;
}

Sample read_sample(const fs::path& root, const SampleRecord& record) {
  Sample s;
  s.id = record.id;
  std::string current;
  try {
    current = record.meta_path;
    const json meta = json::parse(geometry::read_text(root / current));
    const int res = meta.at("resolution").get<int>();
    const int coarse = meta.at("coarse_resolution").get<int>();
    if (res < 1 || coarse < 1 || res > 1024 || coarse > 1024) throw InvalidArgument("resolution out of range");
    const auto trunc = static_cast<float>(meta.at("truncation").get<double>());
    geometry::BBox box{parse_point(meta.at("bbox").at("min")), parse_point(meta.at("bbox").at("max"))};

    current = record.sdf_path;
    s.sdf = geometry::SDFGrid(res, trunc, box);
    s.sdf.values = geometry::read_f32(root / current, s.sdf.size());
    s.sdf.validate();

    current = record.occ_path;
    s.coarse = geometry::OccupancyGrid(coarse);
    s.coarse.bits = geometry::read_u8(root / current, s.coarse.size());
    for (auto b : s.coarse.bits) {
      if (b > 1) throw InvalidArgument("occupancy byte is neither 0 nor 1");
    }

    current = record.mesh_path;
    s.mesh = geometry::read_obj(root / current);

    current = record.sketch_path;
    s.sketch = sketch_from_json(geometry::read_text(root / current));

    current = record.meta_path;
    s.validate();
  } catch (const std::exception& e) {
    throw IoError("sample " + record.id + " (" + (root / current).string() + "): " + e.what());
  }
  return s;
}

Manifest split_manifest(const Manifest& manifest, SplitRatio ratio, std::uint64_t seed) {
  const std::size_t n = manifest.records.size();
  if (n < 5) throw InvalidArgument("split needs at least 5 records, got " + std::to_string(n));
  if (ratio.train < 0 || ratio.test < 0 || ratio.train + ratio.test == 0) {
    throw InvalidArgument("split ratio must be non-negative with a positive sum");
  }
  const auto n_train = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * ratio.train / (ratio.train + ratio.test)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x73706c69));
  rng.shuffle(order.begin(), order.end());
  Manifest out = manifest;
  for (std::size_t k = 0; k < n; ++k) out.records[order[k]].split = k < n_train ? Split::train : Split::test;
  return out;
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
  std::unordered_set<std::string> ids;
  std::string text;
  for (const auto& r : manifest.records) {
    if (!ids.insert(r.id).second) throw InvalidArgument("duplicate sample id " + r.id);
    text += record_json(r, manifest.format_version).dump() + "\n";
  }
  geometry::write_text(path, text);
}

Manifest read_manifest(const fs::path& path) {
  Manifest m;
  m.root = path.parent_path();
  std::istringstream in(geometry::read_text(path));
  std::string line;
  std::size_t lineno = 0;
  std::unordered_set<std::string> ids;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const int version = j.at("format_version").get<int>();
      if (version != kFormatVersion) {
        throw InvalidArgument("format_version " + std::to_string(version) + " (this build reads " +
                              std::to_string(kFormatVersion) + ")");
      }
      SampleRecord r;
      r.id = j.at("id").get<std::string>();
      r.split = parse_split(j.at("split").get<std::string>());
      r.mesh_path = j.at("mesh_path").get<std::string>();
      r.sketch_path = j.at("sketch_path").get<std::string>();
      r.sdf_path = j.at("sdf_path").get<std::string>();
      r.occ_path = j.at("occ_path").get<std::string>();
      r.meta_path = j.at("meta_path").get<std::string>();
      if (j.contains("params")) r.params = j["params"];
      if (!ids.insert(r.id).second) throw InvalidArgument("duplicate id " + r.id);
      m.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return m;
}

std::vector<Sample> load_split(const Manifest& manifest, Split split) {
  std::vector<Sample> out;
  for (const auto& r : manifest.records) {
    if (r.split == split) out.push_back(read_sample(manifest.root, r));
  }
  return out;
}

geometry::PointCloud conditioning_cloud(const Sample& sample, std::uint64_t seed) {
  return geometry::sample_surface(sample.mesh, geometry::kSketchPoints, derive_seed(seed, fnv1a(sample.id)));
}

}  // namespace airloom::dataset
