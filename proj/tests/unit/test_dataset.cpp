// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <set>

#include "airloom/common.hpp"
#include "airloom/dataset.hpp"
#include "airloom/geometry/io.hpp"
#include "airloom/geometry/sdf.hpp"
#include "airloom/synthdata.hpp"

using namespace airloom;
using namespace airloom::geometry;
namespace fs = std::filesystem;

namespace {

dataset::Sample make_sample(const std::string& id, std::uint64_t seed) {
  dataset::Sample s;
  s.id = id;
  s.mesh = synth::make_garment(synth::sample_params(seed, 0));
  s.sketch = synth::make_sketch(s.mesh, synth::sample_style(seed, 0));
  s.sdf = mesh_to_sdf_grid(s.mesh, 16, 0.1f);
  s.coarse = downsample_occupancy(occupancy_from_sdf(s.sdf), 2);
  return s;
}

dataset::Manifest fake_manifest(std::size_t n) {
  dataset::Manifest m;
  for (std::size_t i = 0; i < n; ++i) {
    dataset::SampleRecord r;
    r.id = "s" + std::to_string(i);
    m.records.push_back(r);
  }
  return m;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("write_sample / read_sample round-trip bit-exactly") {
  TempDir dir("airloom_ds_roundtrip");
  auto s = make_sample("x1", 3);
  s.sdf.values[5] = -0.0f;  // signed zero must survive
  const auto rec = dataset::write_sample(s, dir.path);
  const auto back = dataset::read_sample(dir.path, rec);
  CHECK(back.id == s.id);
  CHECK(back.mesh == s.mesh);
  CHECK(back.sketch == s.sketch);
  CHECK(back.coarse == s.coarse);
  REQUIRE(back.sdf.values.size() == s.sdf.values.size());
  CHECK(std::memcmp(back.sdf.values.data(), s.sdf.values.data(), s.sdf.values.size() * 4) == 0);
  CHECK(back.sdf.truncation == s.sdf.truncation);
  CHECK(back.sdf.bbox == s.sdf.bbox);
  CHECK(back.sdf == s.sdf);
  CHECK(rec.sdf_path == "x1/sdf_16.f32");
  CHECK(rec.occ_path == "x1/occ_8.u8");
}

TEST_CASE("write_sample rejects invariant violations") {
  TempDir dir("airloom_ds_reject");
  auto s = make_sample("bad", 4);
  auto short_sketch = s;
  short_sketch.sketch.points.resize(4000);
  CHECK_THROWS_WITH_AS(dataset::write_sample(short_sketch, dir.path), doctest::Contains("sketch point count"),
                       InvalidArgument);
  auto over = s;
  over.sdf.values[0] = 0.2f;
  CHECK_THROWS_WITH_AS(dataset::write_sample(over, dir.path), doctest::Contains("truncation"), InvalidArgument);
  auto nan = s;
  nan.sketch.points[7].y() = std::nan("");
  CHECK_THROWS_AS(dataset::write_sample(nan, dir.path), InvalidArgument);
  CHECK_FALSE(fs::exists(dir.path / "bad"));
}

TEST_CASE("split_manifest sizes follow the 8:2 ratio") {
  auto m10 = dataset::split_manifest(fake_manifest(10), {}, 1);
  CHECK(m10.count(dataset::Split::train) == 8);
  CHECK(m10.count(dataset::Split::test) == 2);
  auto m969 = dataset::split_manifest(fake_manifest(969), {}, 1);
  CHECK(m969.count(dataset::Split::train) == 775);
  CHECK(m969.count(dataset::Split::test) == 194);
  CHECK_THROWS_AS(dataset::split_manifest(fake_manifest(4), {}, 1), InvalidArgument);
}

TEST_CASE("split_manifest is a deterministic partition") {
  for (std::size_t n : {5u, 6u, 17u, 100u}) {
    const auto base = fake_manifest(n);
    const auto a = dataset::split_manifest(base, {}, 42);
    const auto b = dataset::split_manifest(base, {}, 42);
    CHECK(a.records == b.records);
    std::set<std::string> train, test;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(a.records[i].id == base.records[i].id);
      (a.records[i].split == dataset::Split::train ? train : test).insert(a.records[i].id);
    }
    CHECK(train.size() + test.size() == n);
    CHECK(train.size() == static_cast<std::size_t>(std::llround(0.8 * n)));
  }
  const auto x = dataset::split_manifest(fake_manifest(100), {}, 1);
  const auto y = dataset::split_manifest(fake_manifest(100), {}, 2);
  CHECK_FALSE(x.records == y.records);
}

TEST_CASE("load_split reads one split in manifest order and names broken files") {
  TempDir dir("airloom_ds_load");
  dataset::Manifest m;
  m.root = dir.path;
  for (int i = 0; i < 10; ++i) m.records.push_back(dataset::write_sample(make_sample("id" + std::to_string(i), i), dir.path));
  m = dataset::split_manifest(m, {}, 5);
  dataset::write_manifest(m, dir.path / "manifest.jsonl");
  const auto reread = dataset::read_manifest(dir.path / "manifest.jsonl");
  CHECK(reread.root == dir.path);

  const auto test = dataset::load_split(reread, dataset::Split::test);
  REQUIRE(test.size() == 2);
  const auto expected = reread.of(dataset::Split::test);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(test[i].id == expected[i].id);
    test[i].sdf.validate();
  }

  fs::remove(dir.path / expected[1].sdf_path);
  try {
    dataset::load_split(reread, dataset::Split::test);
    FAIL("expected an error");
  } catch (const IoError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(expected[1].id) != std::string::npos);
    CHECK(msg.find("sdf_16.f32") != std::string::npos);
  }
}

TEST_CASE("corrupt files are reported") {
  TempDir dir("airloom_ds_corrupt");
  const auto rec = dataset::write_sample(make_sample("c", 6), dir.path);
  write_text(dir.path / rec.occ_path, "short");
  CHECK_THROWS_WITH_AS(dataset::read_sample(dir.path, rec), doctest::Contains("occ_8.u8"), IoError);

  write_text(dir.path / "manifest.jsonl", R"({"format_version":9,"id":"c"})" "\n");
  CHECK_THROWS_WITH_AS(dataset::read_manifest(dir.path / "manifest.jsonl"), doctest::Contains("format_version 9"),
                       InvalidArgument);
}

TEST_CASE("sketch.json accepts point-only documents") {
  const auto sk = dataset::sketch_from_json(R"({"points": [[0.1, 0.2, 0.3], [-1, 1, 0]]})");
  CHECK(sk.points.size() == 2);
  CHECK(sk.strokes.empty());
  CHECK(sk.points[1] == Vec3(-1, 1, 0));
  CHECK_THROWS_AS(dataset::sketch_from_json(R"({"strokes": []})"), InvalidArgument);
  CHECK_THROWS_AS(dataset::sketch_from_json(R"({"points": [[1, 2]]})"), InvalidArgument);
  CHECK_THROWS_AS(dataset::sketch_from_json("not json"), InvalidArgument);
}
