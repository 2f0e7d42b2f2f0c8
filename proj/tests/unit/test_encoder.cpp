// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "torch_doctest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "airloom/model.hpp"
#include "airloom/synthdata.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace airloom;

namespace {

float max_abs_diff(const ConditionEmbedding& a, const ConditionEmbedding& b) {
  float m = 0.0f;
  for (std::size_t i = 0; i < a.vector.size(); ++i) m = std::max(m, std::abs(a.vector[i] - b.vector[i]));
  return m;
}

geometry::SketchCloud as_sketch(std::vector<geometry::Vec3> pts) {
  geometry::SketchCloud s;
  s.points = std::move(pts);
  return s;
}

}  // namespace

TEST_CASE("tokenize does not depend on point order") {
  Rng rng(5);
  const auto pc = oracle::random_cloud(rng, 600);
  EncoderConfig cfg{64, 1, 2, 32, 8};
  const auto a = tokenize(pc.points, cfg);
  auto shuffled = pc.points;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(9));
  const auto b = tokenize(shuffled, cfg);
  CHECK(torch::equal(a.centers, b.centers));
  CHECK(torch::equal(a.neighbors, b.neighbors));
  CHECK(a.centers.sizes() == std::vector<int64_t>{64, 3});
  CHECK(a.neighbors.sizes() == std::vector<int64_t>{64, 8, 3});
}

TEST_CASE("tokenize rejects too few or non-finite points") {
  EncoderConfig cfg{64, 1, 2, 32, 8};
  Rng rng(1);
  CHECK_THROWS_AS(tokenize(oracle::random_cloud(rng, 10).points, cfg), InvalidArgument);
  auto pts = oracle::random_cloud(rng, 100).points;
  pts[3].y() = std::nan("");
  CHECK_THROWS_AS(tokenize(pts, cfg), InvalidArgument);
}

TEST_CASE("sketch embeddings: dimension, permutation invariance, noise stability") {
  GarmentModel model(ModelConfig{}, 2);
  Rng rng(77);
  for (int i = 0; i < 6; ++i) {
    auto pts = i % 2 ? oracle::random_cloud(rng, geometry::kSketchPoints).points
                     : synth::make_sketch(synth::make_garment(synth::sample_params(3, i)), synth::sample_style(3, i)).points;
    const auto e = encode_sketch(model, as_sketch(pts), EncodeMode::eval);
    CHECK(e.vector.size() == 1024);
    CHECK(e.source == EmbeddingSource::sketch);
    CHECK(std::all_of(e.vector.begin(), e.vector.end(), [](float v) { return std::isfinite(v); }));

    auto perm = pts;
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(i));
    CHECK(max_abs_diff(e, encode_sketch(model, as_sketch(perm), EncodeMode::eval)) <= 1e-5f);

    auto noisy = pts;
    for (auto& p : noisy) {
      for (int k = 0; k < 3; ++k) p[k] = std::clamp(p[k] + 1e-6 * rng.normal(), -1.0, 1.0);
    }
    CHECK(max_abs_diff(e, encode_sketch(model, as_sketch(noisy), EncodeMode::eval)) <= 1e-3f);
  }
}

TEST_CASE("encode_sketch requires exactly 4096 points") {
  GarmentModel model(fixture::tiny_config().model, 1);
  Rng rng(4);
  CHECK_THROWS_AS(encode_sketch(model, as_sketch(oracle::random_cloud(rng, 4095).points), EncodeMode::eval),
                  InvalidArgument);
  CHECK_THROWS_AS(encode_sketch(model, as_sketch(oracle::random_cloud(rng, 4097).points), EncodeMode::eval),
                  InvalidArgument);
  CHECK_NOTHROW(encode_sketch(model, as_sketch(oracle::random_cloud(rng, 4096).points), EncodeMode::eval));
}

TEST_CASE("point-cloud and null embeddings") {
  GarmentModel model(fixture::tiny_config().model, 1);
  Rng rng(8);
  const auto e = encode_pointcloud(model, oracle::random_cloud(rng, 500), EncodeMode::eval);
  CHECK(e.source == EmbeddingSource::pointcloud);
  CHECK(e.vector.size() == 1024);
  const auto n = null_embedding(model);
  CHECK(n.source == EmbeddingSource::null);
  CHECK(n.vector.size() == 1024);
}

TEST_CASE("init_sketch_from_pointcloud makes both encoders agree") {
  GarmentModel model(fixture::tiny_config().model, 1);
  Rng rng(8);
  const auto pc = oracle::random_cloud(rng, geometry::kSketchPoints);
  CHECK(max_abs_diff(encode_pointcloud(model, pc, EncodeMode::eval),
                     encode_sketch(model, as_sketch(pc.points), EncodeMode::eval)) > 0.0f);
  init_sketch_from_pointcloud(model);
  CHECK(max_abs_diff(encode_pointcloud(model, pc, EncodeMode::eval),
                     encode_sketch(model, as_sketch(pc.points), EncodeMode::eval)) == 0.0f);
}

TEST_CASE("embedding export is raw float32[1024] and round-trips") {
  fixture::TempDir dir("embedding");
  GarmentModel model(fixture::tiny_config().model, 1);
  Rng rng(2);
  const auto e = encode_pointcloud(model, oracle::random_cloud(rng, 300), EncodeMode::eval);
  const auto path = dir.path() / "e.f32";
  export_embedding(e, path);
  CHECK(std::filesystem::file_size(path) == 1024 * sizeof(float));
  std::ifstream in(path, std::ios::binary);
  std::vector<float> raw(1024);
  in.read(reinterpret_cast<char*>(raw.data()), 1024 * sizeof(float));
  CHECK(raw == e.vector);
  const auto back = import_embedding(path, EmbeddingSource::pointcloud);
  CHECK(back.vector == e.vector);

  std::ofstream(dir.path() / "short.f32", std::ios::binary).write("abcd", 4);
  CHECK_THROWS(import_embedding(dir.path() / "short.f32", EmbeddingSource::sketch));
}

TEST_CASE("ConditionEmbedding validation") {
  ConditionEmbedding e;
  e.vector.assign(1023, 0.0f);
  CHECK_THROWS_AS(e.validate(), InvalidArgument);
  e.vector.assign(1024, 0.0f);
  CHECK_NOTHROW(e.validate());
  e.vector[5] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(e.validate(), InvalidArgument);
}
