// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "torch_doctest.hpp"

#include <algorithm>
#include <cmath>

#include "airloom/diffusion.hpp"
#include "fixtures.hpp"

using namespace airloom;
using geometry::OccupancyGrid;

namespace {

// Upsample by `factor`, mark occupied voxels with an empty or out-of-domain
// 6-neighbor, then take every voxel within Chebyshev distance `band` of one.
OccupancyGrid band_brute_force(const OccupancyGrid& coarse, int fine, int band) {
  const int f = fine / coarse.resolution;
  auto occ = [&](int x, int y, int z) {
    if (x < 0 || y < 0 || z < 0 || x >= fine || y >= fine || z >= fine) return false;
    return coarse.at(x / f, y / f, z / f);
  };
  std::vector<std::array<int, 3>> boundary;
  const int n6[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (int x = 0; x < fine; ++x)
    for (int y = 0; y < fine; ++y)
      for (int z = 0; z < fine; ++z) {
        if (!occ(x, y, z)) continue;
        for (const auto& d : n6) {
          if (!occ(x + d[0], y + d[1], z + d[2])) {
            boundary.push_back({x, y, z});
            break;
          }
        }
      }
  OccupancyGrid out(fine);
  for (int x = 0; x < fine; ++x)
    for (int y = 0; y < fine; ++y)
      for (int z = 0; z < fine; ++z)
        for (const auto& b : boundary) {
          if (std::max({std::abs(x - b[0]), std::abs(y - b[1]), std::abs(z - b[2])}) <= band) {
            out.set(x, y, z, true);
            break;
          }
        }
  return out;
}

ConditionEmbedding random_embedding(std::uint64_t seed) {
  Rng rng(seed);
  ConditionEmbedding e;
  e.source = EmbeddingSource::sketch;
  for (int i = 0; i < 1024; ++i) e.vector.push_back(static_cast<float>(rng.normal()));
  return e;
}

}  // namespace

TEST_CASE("make_schedule values and preconditions") {
  const auto s = make_schedule(1000, 1e-4, 0.02);
  CHECK(s.T == 1000);
  CHECK(s.alpha_bar(0) == 1.0);
  CHECK(s.alpha_bar(1) == doctest::Approx(0.9999).epsilon(1e-12));
  CHECK(s.betas.back() == doctest::Approx(0.02).epsilon(1e-12));
  for (int t = 1; t < s.T; ++t) CHECK(s.alpha_bar(t + 1) < s.alpha_bar(t));

  const auto c = make_schedule(100, 0.01, 0.01);
  for (int t = 0; t <= 100; ++t) CHECK(c.alpha_bar(t) == doctest::Approx(std::pow(0.99, t)).epsilon(1e-12));

  CHECK_THROWS_AS(make_schedule(9, 1e-4, 0.02), InvalidArgument);
  CHECK_THROWS_AS(make_schedule(100, 0.0, 0.02), InvalidArgument);
  CHECK_THROWS_AS(make_schedule(100, 0.03, 0.02), InvalidArgument);
  CHECK_THROWS_AS(make_schedule(100, 1e-4, 1.0), InvalidArgument);
  CHECK_THROWS_AS(s.alpha_bar(1001), InvalidArgument);
}

TEST_CASE("q_sample matches the closed form and its Monte Carlo moments") {
  const auto s = make_schedule(1000, 1e-4, 0.02);
  CHECK_THROWS_AS(q_sample(torch::zeros({4}), 0, torch::zeros({4}), s), InvalidArgument);
  CHECK_THROWS_AS(q_sample(torch::zeros({4}), 1001, torch::zeros({4}), s), InvalidArgument);

  double prod = 1.0;
  for (int i = 0; i < 500; ++i) prod *= 1.0 - (1e-4 + (0.02 - 1e-4) * i / 999.0);
  torch::manual_seed(0);
  const int n = 200000;
  const auto z0 = torch::full({n}, 0.7);
  const auto zt = q_sample(z0, 500, torch::randn({n}), s);
  const double mean = zt.mean().item<double>();
  const double var = zt.var().item<double>();
  CHECK(std::abs(mean - std::sqrt(prod) * 0.7) < 5.0 * std::sqrt((1.0 - prod) / n));
  CHECK(var == doctest::Approx(1.0 - prod).epsilon(0.02));

  // Per-sample timesteps agree with the scalar form.
  const auto batch = torch::randn({3, 5});
  const auto eps = torch::randn({3, 5});
  const auto t = torch::tensor({1, 400, 1000}, torch::kLong);
  const auto many = q_sample(batch, t, eps, s);
  for (int i = 0; i < 3; ++i) {
    CHECK(torch::allclose(many[i], q_sample(batch[i], t[i].item<int>(), eps[i], s), 1e-6, 1e-7));
  }
}

TEST_CASE("denoising_loss with stub denoisers") {
  const auto s = make_schedule(100, 1e-4, 0.02);
  torch::manual_seed(1);
  const auto z0 = torch::randn({2, 1, 4, 4, 4});
  const auto eps = torch::randn({2, 1, 4, 4, 4});
  const auto t = torch::tensor({3, 70}, torch::kLong);
  const auto cond = torch::zeros({2, 1024});
  const Denoiser exact = [&](const torch::Tensor&, const torch::Tensor&, const torch::Tensor&) { return eps; };
  CHECK(denoising_loss(z0, {}, t, eps, cond, s, exact).item<double>() == doctest::Approx(0.0).epsilon(1e-12));
  for (double c : {0.5, -1.25}) {
    const Denoiser shifted = [&, c](const torch::Tensor&, const torch::Tensor&, const torch::Tensor&) {
      return eps + c;
    };
    CHECK(denoising_loss(z0, {}, t, eps, cond, s, shifted).item<double>() == doctest::Approx(c * c).epsilon(1e-6));
  }

  // Masked: errors outside the mask do not count, and inactive z_t equals z0.
  auto mask = torch::zeros({2, 1, 4, 4, 4});
  mask.index_put_({torch::indexing::Slice(), 0, torch::indexing::Slice(0, 2)}, 1.0);
  const Denoiser outside = [&](const torch::Tensor& zt, const torch::Tensor&, const torch::Tensor&) {
    CHECK(torch::equal(zt.masked_select(mask == 0), z0.masked_select(mask == 0)));
    return eps + 3.0 * (1.0 - mask);
  };
  CHECK(denoising_loss(z0, mask, t, eps, cond, s, outside).item<double>() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("cfg_combine is exact at the anchors") {
  torch::manual_seed(2);
  const auto c = torch::randn({2, 1, 4, 4, 4});
  const auto u = torch::randn({2, 1, 4, 4, 4});
  CHECK(torch::equal(cfg_combine(c, u, 0.0), u));
  CHECK(torch::equal(cfg_combine(c, u, 1.0), c));
  for (double w : {0.0, 0.5, 1.0, 3.0, 7.5}) CHECK(torch::equal(cfg_combine(u, u, w), u));
  CHECK(torch::allclose(cfg_combine(c, u, 3.0), u + 3.0 * (c - u), 1e-5, 1e-6));
}

TEST_CASE("build_band against the brute-force oracle") {
  SUBCASE("empty coarse grid has an empty band") { CHECK(build_band(OccupancyGrid(8), 16, 3).count() == 0); }
  SUBCASE("full coarse grid yields the domain faces") {
    const auto b = build_band(OccupancyGrid(8, true), 16, 1);
    CHECK(b == band_brute_force(OccupancyGrid(8, true), 16, 1));
    CHECK(b.at(0, 7, 7));
    CHECK(b.at(1, 7, 7));
    CHECK_FALSE(b.at(2, 7, 7));
    CHECK_FALSE(b.at(8, 8, 8));
  }
  SUBCASE("single voxel, factor 2, band 1") {
    OccupancyGrid c(8);
    c.set(3, 4, 5, true);
    const auto b = build_band(c, 16, 1);
    CHECK(b == band_brute_force(c, 16, 1));
    CHECK(b.count() == 4 * 4 * 4);
  }
  SUBCASE("random grids") {
    Rng rng(12);
    for (int i = 0; i < 20; ++i) {
      OccupancyGrid c(8);
      const double p = rng.uniform(0.05, 0.6);
      for (auto& bit : c.bits) bit = rng.uniform() < p;
      const int factor = 1 + static_cast<int>(rng.index(2));
      const int band = static_cast<int>(rng.index(4));
      CHECK(build_band(c, 8 * factor, band) == band_brute_force(c, 8 * factor, band));
    }
  }
  CHECK_THROWS_AS(build_band(OccupancyGrid(8), 12, 1), InvalidArgument);
}

TEST_CASE("sampling_timesteps") {
  const auto ts = sampling_timesteps(1000, 50);
  CHECK(ts.size() == 50);
  CHECK(ts.front() == 20);
  CHECK(ts.back() == 1000);
  CHECK(std::is_sorted(ts.begin(), ts.end()));
  CHECK(std::adjacent_find(ts.begin(), ts.end()) == ts.end());
  CHECK(sampling_timesteps(10, 10) == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  CHECK_THROWS_AS(sampling_timesteps(10, 11), InvalidArgument);
  CHECK_THROWS_AS(sampling_timesteps(10, 0), InvalidArgument);
}

TEST_CASE("grid tensor conversions round-trip") {
  Rng rng(3);
  OccupancyGrid g(8);
  for (auto& bit : g.bits) bit = rng.uniform() < 0.3;
  const auto f = occupancy_field(g);
  CHECK(f.sizes() == std::vector<int64_t>{8, 8, 8});
  CHECK(occupancy_from_field(f) == g);
  CHECK(f[1][2][3].item<float>() == (g.at(1, 2, 3) ? 1.0f : -1.0f));
  CHECK(mask_tensor(g).sum().item<double>() == static_cast<double>(g.count()));
}

TEST_CASE("samplers on an untrained model") {
  const auto cfg = fixture::tiny_config();
  GarmentModel model(cfg.model, 3);
  const auto sched = make_schedule(cfg.diffusion);
  const auto a = random_embedding(1), b = random_embedding(2);

  CHECK_THROWS_AS(sample_coarse(model, sched, a, {0, 3.0, sched.T + 1}), InvalidArgument);
  CHECK_THROWS_AS(sample_coarse(model, sched, a, {0, 3.0, 0}), InvalidArgument);

  const auto c1 = sample_coarse(model, sched, a, {5, 3.0, 5});
  CHECK(c1.resolution == 8);
  CHECK(sample_coarse(model, sched, a, {5, 3.0, 5}) == c1);
  CHECK(sample_coarse(model, sched, a, {5, 0.0, 5}) == sample_coarse(model, sched, b, {5, 0.0, 5}));

  CHECK_THROWS_AS(sample_fine(model, sched, OccupancyGrid(8), a, {5, 3.0, 5}), EmptyBandError);
  CHECK_THROWS_AS(sample_fine(model, sched, OccupancyGrid(4, true), a, {5, 3.0, 5}), InvalidArgument);
  OccupancyGrid coarse(8);
  for (int x = 2; x < 6; ++x)
    for (int y = 2; y < 6; ++y)
      for (int z = 2; z < 6; ++z) coarse.set(x, y, z, true);
  const auto sdf = sample_fine(model, sched, coarse, a, {5, 3.0, 5});
  CHECK(sdf.resolution == 16);
  CHECK(std::all_of(sdf.values.begin(), sdf.values.end(),
                    [&](float v) { return std::isfinite(v) && std::abs(v) <= sdf.truncation; }));
  // Inactive voxels: +trunc outside the coarse shape, -trunc inside.
  CHECK(sdf.at(0, 0, 0) == sdf.truncation);
  CHECK(sdf.at(8, 8, 8) == -sdf.truncation);
  CHECK(sample_fine(model, sched, coarse, a, {5, 3.0, 5}) == sdf);
}

TEST_CASE("generate: deterministic per seed, distinct across seeds") {
  const auto cfg = fixture::tiny_config();
  GarmentModel model(cfg.model, 4);
  const auto sched = make_schedule(cfg.diffusion);
  const auto e = random_embedding(7);
  const auto g1 = generate(model, sched, e, {1, 3.0, 5});
  const auto g2 = generate(model, sched, e, {1, 3.0, 5});
  const auto g3 = generate(model, sched, e, {2, 3.0, 5});
  CHECK(g1.mesh == g2.mesh);
  CHECK(g1.sdf == g2.sdf);
  CHECK_FALSE(g1.mesh == g3.mesh);
  CHECK(g1.band == build_band(g1.coarse, 16, cfg.model.band_width));
  CHECK_NOTHROW(g1.mesh.validate());
}

TEST_CASE("stage_loss is finite and differentiable for both stages") {
  const auto cfg = fixture::tiny_config();
  GarmentModel model(cfg.model, 5);
  const auto sched = make_schedule(cfg.diffusion);
  Rng rng(3);
  torch::manual_seed(3);
  StageBatch cb{torch::randn({2, 1, 8, 8, 8}).sign(), torch::randn({2, 1024}), {}, {}};
  auto noise = draw_step_noise(cb, sched, cfg.diffusion, rng);
  CHECK(noise.t.min().item<int64_t>() >= 1);
  CHECK(noise.t.max().item<int64_t>() <= sched.T);
  auto loss = stage_loss(model, Stage::coarse, cb, noise, sched);
  CHECK(std::isfinite(loss.item<double>()));
  loss.backward();
  CHECK(model->coarse->parameters().front().grad().defined());

  auto mask = (torch::rand({2, 1, 16, 16, 16}) < 0.3).to(torch::kFloat);
  StageBatch fb{torch::rand({2, 1, 16, 16, 16}) * 2 - 1, torch::randn({2, 1024}),
                torch::randn({2, 1, 16, 16, 16}).sign(), mask};
  noise = draw_step_noise(fb, sched, cfg.diffusion, rng);
  CHECK(std::isfinite(stage_loss(model, Stage::fine, fb, noise, sched).item<double>()));
  const auto x0 = predict_clean(model, Stage::fine, fb, 10, torch::randn({2, 1, 16, 16, 16}), sched);
  CHECK(x0.sizes() == std::vector<int64_t>{2, 1, 16, 16, 16});
}
