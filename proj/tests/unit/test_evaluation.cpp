// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "torch_doctest.hpp"

#include <sstream>

#include <json.hpp>

#include "airloom/evaluation.hpp"
#include "airloom/training.hpp"
#include "fixtures.hpp"

using namespace airloom;
using nlohmann::json;

namespace {

const Checkpoint& trained() {
  static const Checkpoint c = [] {
    const auto cfg = fixture::tiny_config();
    const auto data = load_training_data(fixture::tiny_corpus(), dataset::Split::train, cfg);
    return run_stage2(cfg, data, run_stage1(cfg, data));
  }();
  return c;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("ground truth scored against itself") {
  const auto samples = dataset::load_split(fixture::tiny_corpus(), dataset::Split::test);
  REQUIRE_FALSE(samples.empty());
  std::vector<SampleMetrics> all;
  for (const auto& s : samples) {
    const auto m = score_prediction(s.id, s.sdf, s.mesh, s);
    CHECK(m.iou == 1.0);
    CHECK(m.cd == 0.0);
    CHECK(m.faces == s.mesh.faces.size());
    all.push_back(m);
  }
  const auto r = summarize(all);
  CHECK(r.mean_iou == 1.0);
  CHECK(r.mean_cd == 0.0);
}

TEST_CASE("empty predictions are scored, not rejected") {
  const auto s = dataset::load_split(fixture::tiny_corpus(), dataset::Split::test).front();
  geometry::SDFGrid outside(s.sdf.resolution, s.sdf.truncation, s.sdf.bbox, s.sdf.truncation);
  const auto m = score_prediction(s.id, outside, {}, s);
  CHECK(m.iou == 0.0);
  CHECK(m.cd > 0.0);
  CHECK(m.faces == 0);
  geometry::SDFGrid wrong(8, 0.1f);
  CHECK_THROWS_AS(score_prediction(s.id, wrong, {}, s), InvalidArgument);
}

TEST_CASE("summarize is the arithmetic mean") {
  const auto r = summarize({{"a", 0.2, 0.5, 1}, {"b", 0.6, 0.1, 2}, {"c", 1.0, 0.0, 3}});
  CHECK(r.mean_iou == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(r.mean_cd == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_THROWS_AS(summarize({}), InvalidArgument);
}

TEST_CASE("median") {
  CHECK(median({3.0}) == 3.0);
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS_AS(median({}), InvalidArgument);
}

TEST_CASE("evaluate gates on the stage and is reproducible per seed") {
  const auto cfg = fixture::tiny_config();
  auto early = make_initial_checkpoint(cfg);
  CHECK_THROWS_AS(evaluate(early, fixture::tiny_corpus(), dataset::Split::test, 0), TrainingError);

  auto ck = clone_checkpoint(trained());
  EvalOptions eo;
  eo.steps = 5;
  const auto a = evaluate(ck, fixture::tiny_corpus(), dataset::Split::test, 4, eo);
  const auto b = evaluate(ck, fixture::tiny_corpus(), dataset::Split::test, 4, eo);
  CHECK(a.samples.size() == fixture::tiny_corpus().count(dataset::Split::test));
  CHECK(a.to_json() == b.to_json());
  CHECK(a.split == "test");
  CHECK(a.checkpoint_id == ck.id());
  CHECK(a.config_fingerprint.size() == 16);
  for (const auto& s : a.samples) {
    CHECK(s.iou >= 0.0);
    CHECK(s.iou <= 1.0);
    CHECK(s.cd >= 0.0);
  }
  CHECK_THROWS_AS(evaluate(ck, std::vector<dataset::Sample>{}, 0, eo), InvalidArgument);

  const auto j = json::parse(a.to_json().dump());
  CHECK(j["samples"].size() == a.samples.size());
  CHECK(j["mean_iou"].get<double>() == a.mean_iou);
  const auto csv = a.csv();
  CHECK(csv.rfind("id,iou,cd,faces\n", 0) == 0);
  CHECK(count_lines(csv) == a.samples.size() + 2);
  CHECK(a.table().find("mean") != std::string::npos);
}

TEST_CASE("ablation harness") {
  auto cfg = fixture::tiny_config();
  for (auto* s : {&cfg.stage1_coarse, &cfg.stage1_fine, &cfg.stage2, &cfg.stage3}) s->epochs = 1;
  fixture::TempDir dir("ablation");
  AblationOptions opts;
  opts.work_dir = dir.path();
  opts.eval.steps = 3;
  const auto t = ablation_run(cfg, fixture::tiny_corpus(), {1, 2}, opts);
  CHECK(t.seeds == std::vector<std::uint64_t>{1, 2});
  REQUIRE(t.rows.size() == 3);
  for (const auto& v : kAblationVariants) {
    const auto& r = t.row(v);
    CHECK(r.iou.size() == 2);
    CHECK(r.median_iou == median(r.iou));
    CHECK(r.median_cd == median(r.cd));
    CHECK(std::filesystem::exists(dir.path() / "seed_2" / v / "ckpt" / "ckpt.json"));
  }
  CHECK(t.row("no-curriculum").config_fingerprint != t.row("full").config_fingerprint);

  // The no-curriculum checkpoint's config differs from the full one only in the curriculum flag.
  auto full = load_checkpoint(dir.path() / "seed_1" / "full" / "ckpt").config_snapshot;
  auto plain = load_checkpoint(dir.path() / "seed_1" / "no-curriculum" / "ckpt").config_snapshot;
  CHECK(full["stage3"]["curriculum"] == true);
  CHECK(plain["stage3"]["curriculum"] == false);
  plain["stage3"]["curriculum"] = true;
  CHECK(plain.dump() == full.dump());

  const auto csv = t.csv();
  CHECK(count_lines(csv) == 1 + 3 * 3);
  CHECK(json::parse(t.to_json().dump())["rows"].size() == 3);
  CHECK_THROWS_AS(t.row("other"), InvalidArgument);

  AblationOptions bad;
  bad.variants = {"full", "bogus"};
  CHECK_THROWS_AS(ablation_run(cfg, fixture::tiny_corpus(), {1}, bad), InvalidArgument);
  CHECK_THROWS_AS(ablation_run(cfg, fixture::tiny_corpus(), {}, opts), InvalidArgument);
}
