// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "torch_doctest.hpp"

#include <json.hpp>

#include "airloom/checkpoint.hpp"
#include "airloom/common.hpp"
#include "airloom/config.hpp"
#include "airloom/geometry/io.hpp"
#include "fixtures.hpp"

using namespace airloom;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Checkpoint tiny_checkpoint(int stage) {
  const auto cfg = fixture::tiny_config();
  Checkpoint c;
  c.stage = stage;
  c.model = GarmentModel(cfg.model, 21);
  c.diffusion = cfg.diffusion;
  c.data_seed = 5;
  c.config_snapshot = to_json(cfg);
  return c;
}

void edit_sidecar(const fs::path& dir, const std::function<void(json&)>& f) {
  auto j = json::parse(geometry::read_text(dir / "ckpt.json"));
  f(j);
  geometry::write_text(dir / "ckpt.json", j.dump(2));
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("save -> load -> save is byte-identical") {
  fixture::TempDir dir("ckpt_roundtrip");
  const auto c = tiny_checkpoint(2);
  save_checkpoint(c, dir.path() / "a");
  const auto loaded = load_checkpoint(dir.path() / "a");
  save_checkpoint(loaded, dir.path() / "b");
  for (const char* f : {"weights.bin", "ckpt.json"}) {
    CHECK(geometry::read_text(dir.path() / "a" / f) == geometry::read_text(dir.path() / "b" / f));
  }
  CHECK(loaded.stage == 2);
  CHECK(loaded.data_seed == 5);
  CHECK(loaded.id() == c.id());
  CHECK(loaded.id().rfind("s2-", 0) == 0);
  CHECK(differing_parameters(c.model, loaded.model).empty());
  CHECK(serialize_weights(c.model, 2) == serialize_weights(loaded.model, 2));

  const auto side = json::parse(geometry::read_text(dir.path() / "a" / "ckpt.json"));
  CHECK(side["stage"] == 2);
  CHECK(side["coarse_resolution"] == 8);
  CHECK(side["fine_resolution"] == 16);
  CHECK(side["timesteps"] == 100);
  CHECK(side["band_width"] == 2);
  CHECK(side["cond_dropout"] == doctest::Approx(0.1));
  CHECK(side["data_seed"] == 5);
}

TEST_CASE("tampered or mismatched checkpoints fail to load") {
  fixture::TempDir dir("ckpt_tamper");
  const auto path = dir.path() / "k";
  save_checkpoint(tiny_checkpoint(1), path);

  edit_sidecar(path, [](json& j) { j["stage"] = 3; });
  CHECK(message_of([&] { load_checkpoint(path); }).find("does not match weights.bin stage") != std::string::npos);

  save_checkpoint(tiny_checkpoint(1), path);
  edit_sidecar(path, [](json& j) { j["format_version"] = 7; });
  const auto msg = message_of([&] { load_checkpoint(path); });
  CHECK(msg.find("format_version 7") != std::string::npos);
  CHECK(msg.find("reads 1") != std::string::npos);

  save_checkpoint(tiny_checkpoint(1), path);
  edit_sidecar(path, [](json& j) { j["band_width"] = 9; });
  CHECK_THROWS_AS(load_checkpoint(path), InvalidArgument);

  save_checkpoint(tiny_checkpoint(1), path);
  auto bytes = geometry::read_text(path / "weights.bin");
  bytes[bytes.size() - 3] ^= 0x40;
  geometry::write_text(path / "weights.bin", bytes);
  CHECK(message_of([&] { load_checkpoint(path); }).find("hash") != std::string::npos);

  save_checkpoint(tiny_checkpoint(1), path);
  geometry::write_text(path / "weights.bin", geometry::read_text(path / "weights.bin").substr(0, 100));
  CHECK_THROWS_AS(load_checkpoint(path), InvalidArgument);

  CHECK_THROWS_AS(load_checkpoint(dir.path() / "missing"), IoError);
}

TEST_CASE("clone_checkpoint is deep") {
  auto a = tiny_checkpoint(1);
  auto b = clone_checkpoint(a);
  CHECK(differing_parameters(a.model, b.model).empty());
  {
    torch::NoGradGuard ng;
    b.model->null_embedding.add_(1.0);
  }
  CHECK(differing_parameters(a.model, b.model) == std::vector<std::string>{"null_embedding"});
}

TEST_CASE("shipped desk config equals the built-in defaults") {
  const auto root = fs::path(AIRLOOM_SOURCE_DIR);
  auto cfg = load_config(root / "configs" / "desk.toml");
  TrainConfig defaults;
  defaults.data.manifest = cfg.data.manifest;
  CHECK(to_json(cfg) == to_json(defaults));
  CHECK(config_fingerprint(cfg) == config_fingerprint(defaults));
  CHECK(cfg.data.manifest.lexically_normal() == (root / "data" / "synth" / "manifest.jsonl"));
  CHECK_NOTHROW(load_config(root / "configs" / "smoke.toml"));
}

TEST_CASE("config parsing is strict") {
  const fs::path base = "/tmp";
  CHECK_NOTHROW(parse_config("", base));
  CHECK_THROWS_AS(parse_config("[model]\ncoarse_res = 8\n", base), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[modle]\n", base), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[stage2]\nepochs = \"ten\"\n", base), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[stage3]\noptimizer = \"sgd\"\n", base), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[model]\ncoarse_resolution = 12\n", base), InvalidArgument);
  CHECK_THROWS_AS(parse_config("scale = 0\n", base), InvalidArgument);
  CHECK_THROWS_AS(parse_config("this is not toml", base), InvalidArgument);

  const auto c = parse_config("scale = 0.01\n[stage3]\ncurriculum = false\n[data]\nmanifest = \"m.jsonl\"\nseed = 4\n",
                              base);
  CHECK_FALSE(c.stage3.curriculum_enabled);
  CHECK(c.data.seed == 4);
  CHECK(c.data.manifest == fs::path("/tmp/m.jsonl"));
  CHECK(c.scaled_epochs(c.stage1_coarse) == 8);
  CHECK(c.scaled_epochs(c.stage2) == 3);
  CHECK(parse_config("scale = 0.0001\n", base).scaled_epochs(c.stage2) == 1);
}

TEST_CASE("config fingerprint tracks every setting") {
  TrainConfig a, b;
  CHECK(config_fingerprint(a) == config_fingerprint(b));
  b.stage3.curriculum_enabled = false;
  CHECK(config_fingerprint(a) != config_fingerprint(b));
  b = a;
  b.curriculum.pacing.q = 2.0;
  CHECK(config_fingerprint(a) != config_fingerprint(b));
  CHECK(config_fingerprint(a).size() == 16);
}
