// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

// Small models and corpora shared by the model-level tests.

#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <unistd.h>

#include "airloom/config.hpp"
#include "airloom/dataset.hpp"
#include "airloom/synthdata.hpp"

namespace fixture {

namespace fs = std::filesystem;

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = fs::temp_directory_path() / ("airloom_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

/// 16^3 fine / 8^3 coarse grids and a narrow encoder: seconds per epoch.
inline airloom::TrainConfig tiny_config() {
  airloom::TrainConfig c;
  auto& m = c.model;
  m.coarse_resolution = 8;
  m.fine_resolution = 16;
  m.band_width = 2;
  m.encoder = {32, 1, 2, 32, 8};
  m.coarse = {2, 1, {8, 16, 16}, {false, true, true}, 32, 4, 32, 2, 4};
  m.fine = {4, 1, {8, 8, 16}, {false, false, true}, 32, 4, 32, 2, 4};
  c.diffusion.timesteps = 100;
  c.diffusion.sampling_steps = 5;
  c.curriculum.queries = 64;
  c.curriculum.score_timestep = 10;
  for (auto* s : {&c.stage1_coarse, &c.stage1_fine, &c.stage2, &c.stage3}) {
    s->epochs = 2;
    s->batch_size = 4;
    s->learning_rate = 1e-3;
  }
  c.validate();
  return c;
}

/// A corpus at tiny_config() resolutions, generated once per process and
/// kept under the temp dir for the remaining tests.
inline const airloom::dataset::Manifest& tiny_corpus(std::size_t count = 10) {
  static std::map<std::size_t, airloom::dataset::Manifest> cache;
  auto it = cache.find(count);
  if (it != cache.end()) return it->second;
  const auto dir = fs::temp_directory_path() /
                   ("airloom_corpus_" + std::to_string(count) + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  airloom::synth::GenerateOptions opts;
  opts.resolution = 16;
  opts.coarse_resolution = 8;
  auto m = airloom::synth::generate_dataset(count, 11, dir, opts);
  static struct Cleanup {
    std::vector<fs::path> dirs;
    ~Cleanup() {
      std::error_code ec;
      for (const auto& d : dirs) fs::remove_all(d, ec);
    }
  } cleanup;
  cleanup.dirs.push_back(dir);
  return cache.emplace(count, std::move(m)).first->second;
}

}  // namespace fixture
