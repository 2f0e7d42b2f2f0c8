// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/config.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include <toml.hpp>

#include "airloom/common.hpp"
#include "airloom/geometry/io.hpp"

namespace airloom {

using nlohmann::json;
namespace fs = std::filesystem;

void CurriculumConfig::validate() const {
  difficulty.validate();
  pacing.validate();
  if (queries < 1) throw InvalidArgument("curriculum.queries must be positive");
  if (score_timestep < 1) throw InvalidArgument("curriculum.score_timestep must be positive");
}

std::string to_string(Optimizer o) { return o == Optimizer::adam ? "adam" : "adamw"; }

Optimizer parse_optimizer(const std::string& s) {
  if (s == "adam") return Optimizer::adam;
  if (s == "adamw") return Optimizer::adamw;
  throw InvalidArgument("unknown optimizer '" + s + "' (expected adam or adamw)");
}

void StageConfig::validate() const {
  const auto tag = "stage" + std::to_string(stage);
  if (stage < 1 || stage > 3) throw InvalidArgument("stage must be 1, 2 or 3");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InvalidArgument(tag + ": learning_rate must be > 0");
  if (epochs < 1) throw InvalidArgument(tag + ": epochs must be positive");
  if (batch_size < 1) throw InvalidArgument(tag + ": batch_size must be positive");
}

int TrainConfig::scaled_epochs(const StageConfig& s) const {
  return std::max(1, static_cast<int>(std::lround(s.epochs * scale)));
}

void TrainConfig::validate() const {
  model.validate();
  diffusion.validate();
  curriculum.validate();
  stage1_coarse.validate();
  stage1_fine.validate();
  stage2.validate();
  stage3.validate();
  if (stage1_coarse.batch_size != stage1_fine.batch_size) throw InvalidArgument("stage1: one batch_size for both denoisers");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("scale must be > 0");
  if (!(stage3_align_weight >= 0.0)) throw InvalidArgument("stage3.align_weight must be >= 0");
  if (curriculum.score_timestep > diffusion.timesteps) throw InvalidArgument("curriculum.score_timestep exceeds T");
}

namespace {

/// Typed, strict access to one TOML table.
class Section {
 public:
  Section(const toml::table* t, std::string name) : t_(t), name_(std::move(name)) {}

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!t_) return;
    const auto* node = t_->get(key);
    if (!node) return;
    if constexpr (std::is_same_v<T, bool>) {
      auto v = node->value_exact<bool>();
      if (!v) fail(key, "a boolean");
      out = *v;
    } else if constexpr (std::is_integral_v<T>) {
      auto v = node->value_exact<std::int64_t>();
      if (!v) fail(key, "an integer");
      out = static_cast<T>(*v);
    } else if constexpr (std::is_floating_point_v<T>) {
      auto v = node->value<double>();
      if (!v) fail(key, "a number");
      out = static_cast<T>(*v);
    } else if constexpr (std::is_same_v<T, std::string>) {
      auto v = node->value_exact<std::string>();
      if (!v) fail(key, "a string");
      out = *v;
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
      const auto* arr = node->as_array();
      if (!arr) fail(key, "an integer array");
      out.clear();
      for (const auto& e : *arr) {
        auto v = e.value_exact<std::int64_t>();
        if (!v) fail(key, "an integer array");
        out.push_back(static_cast<int>(*v));
      }
    } else if constexpr (std::is_same_v<T, std::vector<bool>>) {
      const auto* arr = node->as_array();
      if (!arr) fail(key, "a boolean array");
      out.clear();
      for (const auto& e : *arr) {
        auto v = e.value_exact<bool>();
        if (!v) fail(key, "a boolean array");
        out.push_back(*v);
      }
    }
  }

  void finish() const {
    if (!t_) return;
    for (const auto& [k, v] : *t_) {
      if (!seen_.count(std::string(k.str()))) {
        throw InvalidArgument("config: unknown key '" + std::string(k.str()) + "' in [" + name_ + "]");
      }
    }
  }

 private:
  [[noreturn]] void fail(const std::string& key, const char* what) const {
    throw InvalidArgument("config: [" + name_ + "] " + key + " must be " + what);
  }
  const toml::table* t_;
  std::string name_;
  std::set<std::string> seen_;
};

const toml::table* subtable(const toml::table& root, const char* name) {
  const auto* node = root.get(name);
  if (!node) return nullptr;
  const auto* t = node->as_table();
  if (!t) throw InvalidArgument(std::string("config: ") + name + " must be a table");
  return t;
}

void read_stage(Section& s, StageConfig& c) {
  std::string opt = to_string(c.optimizer);
  s.get("optimizer", opt);
  c.optimizer = parse_optimizer(opt);
  s.get("learning_rate", c.learning_rate);
  s.get("epochs", c.epochs);
  s.get("batch_size", c.batch_size);
  s.get("curriculum", c.curriculum_enabled);
}

}  // namespace

TrainConfig parse_config(const std::string& toml_text, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config: TOML parse error at line " << e.source().begin.line << ": " << e.description();
    throw InvalidArgument(msg.str());
  }
  TrainConfig c;
  static const std::set<std::string> sections = {"data", "model", "diffusion", "curriculum", "stage1", "stage2", "stage3"};
  for (const auto& [k, v] : root) {
    const std::string key(k.str());
    if (key == "scale") continue;
    if (!sections.count(key)) throw InvalidArgument("config: unknown top-level key '" + key + "'");
  }
  if (const auto* node = root.get("scale")) {
    auto v = node->value<double>();
    if (!v) throw InvalidArgument("config: scale must be a number");
    c.scale = *v;
  }

  Section data(subtable(root, "data"), "data");
  std::string manifest;
  data.get("manifest", manifest);
  if (!manifest.empty()) c.data.manifest = fs::path(manifest).is_absolute() ? fs::path(manifest) : base_dir / manifest;
  std::int64_t seed = 0;
  data.get("seed", seed);
  if (seed < 0) throw InvalidArgument("config: data.seed must be >= 0");
  c.data.seed = static_cast<std::uint64_t>(seed);
  data.finish();

  Section model(subtable(root, "model"), "model");
  auto& m = c.model;
  model.get("coarse_resolution", m.coarse_resolution);
  model.get("fine_resolution", m.fine_resolution);
  model.get("truncation", m.truncation);
  model.get("band_width", m.band_width);
  model.get("encoder_tokens", m.encoder.token_count);
  model.get("encoder_layers", m.encoder.layers);
  model.get("encoder_heads", m.encoder.heads);
  model.get("encoder_width", m.encoder.width);
  model.get("encoder_neighbors", m.encoder.neighbors);
  model.get("coarse_channels", m.coarse.channels);
  model.get("coarse_attention", m.coarse.attention);
  model.get("fine_channels", m.fine.channels);
  model.get("fine_attention", m.fine.attention);
  int time_dim = m.coarse.time_dim, tokens = m.coarse.context_tokens, cdim = m.coarse.context_dim;
  int heads = m.coarse.heads, groups = m.coarse.groups;
  model.get("time_dim", time_dim);
  model.get("context_tokens", tokens);
  model.get("context_dim", cdim);
  model.get("attention_heads", heads);
  model.get("groups", groups);
  for (auto* u : {&m.coarse, &m.fine}) {
    u->time_dim = time_dim;
    u->context_tokens = tokens;
    u->context_dim = cdim;
    u->heads = heads;
    u->groups = groups;
  }
  model.finish();

  Section diff(subtable(root, "diffusion"), "diffusion");
  auto& d = c.diffusion;
  diff.get("timesteps", d.timesteps);
  diff.get("beta_start", d.beta_start);
  diff.get("beta_end", d.beta_end);
  diff.get("sampling_steps", d.sampling_steps);
  diff.get("guidance", d.guidance);
  diff.get("cond_dropout", d.cond_dropout);
  diff.get("self_cond_prob", d.self_cond_prob);
  diff.finish();

  Section cur(subtable(root, "curriculum"), "curriculum");
  auto& cc = c.curriculum;
  cur.get("alpha", cc.difficulty.alpha);
  cur.get("beta", cc.difficulty.beta);
  cur.get("inv", cc.difficulty.inv);
  cur.get("p0", cc.pacing.p0);
  cur.get("q", cc.pacing.q);
  cur.get("r0", cc.pacing.r0);
  cur.get("queries", cc.queries);
  cur.get("score_timestep", cc.score_timestep);
  cur.finish();

  Section s1(subtable(root, "stage1"), "stage1");
  std::string copt = to_string(c.stage1_coarse.optimizer), fopt = to_string(c.stage1_fine.optimizer);
  s1.get("coarse_optimizer", copt);
  s1.get("coarse_learning_rate", c.stage1_coarse.learning_rate);
  s1.get("coarse_epochs", c.stage1_coarse.epochs);
  s1.get("fine_optimizer", fopt);
  s1.get("fine_learning_rate", c.stage1_fine.learning_rate);
  s1.get("fine_epochs", c.stage1_fine.epochs);
  s1.get("batch_size", c.stage1_coarse.batch_size);
  c.stage1_coarse.optimizer = parse_optimizer(copt);
  c.stage1_fine.optimizer = parse_optimizer(fopt);
  c.stage1_fine.batch_size = c.stage1_coarse.batch_size;
  s1.finish();

  Section s2(subtable(root, "stage2"), "stage2");
  read_stage(s2, c.stage2);
  s2.finish();

  Section s3(subtable(root, "stage3"), "stage3");
  read_stage(s3, c.stage3);
  s3.get("align_weight", c.stage3_align_weight);
  s3.finish();

  c.validate();
  return c;
}

TrainConfig load_config(const fs::path& path) {
  return parse_config(geometry::read_text(path), path.parent_path());
}

json to_json(const TrainConfig& c) {
  auto stage = [](const StageConfig& s) {
    return json{{"optimizer", to_string(s.optimizer)}, {"learning_rate", s.learning_rate}, {"epochs", s.epochs},
                {"batch_size", s.batch_size}, {"curriculum", s.curriculum_enabled},
                {"frozen", std::vector<std::string>(s.frozen_components.begin(), s.frozen_components.end())}};
  };
  const auto& cc = c.curriculum;
  return {{"data", {{"manifest", c.data.manifest.string()}, {"seed", c.data.seed}}},
          {"model", to_json(c.model)},
          {"diffusion", to_json(c.diffusion)},
          {"curriculum",
           {{"alpha", cc.difficulty.alpha}, {"beta", cc.difficulty.beta}, {"inv", cc.difficulty.inv},
            {"p0", cc.pacing.p0}, {"q", cc.pacing.q}, {"r0", cc.pacing.r0}, {"queries", cc.queries},
            {"score_timestep", cc.score_timestep}}},
          {"stage1", {{"coarse", stage(c.stage1_coarse)}, {"fine", stage(c.stage1_fine)}}},
          {"stage2", stage(c.stage2)},
          {"stage3", stage(c.stage3)},
          {"stage3_align_weight", c.stage3_align_weight},
          {"scale", c.scale}};
}

std::string config_fingerprint(const TrainConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(c).dump())));
  return buf;
}

}  // namespace airloom
