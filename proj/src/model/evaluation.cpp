// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "airloom/common.hpp"
#include "airloom/geometry/mesh.hpp"
#include "airloom/geometry/metrics.hpp"
#include "airloom/geometry/sdf.hpp"
#include "airloom/training.hpp"

namespace airloom {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json EvalReport::to_json() const {
  json per = json::array();
  for (const auto& s : samples) per.push_back({{"id", s.id}, {"iou", s.iou}, {"cd", s.cd}, {"faces", s.faces}});
  return {{"samples", per},       {"mean_iou", mean_iou}, {"mean_cd", mean_cd},
          {"config_fingerprint", config_fingerprint}, {"checkpoint", checkpoint_id},
          {"split", split},       {"seed", seed}};
}

std::string EvalReport::table() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %8s %10s %8s\n", "id", "IoU", "CD", "faces");
  out << line;
  for (const auto& s : samples) {
    std::snprintf(line, sizeof line, "%-16s %8s %10s %8zu\n", s.id.c_str(), num(s.iou).c_str(), num(s.cd, 5).c_str(),
                  s.faces);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-16s %8s %10s\n", "mean", num(mean_iou).c_str(), num(mean_cd, 5).c_str());
  out << line;
  out << "checkpoint " << checkpoint_id << ", split " << split << ", seed " << seed << "\n";
  return out.str();
}

std::string EvalReport::csv() const {
  std::ostringstream out;
  out << "id,iou,cd,faces\n";
  for (const auto& s : samples) out << s.id << "," << full(s.iou) << "," << full(s.cd) << "," << s.faces << "\n";
  out << "mean," << full(mean_iou) << "," << full(mean_cd) << ",\n";
  return out.str();
}

SampleMetrics score_prediction(const std::string& id, const geometry::SDFGrid& pred_sdf,
                               const geometry::TriangleMesh& pred_mesh, const dataset::Sample& truth) {
  SampleMetrics m;
  m.id = id;
  m.faces = pred_mesh.faces.size();
  if (pred_sdf.resolution != truth.sdf.resolution) {
    throw InvalidArgument("score_prediction: predicted grid resolution differs from the ground truth");
  }
  m.iou = geometry::voxel_iou(geometry::occupancy_from_sdf(pred_sdf), geometry::occupancy_from_sdf(truth.sdf));
  const auto gt = geometry::sample_surface(truth.mesh, kChamferSamples, kChamferSeed);
  const auto pred = pred_mesh.empty() ? geometry::PointCloud{{geometry::Vec3::Zero()}}
                                      : geometry::sample_surface(pred_mesh, kChamferSamples, kChamferSeed);
  m.cd = geometry::chamfer_distance(pred, gt);
  return m;
}

EvalReport summarize(std::vector<SampleMetrics> samples) {
  if (samples.empty()) throw InvalidArgument("summarize: no samples");
  EvalReport r;
  double si = 0.0, sc = 0.0;
  for (const auto& s : samples) si += s.iou, sc += s.cd;
  r.mean_iou = si / static_cast<double>(samples.size());
  r.mean_cd = sc / static_cast<double>(samples.size());
  r.samples = std::move(samples);
  return r;
}

EvalReport evaluate(Checkpoint& ckpt, const std::vector<dataset::Sample>& samples, std::uint64_t seed,
                    const EvalOptions& opts) {
  if (ckpt.stage < 2) {
    throw TrainingError("evaluation requires stage 2 or 3 checkpoint (got stage " + std::to_string(ckpt.stage) + ")");
  }
  if (samples.empty()) throw InvalidArgument("evaluate: the split is empty");
  const auto sched = make_schedule(ckpt.diffusion);
  std::vector<SampleMetrics> out;
  for (const auto& s : samples) {
    const auto cond = encode_sketch(ckpt.model, s.sketch, EncodeMode::eval);
    SampleSettings st{derive_seed(seed, fnv1a(s.id)), opts.guidance, opts.steps};
    geometry::SDFGrid sdf;
    geometry::TriangleMesh mesh;
    try {
      auto g = generate(ckpt.model, sched, cond, st);
      sdf = std::move(g.sdf);
      mesh = std::move(g.mesh);
    } catch (const EmptyBandError&) {
      // Nothing generated: an all-outside grid and an empty mesh.
      sdf = geometry::SDFGrid(ckpt.model->config().fine_resolution, ckpt.model->config().truncation,
                              geometry::BBox::unit(), ckpt.model->config().truncation);
    }
    out.push_back(score_prediction(s.id, sdf, mesh, s));
    if (opts.log) opts.log(s.id + " iou " + num(out.back().iou) + " cd " + num(out.back().cd, 5));
  }
  auto r = summarize(std::move(out));
  r.checkpoint_id = ckpt.id();
  r.seed = seed;
  char fp[17];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(fnv1a(ckpt.config_snapshot.dump())));
  r.config_fingerprint = fp;
  return r;
}

EvalReport evaluate(Checkpoint& ckpt, const dataset::Manifest& manifest, dataset::Split split, std::uint64_t seed,
                    const EvalOptions& opts) {
  auto r = evaluate(ckpt, dataset::load_split(manifest, split), seed, opts);
  r.split = dataset::to_string(split);
  return r;
}

double median(std::vector<double> v) {
  if (v.empty()) throw InvalidArgument("median of an empty list");
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const AblationRow& AblationTable::row(const std::string& variant) const {
  for (const auto& r : rows) {
    if (r.variant == variant) return r;
  }
  throw InvalidArgument("ablation table has no variant " + variant);
}

json AblationTable::to_json() const {
  json rs = json::array();
  for (const auto& r : rows) {
    rs.push_back({{"variant", r.variant}, {"config_fingerprint", r.config_fingerprint}, {"iou", r.iou},
                  {"cd", r.cd}, {"median_iou", r.median_iou}, {"median_cd", r.median_cd}});
  }
  return {{"seeds", seeds}, {"rows", rs}};
}

std::string AblationTable::table() const {
  std::ostringstream out;
  char line[200];
  std::snprintf(line, sizeof line, "%-14s %10s %10s   per-seed IoU\n", "variant", "IoU", "CD");
  out << line;
  for (const auto& r : rows) {
    std::string per;
    for (double v : r.iou) per += " " + num(v);
    std::snprintf(line, sizeof line, "%-14s %10s %10s  %s\n", r.variant.c_str(), num(r.median_iou).c_str(),
                  num(r.median_cd, 5).c_str(), per.c_str());
    out << line;
  }
  out << "(medians over " << seeds.size() << " seed" << (seeds.size() == 1 ? "" : "s") << ")\n";
  return out.str();
}

std::string AblationTable::csv() const {
  std::ostringstream out;
  out << "variant,seed,iou,cd\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      out << r.variant << "," << seeds[i] << "," << full(r.iou[i]) << "," << full(r.cd[i]) << "\n";
    }
    out << r.variant << ",median," << full(r.median_iou) << "," << full(r.median_cd) << "\n";
  }
  return out.str();
}

AblationTable ablation_run(const TrainConfig& base, const dataset::Manifest& manifest,
                           const std::vector<std::uint64_t>& seeds, const AblationOptions& opts) {
  if (seeds.empty()) throw InvalidArgument("ablation_run: need at least one seed");
  for (const auto& v : opts.variants) {
    if (std::find(kAblationVariants.begin(), kAblationVariants.end(), v) == kAblationVariants.end()) {
      throw InvalidArgument("ablation_run: unknown variant " + v);
    }
  }
  const auto train = dataset::load_split(manifest, dataset::Split::train);
  const auto test = dataset::load_split(manifest, dataset::Split::test);
  if (train.empty() || test.empty()) throw TrainingError("ablation_run: need non-empty train and test splits");
  auto say = [&](const std::string& s) {
    if (opts.eval.log) opts.eval.log(s);
  };

  AblationTable table;
  table.seeds = seeds;
  for (const auto& v : opts.variants) table.rows.push_back({v, "", {}, {}, 0.0, 0.0});
  auto row = [&](const std::string& v) -> AblationRow& {
    for (auto& r : table.rows) {
      if (r.variant == v) return r;
    }
    throw InvalidArgument(v);
  };
  auto wants = [&](const std::string& v) {
    return std::find(opts.variants.begin(), opts.variants.end(), v) != opts.variants.end();
  };

  for (const auto seed : seeds) {
    TrainConfig cfg = base;
    cfg.data.seed = seed;
    cfg.stage3.curriculum_enabled = true;
    TrainConfig no_cur = cfg;
    no_cur.stage3.curriculum_enabled = false;
    const auto data = prepare_training_data(train, cfg);
    const auto dir = opts.work_dir.empty() ? fs::path() : opts.work_dir / ("seed_" + std::to_string(seed));
    auto train_opts = [&](const std::string& name) {
      TrainOptions t;
      if (!dir.empty()) t.log_dir = dir / name;
      t.log = [&, name](const std::string& s) { say("[seed " + std::to_string(seed) + " " + name + "] " + s); };
      return t;
    };
    auto finish = [&](const std::string& variant, Checkpoint& ck, const TrainConfig& c) {
      if (!dir.empty()) save_checkpoint(ck, dir / variant / "ckpt");
      auto rep = evaluate(ck, test, seed, opts.eval);
      auto& r = row(variant);
      r.config_fingerprint = config_fingerprint(c);
      r.iou.push_back(rep.mean_iou);
      r.cd.push_back(rep.mean_cd);
      say("[seed " + std::to_string(seed) + "] " + variant + " mean IoU " + num(rep.mean_iou) + " CD " +
          num(rep.mean_cd, 5));
    };
    if (wants("no-prior")) {
      auto ck = run_stage3_from_scratch(cfg, data, train_opts("no-prior"));
      finish("no-prior", ck, cfg);
    }
    if (wants("no-curriculum") || wants("full")) {
      auto s1 = run_stage1(cfg, data, train_opts("stage1"));
      auto s2 = run_stage2(cfg, data, s1, train_opts("stage2"));
      if (wants("no-curriculum")) {
        auto ck = run_stage3(no_cur, data, s2, train_opts("no-curriculum"));
        finish("no-curriculum", ck, no_cur);
      }
      if (wants("full")) {
        auto ck = run_stage3(cfg, data, s2, train_opts("full"));
        finish("full", ck, cfg);
      }
    }
  }
  for (auto& r : table.rows) {
    r.median_iou = median(r.iou);
    r.median_cd = median(r.cd);
  }
  return table;
}

}  // namespace airloom
