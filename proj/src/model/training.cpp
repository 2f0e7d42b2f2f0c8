// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "airloom/common.hpp"
#include "airloom/curriculum.hpp"
#include "airloom/geometry/sdf.hpp"

namespace airloom {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<std::string> TrainingData::ids() const {
  std::vector<std::string> out;
  for (const auto& it : items) out.push_back(it.id);
  return out;
}

const TrainItem& TrainingData::at(const std::string& id) const {
  auto it = index.find(id);
  if (it == index.end()) throw InvalidArgument("training data has no sample " + id);
  return items[it->second];
}

TrainingData prepare_training_data(const std::vector<dataset::Sample>& samples, const TrainConfig& cfg) {
  cfg.validate();
  const auto& mc = cfg.model;
  const int R = mc.fine_resolution, r = mc.coarse_resolution;
  TrainingData data;
  for (const auto& s : samples) {
    s.validate();
    if (s.sdf.resolution != R || s.coarse.resolution != r) {
      throw InvalidArgument("sample " + s.id + ": grids are " + std::to_string(s.sdf.resolution) + "/" +
                            std::to_string(s.coarse.resolution) + ", model expects " + std::to_string(R) + "/" +
                            std::to_string(r));
    }
    if (s.sdf.truncation != mc.truncation) {
      throw InvalidArgument("sample " + s.id + ": truncation differs from the model config");
    }
    TrainItem it;
    it.id = s.id;
    it.pc_tokens = tokenize(dataset::conditioning_cloud(s, cfg.data.seed).points, mc.encoder);
    it.sketch_tokens = tokenize(s.sketch.points, mc.encoder);
    it.coarse_z0 = occupancy_field(s.coarse).unsqueeze(0);
    const auto band = build_band(s.coarse, R, mc.band_width);
    if (band.count() == 0) throw InvalidArgument("sample " + s.id + ": empty active band");
    it.coarse_up = occupancy_field(geometry::upsample_occupancy(s.coarse, R / r)).unsqueeze(0);
    it.band = mask_tensor(band).unsqueeze(0);
    it.fine_z0 = torch::where(it.band > 0, sdf_field(s.sdf).unsqueeze(0), -it.coarse_up);

    std::vector<std::int64_t> candidates, fallback;
    for (std::size_t i = 0; i < band.size(); ++i) {
      if (!band.bits[i]) continue;
      fallback.push_back(static_cast<std::int64_t>(i));
      if (std::abs(s.sdf.values[i]) < s.sdf.truncation) candidates.push_back(static_cast<std::int64_t>(i));
    }
    const auto& pool = candidates.empty() ? fallback : candidates;
    Rng rng(derive_seed(cfg.data.seed, fnv1a(s.id) ^ 0x7175657279ULL));
    for (int q = 0; q < cfg.curriculum.queries; ++q) {
      const auto idx = pool[rng.index(pool.size())];
      it.query_index.push_back(idx);
      it.query_sdf.push_back(s.sdf.values[static_cast<std::size_t>(idx)]);
    }
    if (data.index.count(it.id)) throw InvalidArgument("duplicate training sample " + it.id);
    data.index[it.id] = data.items.size();
    data.items.push_back(std::move(it));
  }
  return data;
}

TrainingData load_training_data(const dataset::Manifest& manifest, dataset::Split split, const TrainConfig& cfg) {
  auto samples = dataset::load_split(manifest, split);
  if (samples.empty()) throw TrainingError("the " + dataset::to_string(split) + " split is empty");
  return prepare_training_data(samples, cfg);
}

StageBatch make_stage_batch(const TrainingData& data, const std::vector<std::string>& ids, Stage stage,
                            const torch::Tensor& cond) {
  if (ids.empty()) throw InvalidArgument("make_stage_batch: empty batch");
  std::vector<torch::Tensor> z0, coarse, mask;
  for (const auto& id : ids) {
    const auto& it = data.at(id);
    if (stage == Stage::coarse) {
      z0.push_back(it.coarse_z0);
    } else {
      z0.push_back(it.fine_z0);
      coarse.push_back(it.coarse_up);
      mask.push_back(it.band);
    }
  }
  StageBatch b;
  b.z0 = torch::stack(z0);
  b.cond = cond;
  if (stage == Stage::fine) {
    b.coarse = torch::stack(coarse);
    b.mask = torch::stack(mask);
  }
  return b;
}

std::vector<std::vector<std::string>> plain_batches(const std::vector<std::string>& ids, std::uint64_t seed, int stage,
                                                    int epoch, int batch_size) {
  if (batch_size < 1) throw InvalidArgument("batch_size must be positive");
  auto order = ids;
  Rng rng(derive_seed(derive_seed(seed, 0x6f72646572ULL + static_cast<std::uint64_t>(stage)),
                      static_cast<std::uint64_t>(epoch)));
  rng.shuffle(order.begin(), order.end());
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(batch_size)) {
    const auto end = std::min(order.size(), i + static_cast<std::size_t>(batch_size));
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i), order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

namespace {

std::vector<PointTokens> tokens_of(const TrainingData& data, const std::vector<std::string>& ids, bool sketch) {
  std::vector<PointTokens> out;
  for (const auto& id : ids) out.push_back(sketch ? data.at(id).sketch_tokens : data.at(id).pc_tokens);
  return out;
}

torch::Tensor conditions(PointEncoder& enc, const TrainingData& data, const std::vector<std::string>& ids,
                         bool sketch) {
  torch::NoGradGuard ng;
  std::vector<torch::Tensor> parts;
  for (std::size_t i = 0; i < ids.size(); i += 8) {
    std::vector<std::string> chunk(ids.begin() + static_cast<std::ptrdiff_t>(i),
                                   ids.begin() + static_cast<std::ptrdiff_t>(std::min(ids.size(), i + 8)));
    parts.push_back(enc->forward(tokens_of(data, chunk, sketch)));
  }
  return torch::cat(parts, 0);
}

std::unique_ptr<torch::optim::Optimizer> make_optimizer(Optimizer kind, std::vector<torch::Tensor> params, double lr) {
  if (kind == Optimizer::adamw) {
    return std::make_unique<torch::optim::AdamW>(std::move(params), torch::optim::AdamWOptions(lr));
  }
  return std::make_unique<torch::optim::Adam>(std::move(params), torch::optim::AdamOptions(lr));
}

std::vector<torch::Tensor> concat(std::initializer_list<std::vector<torch::Tensor>> groups) {
  std::vector<torch::Tensor> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

/// Append-only JSONL writer; inactive when the directory is empty.
class TraceWriter {
 public:
  TraceWriter(const fs::path& dir, const std::string& name) {
    if (dir.empty()) return;
    fs::create_directories(dir);
    out_.open(dir / name, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot open trace " + (dir / name).string());
  }
  void write(const json& j) {
    if (out_.is_open()) out_ << j.dump() << "\n" << std::flush;
  }

 private:
  std::ofstream out_;
};

void say(const TrainOptions& opts, const std::string& msg) {
  if (opts.log) opts.log(msg);
}

void check_finite(double v, int stage, int epoch, const char* what) {
  if (!std::isfinite(v)) {
    throw TrainingError("stage " + std::to_string(stage) + " epoch " + std::to_string(epoch) + ": " + what +
                        " loss is not finite; aborting");
  }
}

void check_model_matches(const TrainConfig& cfg, const Checkpoint& c) {
  if (to_json(cfg.model) != to_json(c.model->config())) {
    throw TrainingError("the [model] section differs from the checkpoint's model config");
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

/// Batch order for one stage: the adaptive curriculum or a plain shuffle.
class BatchPlanner {
 public:
  BatchPlanner(const TrainConfig& cfg, const StageConfig& stage, std::vector<std::string> ids,
               const std::map<std::string, double>& initial_scores)
      : cfg_(cfg), stage_(stage), ids_(std::move(ids)) {
    if (stage_.curriculum_enabled) {
      state_ = curriculum::make_state(ids_, initial_scores, static_cast<std::size_t>(stage_.batch_size));
    }
  }

  bool curriculum() const { return stage_.curriculum_enabled; }

  std::vector<std::vector<std::string>> epoch(int e, std::size_t& visible) const {
    if (!curriculum()) {
      visible = ids_.size();
      return plain_batches(ids_, cfg_.data.seed, stage_.stage, e, stage_.batch_size);
    }
    visible = curriculum::pacing(static_cast<std::size_t>(e), state_.pool.size(), cfg_.curriculum.pacing);
    return curriculum::curriculum_batches(state_, static_cast<std::size_t>(e),
                                          static_cast<std::size_t>(stage_.batch_size), cfg_.curriculum.pacing);
  }

  void update(const std::map<std::string, double>& scores, std::size_t batch_index) {
    state_ = curriculum::refresh_scores(state_, scores, cfg_.curriculum.difficulty, batch_index);
  }

  const curriculum::CurriculumState& state() const { return state_; }

 private:
  const TrainConfig& cfg_;
  StageConfig stage_;
  std::vector<std::string> ids_;
  curriculum::CurriculumState state_;
};

json scores_json(const std::map<std::string, double>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

std::map<std::string, double> all_scores(GarmentModel& model, const TrainingData& data, const NoiseSchedule& sched,
                                         const TrainConfig& cfg) {
  const auto ids = data.ids();
  return curriculum_scores(model, data, ids, sketch_conditions(model, data, ids), sched, cfg);
}

/// Stage 3 body shared by the gated entry point and the no-prior variant.
Checkpoint joint_finetune(const TrainConfig& cfg, const TrainingData& data, Checkpoint ckpt, double align_weight,
                          const TrainOptions& opts) {
  auto& model = ckpt.model;
  const auto sched = make_schedule(cfg.diffusion);
  const auto ids = data.ids();
  const auto& sc = cfg.stage3;
  torch::Tensor targets;
  if (align_weight > 0.0) targets = pointcloud_conditions(model, data, ids);

  auto opt = make_optimizer(sc.optimizer,
                            concat({group_parameters(model, kSketchGroup), group_parameters(model, kCoarseGroup),
                                    group_parameters(model, kFineGroup), group_parameters(model, kNullGroup)}),
                            sc.learning_rate);
  std::map<std::string, double> initial;
  if (sc.curriculum_enabled) initial = all_scores(model, data, sched, cfg);
  BatchPlanner planner(cfg, sc, ids, initial);
  TraceWriter loss_trace(opts.log_dir, "loss_stage3.jsonl");
  TraceWriter cur_trace(opts.log_dir, "curriculum_stage3.jsonl");
  if (sc.curriculum_enabled) cur_trace.write({{"stage", 3}, {"initial_scores", scores_json(initial)}});
  Rng rng(derive_seed(cfg.data.seed, 0x5173));
  const int epochs = cfg.scaled_epochs(sc);
  std::size_t batch_index = 0;
  for (int e = 0; e < epochs; ++e) {
    std::size_t visible = 0;
    const auto batches = planner.epoch(e, visible);
    double sum_c = 0, sum_f = 0, sum_a = 0;
    for (const auto& b : batches) {
      opt->zero_grad();
      auto cond = model->sketch_encoder->forward(tokens_of(data, b, true));
      auto cb = make_stage_batch(data, b, Stage::coarse, cond);
      auto fb = make_stage_batch(data, b, Stage::fine, cond);
      auto lc = stage_loss(model, Stage::coarse, cb, draw_step_noise(cb, sched, cfg.diffusion, rng), sched);
      auto lf = stage_loss(model, Stage::fine, fb, draw_step_noise(fb, sched, cfg.diffusion, rng), sched);
      torch::Tensor la = torch::zeros({});
      if (align_weight > 0.0) {
        std::vector<torch::Tensor> rows;
        for (const auto& id : b) rows.push_back(targets[static_cast<long>(data.index.at(id))]);
        la = torch::mse_loss(cond, torch::stack(rows));
      }
      auto loss = lc + lf + la * align_weight;
      loss.backward();
      opt->step();
      sum_c += lc.item<double>() * b.size();
      sum_f += lf.item<double>() * b.size();
      sum_a += la.item<double>() * b.size();
      json line = {{"stage", 3}, {"epoch", e}, {"batch_index", batch_index}, {"pacing", visible}, {"ids", b}};
      if (planner.curriculum()) {
        const auto scores = curriculum_scores(model, data, b, cond.detach(), sched, cfg);
        const auto before = planner.state().last_k;
        planner.update(scores, batch_index);
        line["scores"] = scores_json(scores);
        line["applied"] = planner.state().last_k != before;
      }
      cur_trace.write(line);
      ++batch_index;
    }
    std::size_t seen = 0;
    for (const auto& b : batches) seen += b.size();
    const double mc = sum_c / seen, mf = sum_f / seen, ma = sum_a / seen;
    check_finite(mc, 3, e, "coarse");
    check_finite(mf, 3, e, "fine");
    check_finite(ma, 3, e, "alignment");
    loss_trace.write({{"stage", 3}, {"epoch", e}, {"coarse_loss", mc}, {"fine_loss", mf}, {"align_loss", ma},
                      {"samples", seen}});
    say(opts, "stage 3 epoch " + std::to_string(e + 1) + "/" + std::to_string(epochs) + " coarse " + fmt(mc) +
                  " fine " + fmt(mf) + " align " + fmt(ma) + " samples " + std::to_string(seen));
  }
  ckpt.stage = 3;
  ckpt.config_snapshot = to_json(cfg);
  return ckpt;
}

}  // namespace

torch::Tensor pointcloud_conditions(GarmentModel& model, const TrainingData& data, const std::vector<std::string>& ids) {
  return conditions(model->pc_encoder, data, ids, false);
}

torch::Tensor sketch_conditions(GarmentModel& model, const TrainingData& data, const std::vector<std::string>& ids) {
  return conditions(model->sketch_encoder, data, ids, true);
}

Checkpoint make_initial_checkpoint(const TrainConfig& cfg) {
  cfg.validate();
  Checkpoint c;
  c.stage = 0;
  c.model = GarmentModel(cfg.model, cfg.data.seed);
  c.diffusion = cfg.diffusion;
  c.data_seed = cfg.data.seed;
  c.config_snapshot = to_json(cfg);
  return c;
}

Checkpoint run_stage1(const TrainConfig& cfg, const TrainingData& data, const TrainOptions& opts) {
  if (data.items.empty()) throw TrainingError("stage 1: the train split is empty");
  auto ckpt = make_initial_checkpoint(cfg);
  auto& model = ckpt.model;
  const auto sched = make_schedule(cfg.diffusion);
  const auto ids = data.ids();
  auto opt_c = make_optimizer(cfg.stage1_coarse.optimizer, group_parameters(model, kCoarseGroup),
                              cfg.stage1_coarse.learning_rate);
  auto opt_f = make_optimizer(cfg.stage1_fine.optimizer, group_parameters(model, kFineGroup),
                              cfg.stage1_fine.learning_rate);
  auto opt_e = make_optimizer(cfg.stage1_coarse.optimizer,
                              concat({group_parameters(model, kPointCloudGroup), group_parameters(model, kNullGroup)}),
                              cfg.stage1_coarse.learning_rate);
  const int ec = cfg.scaled_epochs(cfg.stage1_coarse), ef = cfg.scaled_epochs(cfg.stage1_fine);
  const int epochs = std::max(ec, ef);
  TraceWriter trace(opts.log_dir, "loss_stage1.jsonl");
  Rng rng(derive_seed(cfg.data.seed, 0x5171));
  for (int e = 0; e < epochs; ++e) {
    const bool do_c = e < ec, do_f = e < ef;
    // The encoder stops with the first denoiser to finish, so neither sees embeddings it never trained on.
    const bool do_e = do_c && do_f;
    double sum_c = 0, sum_f = 0;
    for (const auto& b : plain_batches(ids, cfg.data.seed, 1, e, cfg.stage1_coarse.batch_size)) {
      opt_c->zero_grad();
      opt_f->zero_grad();
      opt_e->zero_grad();
      torch::Tensor cond;
      if (do_e) {
        cond = model->pc_encoder->forward(tokens_of(data, b, false));
      } else {
        torch::NoGradGuard ng;
        cond = model->pc_encoder->forward(tokens_of(data, b, false));
      }
      torch::Tensor loss = torch::zeros({});
      if (do_c) {
        auto cb = make_stage_batch(data, b, Stage::coarse, cond);
        auto lc = stage_loss(model, Stage::coarse, cb, draw_step_noise(cb, sched, cfg.diffusion, rng), sched);
        sum_c += lc.item<double>() * b.size();
        loss = loss + lc;
      }
      if (do_f) {
        auto fb = make_stage_batch(data, b, Stage::fine, cond);
        auto lf = stage_loss(model, Stage::fine, fb, draw_step_noise(fb, sched, cfg.diffusion, rng), sched);
        sum_f += lf.item<double>() * b.size();
        loss = loss + lf;
      }
      loss.backward();
      if (do_c) opt_c->step();
      if (do_f) opt_f->step();
      if (do_e) opt_e->step();
    }
    json line = {{"stage", 1}, {"epoch", e}};
    std::string msg = "stage 1 epoch " + std::to_string(e + 1) + "/" + std::to_string(epochs);
    if (do_c) {
      const double m = sum_c / ids.size();
      check_finite(m, 1, e, "coarse");
      line["coarse_loss"] = m;
      msg += " coarse " + fmt(m);
    }
    if (do_f) {
      const double m = sum_f / ids.size();
      check_finite(m, 1, e, "fine");
      line["fine_loss"] = m;
      msg += " fine " + fmt(m);
    }
    trace.write(line);
    say(opts, msg);
  }
  ckpt.stage = 1;
  return ckpt;
}

Checkpoint run_stage2(const TrainConfig& cfg, const TrainingData& data, const Checkpoint& stage1,
                      const TrainOptions& opts) {
  if (stage1.stage != 1) {
    throw TrainingError("stage 2 requires stage 1 checkpoint (got stage " + std::to_string(stage1.stage) + ")");
  }
  if (data.items.empty()) throw TrainingError("stage 2: the train split is empty");
  check_model_matches(cfg, stage1);
  auto ckpt = clone_checkpoint(stage1);
  auto& model = ckpt.model;
  init_sketch_from_pointcloud(model);
  const auto sched = make_schedule(cfg.diffusion);
  const auto ids = data.ids();
  const auto targets = pointcloud_conditions(model, data, ids);
  const auto& sc = cfg.stage2;
  auto opt = make_optimizer(sc.optimizer, group_parameters(model, kSketchGroup), sc.learning_rate);
  std::map<std::string, double> initial;
  if (sc.curriculum_enabled) initial = all_scores(model, data, sched, cfg);
  BatchPlanner planner(cfg, sc, ids, initial);
  TraceWriter trace(opts.log_dir, "loss_stage2.jsonl");
  TraceWriter cur_trace(opts.log_dir, "curriculum_stage2.jsonl");
  const int epochs = cfg.scaled_epochs(sc);
  std::size_t batch_index = 0;
  for (int e = 0; e < epochs; ++e) {
    std::size_t visible = 0, seen = 0;
    double sum = 0;
    for (const auto& b : planner.epoch(e, visible)) {
      opt->zero_grad();
      auto cond = model->sketch_encoder->forward(tokens_of(data, b, true));
      std::vector<torch::Tensor> rows;
      for (const auto& id : b) rows.push_back(targets[static_cast<long>(data.index.at(id))]);
      auto loss = torch::mse_loss(cond, torch::stack(rows));
      loss.backward();
      opt->step();
      sum += loss.item<double>() * b.size();
      seen += b.size();
      json line = {{"stage", 2}, {"epoch", e}, {"batch_index", batch_index}, {"pacing", visible}, {"ids", b}};
      if (planner.curriculum()) {
        const auto scores = curriculum_scores(model, data, b, cond.detach(), sched, cfg);
        planner.update(scores, batch_index);
        line["scores"] = scores_json(scores);
      }
      cur_trace.write(line);
      ++batch_index;
    }
    const double m = sum / seen;
    check_finite(m, 2, e, "embedding");
    trace.write({{"stage", 2}, {"epoch", e}, {"embedding_loss", m}});
    say(opts, "stage 2 epoch " + std::to_string(e + 1) + "/" + std::to_string(epochs) + " embedding " + fmt(m));
  }
  ckpt.stage = 2;
  ckpt.config_snapshot = to_json(cfg);
  return ckpt;
}

Checkpoint run_stage3(const TrainConfig& cfg, const TrainingData& data, const Checkpoint& stage2,
                      const TrainOptions& opts) {
  if (stage2.stage != 2) {
    throw TrainingError("stage 3 requires stage 2 checkpoint (got stage " + std::to_string(stage2.stage) + ")");
  }
  if (data.items.empty()) throw TrainingError("stage 3: the train split is empty");
  check_model_matches(cfg, stage2);
  return joint_finetune(cfg, data, clone_checkpoint(stage2), cfg.stage3_align_weight, opts);
}

Checkpoint run_stage3_from_scratch(const TrainConfig& cfg, const TrainingData& data, const TrainOptions& opts) {
  if (data.items.empty()) throw TrainingError("stage 3: the train split is empty");
  return joint_finetune(cfg, data, make_initial_checkpoint(cfg), 0.0, opts);
}

double fixed_batch_loss(GarmentModel& model, const TrainingData& data, const NoiseSchedule& sched, Stage stage,
                        std::uint64_t seed) {
  if (data.items.empty()) throw InvalidArgument("fixed_batch_loss: no samples");
  constexpr int kRepeats = 4;
  torch::NoGradGuard ng;
  Rng rng(seed);
  const auto ids = data.ids();
  const auto n = ids.size();
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; i += 8) {
    std::vector<std::string> chunk(ids.begin() + static_cast<std::ptrdiff_t>(i),
                                   ids.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + 8)));
    const auto batch = make_stage_batch(data, chunk, stage, pointcloud_conditions(model, data, chunk));
    const auto b = static_cast<long>(chunk.size());
    for (int r = 0; r < kRepeats; ++r) {
      StepNoise noise;
      noise.t = torch::empty({b}, torch::kLong);
      for (long j = 0; j < b; ++j) {
        const auto k = static_cast<long long>((i + static_cast<std::size_t>(j)) * kRepeats + r);
        noise.t[j] = static_cast<int64_t>(1 + k * (sched.T - 1) / std::max<long long>(1, n * kRepeats - 1));
      }
      noise.eps = normal_tensor(batch.z0.sizes(), rng);
      noise.drop = torch::zeros({b}, torch::kBool);
      noise.self_cond = torch::zeros({b}, torch::kBool);
      total += stage_loss(model, stage, batch, noise, sched).item<double>() * static_cast<double>(b);
      count += chunk.size();
    }
  }
  return total / static_cast<double>(count);
}

std::map<std::string, double> curriculum_scores(GarmentModel& model, const TrainingData& data,
                                                const std::vector<std::string>& ids, const torch::Tensor& cond,
                                                const NoiseSchedule& sched, const TrainConfig& cfg) {
  if (cond.size(0) != static_cast<long>(ids.size())) throw InvalidArgument("curriculum_scores: one condition per id");
  std::map<std::string, double> out;
  const float trunc = cfg.model.truncation;
  for (std::size_t i = 0; i < ids.size(); i += 8) {
    const auto end = std::min(ids.size(), i + 8);
    std::vector<std::string> chunk(ids.begin() + static_cast<std::ptrdiff_t>(i),
                                   ids.begin() + static_cast<std::ptrdiff_t>(end));
    const auto batch = make_stage_batch(data, chunk, Stage::fine, cond.slice(0, static_cast<long>(i), static_cast<long>(end)).detach());
    std::vector<torch::Tensor> eps;
    for (const auto& id : chunk) {
      Rng rng(derive_seed(cfg.data.seed, fnv1a(id) ^ 0x73636f7265ULL));
      eps.push_back(normal_tensor(data.at(id).fine_z0.sizes(), rng));
    }
    const auto x0 = predict_clean(model, Stage::fine, batch, cfg.curriculum.score_timestep, torch::stack(eps), sched)
                        .contiguous();
    for (std::size_t j = 0; j < chunk.size(); ++j) {
      const auto& it = data.at(chunk[j]);
      const float* p = x0[static_cast<long>(j)].data_ptr<float>();
      std::vector<curriculum::SdfQuery> qs;
      qs.reserve(it.query_index.size());
      for (std::size_t q = 0; q < it.query_index.size(); ++q) {
        curriculum::SdfQuery sq;
        sq.y = it.query_sdf[q];
        sq.y_pred = static_cast<double>(p[it.query_index[q]]) * trunc;
        qs.push_back(sq);
      }
      out[chunk[j]] = curriculum::sample_difficulty(qs, cfg.curriculum.difficulty.alpha);
    }
  }
  return out;
}

}  // namespace airloom
