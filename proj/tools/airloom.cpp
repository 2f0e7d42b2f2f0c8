// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

// airloom: data generation, staged training, sampling, evaluation, mesh
// export and serving. Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "airloom/checkpoint.hpp"
#include "airloom/config.hpp"
#include "airloom/dataset.hpp"
#include "airloom/evaluation.hpp"
#include "airloom/geometry/io.hpp"
#include "airloom/geometry/sdf.hpp"
#include "airloom/service.hpp"
#include "airloom/synthdata.hpp"
#include "airloom/training.hpp"

namespace fs = std::filesystem;
using namespace airloom;

namespace {

constexpr int kUsage = 1;
constexpr int kRuntime = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void log_line(const std::string& s) { std::cerr << s << std::endl; }

struct ConfigFlags {
  std::string config;
  std::string manifest;
  std::optional<std::uint64_t> seed;
  std::optional<double> scale;

  void add(CLI::App* app, bool with_seed = true) {
    app->add_option("--config", config, "TOML config (falls back to $AIRLOOM_CONFIG, then built-in defaults)");
    app->add_option("--manifest", manifest, "manifest.jsonl; overrides [data].manifest");
    if (with_seed) app->add_option("--seed", seed, "data/training seed; overrides [data].seed");
    app->add_option("--scale", scale, "epoch multiplier; overrides the config's scale");
  }

  TrainConfig load() const {
    std::string path = config;
    if (path.empty()) {
      if (const char* env = std::getenv("AIRLOOM_CONFIG"); env && *env) path = env;
    }
    TrainConfig cfg = path.empty() ? TrainConfig{} : load_config(path);
    if (!manifest.empty()) cfg.data.manifest = manifest;
    if (seed) cfg.data.seed = *seed;
    if (scale) cfg.scale = *scale;
    cfg.validate();
    return cfg;
  }
};

dataset::Manifest manifest_of(const TrainConfig& cfg) {
  if (cfg.data.manifest.empty()) throw UsageError("no manifest: pass --manifest or set [data].manifest");
  return dataset::read_manifest(cfg.data.manifest);
}

geometry::SketchCloud read_sketch(const fs::path& path, std::uint64_t seed) {
  auto sk = dataset::sketch_from_json(geometry::read_text(path));
  try {
    sk.validate();
    return sk;
  } catch (const InvalidArgument&) {
    // Free-form input (any point count or extent) goes through the service's normalization.
    if (sk.points.size() < kMinRequestPoints) {
      throw InvalidArgument(path.string() + ": points: need at least " + std::to_string(kMinRequestPoints));
    }
    auto out = request_sketch(sk.points, derive_seed(seed, fnv1a("request-points")));
    out.strokes = std::move(sk.strokes);
    return out;
  }
}

// ---- subcommands ----------------------------------------------------------

struct GenSynth {
  std::string out;
  std::size_t count = 20;
  std::uint64_t seed = 0;
  synth::GenerateOptions opts;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("gen-synth", "Generate a synthetic garment corpus");
    c->add_option("--out", out, "output directory")->required();
    c->add_option("--count", count, "number of samples (>= 5)")->check(CLI::Range(5, 1000000));
    c->add_option("--seed", seed, "corpus seed");
    c->add_option("--resolution", opts.resolution, "fine SDF resolution");
    c->add_option("--coarse-resolution", opts.coarse_resolution, "coarse occupancy resolution");
    c->add_option("--truncation", opts.truncation, "SDF truncation distance");
    c->callback([this] { run(); });
  }

  void run() {
    opts.progress = [](std::size_t done, std::size_t total) {
      if (done == total || done % 50 == 0) log_line("gen-synth " + std::to_string(done) + "/" + std::to_string(total));
    };
    const auto m = synth::generate_dataset(count, seed, out, opts);
    std::cout << "wrote " << m.records.size() << " samples (" << m.count(dataset::Split::train) << " train, "
              << m.count(dataset::Split::test) << " test) to " << out << "\n";
  }
};

struct Train {
  int stage = 1;
  ConfigFlags cf;
  std::string ckpt, out, log_dir;
  bool from_scratch = false;
  bool no_curriculum = false;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("train", "Run one training stage");
    c->add_option("--stage", stage, "1, 2 or 3")->required()->check(CLI::Range(1, 3));
    cf.add(c);
    c->add_option("--ckpt", ckpt, "input checkpoint (stage 2 needs stage 1, stage 3 needs stage 2)");
    c->add_option("--out", out, "output checkpoint directory")->required();
    c->add_option("--log-dir", log_dir, "loss and curriculum traces (default: <out>/logs)");
    c->add_flag("--from-scratch", from_scratch, "stage 3 only: skip pre-training");
    c->add_flag("--no-curriculum", no_curriculum, "stage 3 only: plain shuffled batches");
    c->callback([this] { run(); });
  }

  void run() {
    auto cfg = cf.load();
    if (no_curriculum) cfg.stage3.curriculum_enabled = false;
    if (from_scratch && stage != 3) throw UsageError("--from-scratch applies to --stage 3 only");
    std::optional<Checkpoint> input;
    if (stage > 1 && !from_scratch) {
      if (ckpt.empty()) {
        throw TrainingError("stage " + std::to_string(stage) + " requires stage " + std::to_string(stage - 1) +
                            " checkpoint (pass --ckpt)");
      }
      input = load_checkpoint(ckpt);
    }
    const auto data = load_training_data(manifest_of(cfg), dataset::Split::train, cfg);
    TrainOptions opts;
    opts.log_dir = log_dir.empty() ? fs::path(out) / "logs" : fs::path(log_dir);
    opts.log = log_line;
    Checkpoint result;
    if (stage == 1) {
      result = run_stage1(cfg, data, opts);
    } else if (stage == 2) {
      result = run_stage2(cfg, data, *input, opts);
    } else if (from_scratch) {
      result = run_stage3_from_scratch(cfg, data, opts);
    } else {
      result = run_stage3(cfg, data, *input, opts);
    }
    save_checkpoint(result, out);
    std::cout << "stage " << result.stage << " checkpoint " << result.id() << " -> " << out << "\n";
  }
};

struct Sample {
  std::string sketch, ckpt, out, sdf_out, embedding_out;
  std::uint64_t seed = 0;
  std::optional<double> guidance;
  std::optional<int> steps;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("sample", "Generate a garment mesh from a sketch");
    c->add_option("--sketch", sketch, "sketch.json")->required()->check(CLI::ExistingFile);
    c->add_option("--ckpt", ckpt, "stage 2 or 3 checkpoint")->required();
    c->add_option("--out", out, "output OBJ")->required();
    c->add_option("--seed", seed, "sampling seed");
    c->add_option("--guidance", guidance, "classifier-free guidance weight (>= 0)")->check(CLI::NonNegativeNumber);
    c->add_option("--steps", steps, "sampling steps")->check(CLI::PositiveNumber);
    c->add_option("--sdf-out", sdf_out, "also write the fine SDF grid (raw float32 plus <path>.json)");
    c->add_option("--embedding-out", embedding_out, "also write the sketch embedding (raw float32[1024])");
    c->callback([this] { run(); });
  }

  void run() {
    auto ck = load_checkpoint(ckpt);
    if (ck.stage < 2) {
      throw TrainingError("sampling from sketches requires stage 2 or 3 checkpoint (got stage " +
                          std::to_string(ck.stage) + ")");
    }
    const auto sk = read_sketch(sketch, seed);
    const auto cond = encode_sketch(ck.model, sk, EncodeMode::eval);
    if (!embedding_out.empty()) export_embedding(cond, embedding_out);
    const SampleSettings st{seed, guidance.value_or(ck.diffusion.guidance), steps.value_or(ck.diffusion.sampling_steps)};
    const auto g = generate(ck.model, make_schedule(ck.diffusion), cond, st);
    geometry::write_obj(out, g.mesh);
    if (!sdf_out.empty()) {
      geometry::write_f32(sdf_out, g.sdf.values);
      const nlohmann::json meta{{"resolution", g.sdf.resolution},
                                {"truncation", g.sdf.truncation},
                                {"bbox",
                                 {{"min", {g.sdf.bbox.min.x(), g.sdf.bbox.min.y(), g.sdf.bbox.min.z()}},
                                  {"max", {g.sdf.bbox.max.x(), g.sdf.bbox.max.y(), g.sdf.bbox.max.z()}}}}};
      geometry::write_text(sdf_out + ".json", meta.dump(2) + "\n");
    }
    std::cout << out << ": " << g.mesh.vertices.size() << " vertices, " << g.mesh.faces.size() << " faces\n";
  }
};

struct Eval {
  std::string ckpt, split = "test", report, work_dir;
  ConfigFlags cf;
  std::uint64_t seed = 0;
  bool csv = false, json = false, ablation = false;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<std::string> variants = kAblationVariants;
  std::optional<double> guidance;
  std::optional<int> steps;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("eval", "Evaluate a checkpoint, or run the ablation comparison");
    c->add_option("--ckpt", ckpt, "checkpoint to evaluate");
    cf.add(c, false);
    c->add_option("--split", split, "train or test")->check(CLI::IsMember({"train", "test"}));
    c->add_option("--seed", seed, "evaluation seed");
    c->add_option("--guidance", guidance, "guidance weight")->check(CLI::NonNegativeNumber);
    c->add_option("--steps", steps, "sampling steps")->check(CLI::PositiveNumber);
    c->add_flag("--csv", csv, "print CSV instead of a table");
    c->add_flag("--json", json, "print JSON instead of a table");
    c->add_option("--report", report, "also write the JSON report to this path");
    c->add_flag("--ablation", ablation, "train and compare no-prior / no-curriculum / full");
    c->add_option("--seeds", seeds, "ablation seeds")->delimiter(',');
    c->add_option("--variants", variants, "ablation variants")->delimiter(',');
    c->add_option("--work-dir", work_dir, "ablation checkpoints and traces");
    c->callback([this] { run(); });
  }

  template <typename R>
  void emit(const R& r) const {
    if (!report.empty()) geometry::write_text(report, r.to_json().dump(2) + "\n");
    if (json) {
      std::cout << r.to_json().dump(2) << "\n";
    } else if (csv) {
      std::cout << r.csv();
    } else {
      std::cout << r.table();
    }
  }

  void run() {
    if (csv && json) throw UsageError("--csv and --json are exclusive");
    EvalOptions eo;
    eo.log = log_line;
    if (ablation) {
      if (!ckpt.empty()) throw UsageError("--ablation trains its own checkpoints; drop --ckpt");
      const auto cfg = cf.load();
      if (guidance) eo.guidance = *guidance;
      else eo.guidance = cfg.diffusion.guidance;
      eo.steps = steps.value_or(cfg.diffusion.sampling_steps);
      AblationOptions ao{variants, work_dir, eo};
      emit(ablation_run(cfg, manifest_of(cfg), seeds, ao));
      return;
    }
    if (ckpt.empty()) throw UsageError("--ckpt is required (or pass --ablation)");
    auto ck = load_checkpoint(ckpt);
    eo.guidance = guidance.value_or(ck.diffusion.guidance);
    eo.steps = steps.value_or(ck.diffusion.sampling_steps);
    TrainConfig cfg;
    if (!cf.config.empty() || std::getenv("AIRLOOM_CONFIG") || !cf.manifest.empty()) cfg = cf.load();
    emit(evaluate(ck, manifest_of(cfg), dataset::parse_split(split), seed, eo));
  }
};

struct Serve {
  std::string ckpt, host = "0.0.0.0";
  int port = 8080;
  ServiceOptions opts;
  double timeout_s = 120.0;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("serve", "Serve POST /v1/generate and GET /health");
    c->add_option("--ckpt", ckpt, "stage 2 or 3 checkpoint")->required();
    c->add_option("--port", port, "listen port")->check(CLI::Range(1, 65535));
    c->add_option("--host", host, "listen address");
    c->add_option("--workers", opts.workers, "sampling workers")->check(CLI::PositiveNumber);
    c->add_option("--timeout", timeout_s, "per-request timeout in seconds")->check(CLI::PositiveNumber);
    c->callback([this] { run(); });
  }

  void run() {
    opts.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(timeout_s * 1000.0));
    GenerationService svc(opts);
    // Load in the background so /health answers 503 until the model is ready.
    std::thread loader([&] {
      try {
        svc.set_checkpoint(load_checkpoint(ckpt));
        log_line("serve: loaded " + ckpt);
      } catch (const std::exception& e) {
        log_line(std::string("serve: cannot load checkpoint: ") + e.what());
        std::_Exit(kRuntime);
      }
    });
    svc.listen(host, port, [&](int p) { log_line("serve: listening on " + host + ":" + std::to_string(p)); });
    loader.join();
  }
};

struct ExportMesh {
  std::string sample_dir, sdf, meta, out;
  float iso = 0.0f;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("export-mesh", "Extract an OBJ mesh from an SDF grid");
    c->add_option("--sdf", sdf, "raw float32 grid (from sample --sdf-out or a corpus sdf_<R>.f32)")
        ->required()
        ->check(CLI::ExistingFile);
    c->add_option("--meta", meta, "grid metadata JSON (default: <sdf>.json, else meta.json beside the grid)");
    c->add_option("--iso", iso, "iso level");
    c->add_option("--out", out, "output OBJ")->required();
    c->callback([this] { run(); });
  }

  void run() {
    fs::path mp = meta;
    if (mp.empty()) {
      mp = sdf + ".json";
      if (!fs::exists(mp)) mp = fs::path(sdf).parent_path() / "meta.json";
    }
    const auto j = nlohmann::json::parse(geometry::read_text(mp));
    geometry::SDFGrid g(j.at("resolution").get<int>(), j.at("truncation").get<float>());
    if (j.contains("bbox")) {
      const auto& b = j["bbox"];
      const auto& lo = b.at("min");
      const auto& hi = b.at("max");
      g.bbox.min = {lo.at(0).get<double>(), lo.at(1).get<double>(), lo.at(2).get<double>()};
      g.bbox.max = {hi.at(0).get<double>(), hi.at(1).get<double>(), hi.at(2).get<double>()};
    }
    g.values = geometry::read_f32(sdf, g.size());
    g.validate();
    const auto mesh = geometry::extract_mesh(g, iso);
    geometry::write_obj(out, mesh);
    std::cout << out << ": " << mesh.vertices.size() << " vertices, " << mesh.faces.size() << " faces\n";
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"airloom: sketch-conditioned 3D garment generation"};
  app.require_subcommand(1);
  GenSynth gen;
  Train train;
  Sample sample;
  Eval eval;
  Serve serve;
  ExportMesh export_mesh;
  gen.add(app);
  train.add(app);
  sample.add(app);
  eval.add(app);
  serve.add(app);
  export_mesh.add(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return 0;
}
