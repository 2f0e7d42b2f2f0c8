// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/service.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <httplib.h>
#include <json.hpp>

#include "airloom/geometry/points.hpp"

namespace airloom {

using nlohmann::json;

namespace {

std::string error_body(const std::string& msg) { return json{{"error", msg}}.dump(); }

HttpResponse error(int status, const std::string& msg) { return {status, error_body(msg)}; }

template <typename T>
std::optional<T> optional_int(const json& body, const char* field, T lo) {
  if (!body.contains(field) || body[field].is_null()) return std::nullopt;
  const auto& v = body[field];
  if (!v.is_number_integer()) throw InvalidArgument(std::string(field) + ": must be an integer");
  const bool negative = !v.is_number_unsigned() && v.get<std::int64_t>() < 0;
  if (negative || v.get<std::uint64_t>() < static_cast<std::uint64_t>(lo) ||
      v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<T>::max())) {
    throw InvalidArgument(std::string(field) + ": must be an integer in [" + std::to_string(lo) + ", " +
                          std::to_string(std::numeric_limits<T>::max()) + "]");
  }
  return static_cast<T>(v.get<std::uint64_t>());
}

}  // namespace

WorkerPool::WorkerPool(int workers) {
  if (workers < 1) throw InvalidArgument("workers: must be at least 1");
  for (int i = 0; i < workers; ++i) threads_.emplace_back([this] { loop(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

std::future<HttpResponse> WorkerPool::submit(std::function<HttpResponse()> job) {
  std::packaged_task<HttpResponse()> task(std::move(job));
  auto fut = task.get_future();
  {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(task));
  }
  cv_.notify_one();
  return fut;
}

void WorkerPool::loop() {
  for (;;) {
    std::packaged_task<HttpResponse()> task;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
    }
    task();
  }
}

GenerateRequest parse_generate_request(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error&) {
    throw InvalidArgument("body: malformed JSON");
  } catch (const json::out_of_range&) {
    throw InvalidArgument("body: non-finite number");
  }
  if (!j.is_object()) throw InvalidArgument("body: expected a JSON object");
  if (!j.contains("points")) throw InvalidArgument("points: required");
  const auto& pts = j["points"];
  if (!pts.is_array()) throw InvalidArgument("points: expected a list of [x,y,z]");
  if (pts.size() < kMinRequestPoints) {
    throw InvalidArgument("points: need at least " + std::to_string(kMinRequestPoints));
  }
  if (pts.size() > kMaxRequestPoints) {
    throw InvalidArgument("points: at most " + std::to_string(kMaxRequestPoints) + " allowed");
  }
  GenerateRequest req;
  req.points.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    if (!p.is_array() || p.size() != 3) {
      throw InvalidArgument("points[" + std::to_string(i) + "]: expected [x,y,z]");
    }
    geometry::Vec3 v;
    for (int k = 0; k < 3; ++k) {
      if (!p[k].is_number()) throw InvalidArgument("points[" + std::to_string(i) + "]: coordinates must be numbers");
      v[k] = p[k].get<double>();
      if (!std::isfinite(v[k])) throw InvalidArgument("points[" + std::to_string(i) + "]: non-finite coordinate");
    }
    req.points.push_back(v);
  }
  req.seed = optional_int<std::uint64_t>(j, "seed", 0);
  if (j.contains("guidance") && !j["guidance"].is_null()) {
    if (!j["guidance"].is_number()) throw InvalidArgument("guidance: must be a number");
    const double g = j["guidance"].get<double>();
    if (!std::isfinite(g) || g < 0.0) throw InvalidArgument("guidance: must be finite and >= 0");
    req.guidance = g;
  }
  req.steps = optional_int<int>(j, "steps", 1);
  req.resolution = optional_int<int>(j, "resolution", 1);
  return req;
}

geometry::SketchCloud request_sketch(const std::vector<geometry::Vec3>& points, std::uint64_t seed) {
  std::vector<geometry::Vec3> pts = points;
  const bool inside = std::all_of(pts.begin(), pts.end(), [](const geometry::Vec3& p) {
    return p.cwiseAbs().maxCoeff() <= 1.0;
  });
  if (!inside) {
    const auto box = geometry::BBox::of(pts);
    const double half = 0.5 * box.extent().maxCoeff();
    geometry::Similarity s{box.center(), half > 0.0 ? 0.9 / half : 1.0};
    for (auto& p : pts) p = s.apply(p);
  }
  auto cloud = geometry::resample_points(geometry::PointCloud{pts}, geometry::kSketchPoints, seed);
  geometry::SketchCloud sk;
  sk.points = std::move(cloud.points);
  for (auto& p : sk.points) p = p.cwiseMax(-1.0).cwiseMin(1.0);
  return sk;
}

struct GenerationService::Server {
  httplib::Server http;
};

GenerationService::GenerationService(ServiceOptions opts) : opts_(opts), pool_(opts.workers) {}

GenerationService::~GenerationService() { stop(); }

void GenerationService::set_checkpoint(Checkpoint ckpt) {
  if (ckpt.stage < 2) {
    throw InvalidArgument("serving requires a stage 2 or 3 checkpoint (got stage " + std::to_string(ckpt.stage) + ")");
  }
  auto l = std::make_shared<Loaded>();
  l->sched = make_schedule(ckpt.diffusion);
  l->id = ckpt.id();
  l->ckpt = std::move(ckpt);
  l->ckpt.model->eval();
  std::lock_guard lock(mu_);
  loaded_ = std::move(l);
}

std::shared_ptr<const GenerationService::Loaded> GenerationService::loaded() const {
  std::lock_guard lock(mu_);
  return loaded_;
}

bool GenerationService::ready() const { return loaded() != nullptr; }

HttpResponse GenerationService::health() const {
  const auto l = loaded();
  if (!l) return {503, json{{"status", "loading"}}.dump()};
  return {200, json{{"status", "ok"}, {"checkpoint", l->id}, {"stage", l->ckpt.stage}}.dump()};
}

HttpResponse GenerationService::generate(const std::string& body) {
  GenerateRequest req;
  try {
    req = parse_generate_request(body);
  } catch (const InvalidArgument& e) {
    return error(400, e.what());
  }
  const auto l = loaded();
  if (!l) return error(503, "model: not loaded");
  const auto& mc = l->ckpt.model->config();
  if (req.resolution && *req.resolution != mc.fine_resolution) {
    return error(400, "resolution: this model generates at " + std::to_string(mc.fine_resolution));
  }
  if (req.steps && *req.steps > l->sched.T) {
    return error(400, "steps: at most " + std::to_string(l->sched.T));
  }
  if (!req.seed) {
    std::random_device rd;
    req.seed = (static_cast<std::uint64_t>(rd()) << 32 | rd()) & 0x7fffffffffffffffULL;
  }
  auto fut = pool_.submit([this, l, req] { return run_generation(l, req); });
  if (fut.wait_for(opts_.timeout) != std::future_status::ready) {
    return error(504, "generation: timed out after " + std::to_string(opts_.timeout.count()) + " ms");
  }
  return fut.get();
}

HttpResponse GenerationService::run_generation(const std::shared_ptr<const Loaded>& l,
                                               const GenerateRequest& req) const {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed = *req.seed;
  // Modules are only read here; forward passes under no-grad share them safely.
  auto model = l->ckpt.model;
  SampleSettings st{seed, req.guidance.value_or(l->ckpt.diffusion.guidance),
                    req.steps.value_or(l->ckpt.diffusion.sampling_steps)};
  Generation g;
  try {
    const auto sketch = request_sketch(req.points, derive_seed(seed, fnv1a("request-points")));
    const auto cond = encode_sketch(model, sketch, EncodeMode::eval);
    g = airloom::generate(model, l->sched, cond, st);
  } catch (const EmptyBandError&) {
    return error(422, "mesh: generation produced an empty mesh");
  } catch (const InvalidArgument& e) {
    return error(400, e.what());
  } catch (const std::exception& e) {
    return error(500, std::string("generation: ") + e.what());
  }
  if (g.mesh.empty()) return error(422, "mesh: generation produced an empty mesh");
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  json verts = json::array();
  for (const auto& v : g.mesh.vertices) verts.push_back({v.x(), v.y(), v.z()});
  json faces = json::array();
  for (const auto& f : g.mesh.faces) faces.push_back({f[0], f[1], f[2]});
  json out{{"vertices", std::move(verts)},
           {"faces", std::move(faces)},
           {"stats",
            {{"sampling_ms", ms},
             {"num_vertices", g.mesh.vertices.size()},
             {"num_faces", g.mesh.faces.size()},
             {"seed_used", seed}}}};
  return {200, out.dump()};
}

namespace {

void install_routes(httplib::Server& http, GenerationService& svc) {
  http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                            {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                            {"Access-Control-Allow-Headers", "Content-Type"}});
  http.set_payload_max_length(64u << 20);
  auto reply = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  http.Get("/health", [&svc, reply](const httplib::Request&, httplib::Response& res) { reply(res, svc.health()); });
  http.Post("/v1/generate", [&svc, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.generate(req.body));
  });
  http.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  http.set_error_handler([reply](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) reply(res, error(res.status, "path: not found"));
  });
}

}  // namespace

void GenerationService::listen(const std::string& host, int port, const std::function<void(int)>& on_ready) {
  server_ = std::make_unique<Server>();
  install_routes(server_->http, *this);
  if (!server_->http.bind_to_port(host, port)) {
    throw IoError("serve: cannot bind " + host + ":" + std::to_string(port));
  }
  if (on_ready) on_ready(port);
  server_->http.listen_after_bind();
}

int GenerationService::start_background(const std::string& host) {
  server_ = std::make_unique<Server>();
  install_routes(server_->http, *this);
  const int port = server_->http.bind_to_any_port(host);
  if (port <= 0) throw IoError("serve: cannot bind an ephemeral port on " + host);
  background_ = std::thread([this] { server_->http.listen_after_bind(); });
  server_->http.wait_until_ready();
  return port;
}

void GenerationService::stop() {
  if (server_) server_->http.stop();
  if (background_.joinable()) background_.join();
}

}  // namespace airloom
