// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

// JSON-over-HTTP generation service.
//
//   GET  /health       200 {"status":"ok","checkpoint":<id>,"stage":<n>}; 503 before a model is loaded
//   POST /v1/generate  {"points":[[x,y,z],...], "seed"?, "guidance"?, "steps"?, "resolution"?}
//                      200 {"vertices", "faces", "stats":{sampling_ms, num_vertices, num_faces, seed_used}}
//                      400 invalid request, 422 empty mesh, 503 no model, 504 timeout
//
// Errors are {"error": "<field>: <message>"}.

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "airloom/checkpoint.hpp"
#include "airloom/diffusion.hpp"

namespace airloom {

inline constexpr std::size_t kMinRequestPoints = 16;
inline constexpr std::size_t kMaxRequestPoints = 100000;

struct ServiceOptions {
  int workers = 1;
  std::chrono::milliseconds timeout{120000};
};

struct HttpResponse {
  int status = 200;
  std::string body;
};

/// Fixed-size thread pool with a FIFO queue.
class WorkerPool {
 public:
  explicit WorkerPool(int workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::future<HttpResponse> submit(std::function<HttpResponse()> job);

 private:
  void loop();
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::packaged_task<HttpResponse()>> queue_;
  std::vector<std::thread> threads_;
  bool stopping_ = false;
};

struct GenerateRequest {
  std::vector<geometry::Vec3> points;
  std::optional<std::uint64_t> seed;
  std::optional<double> guidance;
  std::optional<int> steps;
  std::optional<int> resolution;
};

/// Parses and validates a request body; throws InvalidArgument with a
/// "<field>: <message>" text on any violation.
GenerateRequest parse_generate_request(const std::string& body);

/// Request points as a 4096-point sketch: rescaled into [-0.9, 0.9]^3 when
/// any coordinate lies outside [-1, 1], then resampled with `seed`.
geometry::SketchCloud request_sketch(const std::vector<geometry::Vec3>& points, std::uint64_t seed);

/// Transport-independent request handling; the HTTP server delegates here.
class GenerationService {
 public:
  explicit GenerationService(ServiceOptions opts = {});
  ~GenerationService();

  /// Installs a model; requests before this get 503.
  void set_checkpoint(Checkpoint ckpt);
  bool ready() const;

  HttpResponse health() const;
  /// Validates synchronously, then runs generation on the worker pool.
  HttpResponse generate(const std::string& body);

  /// Serves on host:port until stop(). `on_ready` runs once listening.
  void listen(const std::string& host, int port, const std::function<void(int port)>& on_ready = {});
  /// Binds an ephemeral port, returns it, and serves on a background thread.
  int start_background(const std::string& host);
  void stop();

 private:
  struct Loaded {
    Checkpoint ckpt;
    NoiseSchedule sched;
    std::string id;
  };
  HttpResponse run_generation(const std::shared_ptr<const Loaded>& model, const GenerateRequest& req) const;
  std::shared_ptr<const Loaded> loaded() const;

  ServiceOptions opts_;
  mutable std::mutex mu_;
  std::shared_ptr<const Loaded> loaded_;
  WorkerPool pool_;
  struct Server;
  std::unique_ptr<Server> server_;
  std::thread background_;
};

}  // namespace airloom
