// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "torch_doctest.hpp"

#include <future>

#include "airloom/service.hpp"
#include "airloom/training.hpp"
#include "fixtures.hpp"

// After the Eigen headers: <resolv.h> defines a `_res` macro.
#include <httplib.h>
#include <json.hpp>

using namespace airloom;
using nlohmann::json;

namespace {

const Checkpoint& trained() {
  static const Checkpoint c = [] {
    auto cfg = fixture::tiny_config();
    cfg.stage1_coarse.epochs = cfg.stage1_fine.epochs = cfg.stage2.epochs = 1;
    const auto data = load_training_data(fixture::tiny_corpus(), dataset::Split::train, cfg);
    return run_stage2(cfg, data, run_stage1(cfg, data));
  }();
  return c;
}

json sketch_points() {
  const auto s = dataset::load_split(fixture::tiny_corpus(), dataset::Split::test).front();
  json pts = json::array();
  for (const auto& p : s.sketch.points) pts.push_back({p.x(), p.y(), p.z()});
  return pts;
}

std::string body(const json& pts, std::optional<std::uint64_t> seed = 5) {
  json j{{"points", pts}, {"steps", 4}};
  if (seed) j["seed"] = *seed;
  return j.dump();
}

std::string error_of(const HttpResponse& r) { return json::parse(r.body).at("error").get<std::string>(); }

}  // namespace

TEST_CASE("request validation") {
  auto pts = sketch_points();
  CHECK_NOTHROW(parse_generate_request(body(pts)));
  auto msg = [](const std::string& b) {
    try {
      parse_generate_request(b);
    } catch (const InvalidArgument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  json five = json::array();
  for (int i = 0; i < 5; ++i) five.push_back({0.1 * i, 0.0, 0.0});
  CHECK(msg(body(five)) == "points: need at least 16");
  CHECK(msg("{not json") == "body: malformed JSON");
  CHECK(msg("[1,2]") == "body: expected a JSON object");
  CHECK(msg("{}") == "points: required");
  CHECK(msg(R"({"points": 3})").rfind("points:", 0) == 0);
  auto bad = pts;
  bad[7] = {0.0, 0.0};
  CHECK(msg(body(bad)) == "points[7]: expected [x,y,z]");
  bad = pts;
  bad[2] = {0.0, "x", 0.0};
  CHECK(msg(body(bad)).rfind("points[2]:", 0) == 0);
  std::string inf = R"({"points":[[1e999,0,0])";
  for (int i = 0; i < 15; ++i) inf += ",[0,0,0]";
  CHECK(msg(inf + "]}") == "body: non-finite number");
  json big = json::array();
  for (std::size_t i = 0; i <= kMaxRequestPoints; ++i) big.push_back({0.0, 0.0, 0.0});
  CHECK(msg(body(big)).rfind("points: at most", 0) == 0);

  json j{{"points", pts}};
  j["guidance"] = -1.0;
  CHECK(msg(j.dump()).rfind("guidance:", 0) == 0);
  j.erase("guidance");
  j["steps"] = 0;
  CHECK(msg(j.dump()).rfind("steps:", 0) == 0);
  j["steps"] = 3000000000LL;
  CHECK(msg(j.dump()).rfind("steps:", 0) == 0);
  j["steps"] = 2.5;
  CHECK(msg(j.dump()).rfind("steps:", 0) == 0);
  j.erase("steps");
  j["seed"] = -3;
  CHECK(msg(j.dump()).rfind("seed:", 0) == 0);
  j["seed"] = 18446744073709551615ULL;
  CHECK(*parse_generate_request(j.dump()).seed == 18446744073709551615ULL);
}

TEST_CASE("request points are normalized and resampled to a sketch") {
  std::vector<geometry::Vec3> pts;
  Rng rng(1);
  for (int i = 0; i < 40; ++i) pts.emplace_back(rng.uniform(-5, 5), rng.uniform(0, 30), rng.uniform(-2, 2));
  const auto s = request_sketch(pts, 3);
  CHECK_NOTHROW(s.validate());
  CHECK(s.points.size() == geometry::kSketchPoints);
  const auto box = geometry::BBox::of(s.points);
  CHECK(box.extent().maxCoeff() == doctest::Approx(1.8).epsilon(1e-3));
  CHECK(request_sketch(pts, 3) == s);

  std::vector<geometry::Vec3> inside(5000, geometry::Vec3(0.25, -0.5, 0.5));
  for (std::size_t i = 0; i < inside.size(); ++i) inside[i].x() = -1.0 + 2.0 * static_cast<double>(i) / 4999.0;
  const auto t = request_sketch(inside, 3);
  CHECK_NOTHROW(t.validate());
  // Points already in [-1, 1] are not rescaled.
  CHECK(geometry::BBox::of(t.points).max.y() == -0.5);
}

TEST_CASE("service handler: 503 before load, then deterministic generation") {
  GenerationService svc;
  CHECK(svc.health().status == 503);
  CHECK_FALSE(svc.ready());
  const auto pts = sketch_points();
  CHECK(svc.generate(body(pts)).status == 503);
  // Validation still runs first.
  CHECK(svc.generate("{").status == 400);

  CHECK_THROWS_AS(svc.set_checkpoint(make_initial_checkpoint(fixture::tiny_config())), InvalidArgument);
  svc.set_checkpoint(clone_checkpoint(trained()));
  const auto h = svc.health();
  CHECK(h.status == 200);
  const auto hj = json::parse(h.body);
  CHECK(hj["status"] == "ok");
  CHECK(hj["stage"] == 2);
  CHECK(hj["checkpoint"] == trained().id());

  const auto a = svc.generate(body(pts));
  REQUIRE(a.status == 200);
  const auto b = svc.generate(body(pts));
  CHECK(a.body.size() > 0);
  const auto ja = json::parse(a.body), jb = json::parse(b.body);
  CHECK(ja["vertices"].dump() == jb["vertices"].dump());
  CHECK(ja["faces"].dump() == jb["faces"].dump());
  CHECK(ja["stats"]["seed_used"] == 5);
  CHECK(ja["stats"]["num_faces"] == ja["faces"].size());
  CHECK(ja["stats"]["num_vertices"] == ja["vertices"].size());
  CHECK(ja["faces"].size() >= 1);
  const auto nv = ja["vertices"].size();
  for (const auto& f : ja["faces"]) {
    for (const auto& i : f) CHECK(i.get<std::size_t>() < nv);
  }

  const auto c = svc.generate(body(pts, std::nullopt));
  REQUIRE(c.status == 200);
  CHECK(json::parse(c.body)["stats"]["seed_used"].is_number_unsigned());

  CHECK(svc.generate(json{{"points", pts}, {"resolution", 64}}.dump()).status == 400);
  CHECK(svc.generate(json{{"points", pts}, {"resolution", 16}, {"steps", 2}}.dump()).status == 200);
  CHECK(error_of(svc.generate(json{{"points", pts}, {"steps", 100000}}.dump())).rfind("steps:", 0) == 0);
}

TEST_CASE("an empty coarse result yields 422") {
  auto ck = clone_checkpoint(trained());
  {
    // A huge constant noise prediction drives every coarse estimate to empty.
    torch::NoGradGuard ng;
    for (auto& p : ck.model->coarse->named_parameters()) {
      if (p.key().find("bias") != std::string::npos && p.value().numel() == 1) p.value().fill_(50.0);
    }
  }
  GenerationService svc;
  svc.set_checkpoint(std::move(ck));
  const auto r = svc.generate(body(sketch_points()));
  CHECK(r.status == 422);
  CHECK(error_of(r).rfind("mesh:", 0) == 0);
}

TEST_CASE("requests past the timeout get 504") {
  GenerationService svc({1, std::chrono::milliseconds(1)});
  svc.set_checkpoint(clone_checkpoint(trained()));
  const auto r = svc.generate(body(sketch_points()));
  CHECK(r.status == 504);
}

TEST_CASE("concurrent requests match serial results") {
  GenerationService serial;
  serial.set_checkpoint(clone_checkpoint(trained()));
  GenerationService pool({2, std::chrono::milliseconds(120000)});
  pool.set_checkpoint(clone_checkpoint(trained()));
  const auto pts = sketch_points();
  std::vector<std::string> expected;
  for (std::uint64_t s : {1, 2, 3}) expected.push_back(serial.generate(body(pts, s)).body);
  std::vector<std::future<HttpResponse>> futs;
  for (std::uint64_t s : {1, 2, 3}) futs.push_back(std::async(std::launch::async, [&, s] { return pool.generate(body(pts, s)); }));
  for (std::size_t i = 0; i < futs.size(); ++i) {
    const auto got = json::parse(futs[i].get().body);
    const auto want = json::parse(expected[i]);
    CHECK(got["vertices"] == want["vertices"]);
    CHECK(got["faces"] == want["faces"]);
  }
}

TEST_CASE("HTTP transport") {
  GenerationService svc;
  const int port = svc.start_background("127.0.0.1");
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(60, 0);
  auto h = cli.Get("/health");
  REQUIRE(h);
  CHECK(h->status == 503);
  CHECK(h->get_header_value("Access-Control-Allow-Origin") == "*");

  svc.set_checkpoint(clone_checkpoint(trained()));
  h = cli.Get("/health");
  REQUIRE(h);
  CHECK(h->status == 200);
  CHECK(json::parse(h->body).is_object());

  auto r = cli.Post("/v1/generate", body(sketch_points()), "application/json");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->get_header_value("Content-Type") == "application/json");
  CHECK(json::parse(r->body)["faces"].size() > 0);

  r = cli.Post("/v1/generate", R"({"points": [[0,0,0]]})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);
  CHECK(json::parse(r->body)["error"] == "points: need at least 16");

  auto o = cli.Options("/v1/generate");
  REQUIRE(o);
  CHECK(o->status == 204);
  CHECK(o->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

  auto nf = cli.Get("/nope");
  REQUIRE(nf);
  CHECK(nf->status == 404);
  svc.stop();
}
