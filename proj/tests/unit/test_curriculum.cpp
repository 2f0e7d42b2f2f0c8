// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "airloom/common.hpp"
#include "airloom/curriculum.hpp"

using namespace airloom;
using namespace airloom::curriculum;

namespace {

// Exact pacing for rational p0 = pn/pd and q = qn/qd using integer arithmetic:
// floor(n * min(1, pn * qn^k / (pd * qd^k))), at least 1.
std::size_t pacing_exact(std::size_t i, std::size_t n, long pn, long pd, long qn, long qd, int r0) {
  const int k = static_cast<int>(i / r0);
  __int128 num = pn, den = pd;
  for (int j = 0; j < k && num < den; ++j) {
    num *= qn;
    den *= qd;
  }
  if (num >= den) return n;
  const auto v = static_cast<std::size_t>((static_cast<__int128>(n) * num) / den);
  return std::max<std::size_t>(1, v);
}

std::map<std::string, double> scores_of(std::initializer_list<std::pair<const std::string, double>> l) { return l; }

}  // namespace

TEST_CASE("sgn follows the two-branch definition") {
  CHECK(sgn(0.0) == 1);
  CHECK(sgn(-0.0) == 1);
  CHECK(sgn(-0.3) == -1);
  CHECK(sgn(1e-12) == 1);
  CHECK(sgn(-1e-300) == -1);
  CHECK_THROWS_AS(sgn(std::nan("")), InvalidArgument);
  CHECK_THROWS_AS(sgn(std::numeric_limits<double>::infinity()), InvalidArgument);
}

TEST_CASE("point_difficulty hand-evaluated values") {
  CHECK(point_difficulty(0.5, 0.2, 0.0) == 1.0);
  CHECK(point_difficulty(-0.4, 0.9, 0.0) == 1.0);
  CHECK(point_difficulty(0.5, 0.2, 0.5) == 0.5);
  CHECK(point_difficulty(-0.1, -0.2, 0.5) == 1.5);
  // y = 0 counts as positive; a prediction equal to y counts as sgn(0) = +1.
  CHECK(point_difficulty(0.0, 0.0, 0.5) == 1.5);
  CHECK(point_difficulty(0.3, 0.3, 0.25) == 1.25);
}

TEST_CASE("point_difficulty takes exactly the values 1 - alpha and 1 + alpha") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double alpha = rng.uniform(0.0, 2.0);
    const double y = rng.uniform(-0.1, 0.1), yp = rng.uniform(-0.1, 0.1);
    const double s = point_difficulty(y, yp, alpha);
    REQUIRE((s == 1.0 - alpha || s == 1.0 + alpha));
    // Positive difficulty exactly when the prediction errs away from zero.
    const bool away = (y >= 0) == (yp - y >= 0);
    if (alpha > 0.0) CHECK((s == 1.0 + alpha) == away);
  }
}

TEST_CASE("sample_difficulty is the arithmetic mean") {
  const double a = 0.5;
  std::vector<SdfQuery> hard(7, SdfQuery{{}, 0.1, 0.2});
  CHECK(sample_difficulty(hard, a) == 1.5);
  std::vector<SdfQuery> half;
  for (int i = 0; i < 5; ++i) {
    half.push_back({{}, 0.1, 0.2});   // 1 + a
    half.push_back({{}, 0.1, 0.05});  // 1 - a
  }
  CHECK(sample_difficulty(half, a) == 1.0);
  CHECK(sample_difficulty({{{}, -0.1, -0.2}}, a) == point_difficulty(-0.1, -0.2, a));
  CHECK_THROWS_AS(sample_difficulty({}, a), InvalidArgument);

  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    std::vector<SdfQuery> q;
    const auto m = 1 + rng.index(50);
    for (std::size_t i = 0; i < m; ++i) q.push_back({{}, rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const double s = sample_difficulty(q, a);
    CHECK(s >= 1.0 - a);
    CHECK(s <= 1.0 + a);
  }
}

TEST_CASE("ema_update hand-evaluated values and contraction") {
  CHECK(ema_update(1.3, 0.2, 0.0) == 1.3);
  CHECK(ema_update(1.3, 0.2, 1.0) == 0.2);
  CHECK(ema_update(1.0, 0.5, 0.2) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(std::abs(ema_update(1.0, 0.5, 0.2) - 0.9) <= 2 * std::numeric_limits<double>::epsilon());
  CHECK_THROWS_AS(ema_update(1.0, 0.5, 1.5), InvalidArgument);
  CHECK_THROWS_AS(ema_update(1.0, 0.5, -0.1), InvalidArgument);

  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double sk = rng.uniform(0, 2), s = rng.uniform(0, 2), b = rng.uniform(0, 1);
    const double next = ema_update(sk, s, b);
    CHECK(std::abs(std::abs(next - s) - (1 - b) * std::abs(sk - s)) <= 1e-14);
  }
}

TEST_CASE("pacing hand-evaluated values with the default constants") {
  const PacingParams d;
  CHECK(d.p0 == 0.2);
  CHECK(d.q == 1.9);
  CHECK(d.r0 == 1);
  CHECK(pacing(0, 100, d) == 20);
  CHECK(pacing(1, 100, d) == 38);
  CHECK(pacing(2, 100, d) == 72);
  CHECK(pacing(3, 100, d) == 100);
  CHECK(pacing(50, 100, d) == 100);
  CHECK(pacing(0, 3, d) == 1);  // floor(0.6) clamped to 1
}

TEST_CASE("pacing matches exact rational arithmetic") {
  struct Case {
    long pn, pd, qn, qd;
    int r0;
  };
  for (const auto& c : {Case{2, 10, 19, 10, 1}, Case{2, 10, 19, 10, 3}, Case{29, 100, 3, 2, 2},
                        Case{1, 20, 2, 1, 1}, Case{7, 100, 13, 10, 4}, Case{1, 1, 2, 1, 1}}) {
    PacingParams p{static_cast<double>(c.pn) / c.pd, static_cast<double>(c.qn) / c.qd, c.r0};
    for (std::size_t n : {1u, 3u, 10u, 100u, 969u}) {
      std::size_t prev = 0;
      for (std::size_t i = 0; i < 40; ++i) {
        const auto got = pacing(i, n, p);
        CAPTURE(c.pn);
        CAPTURE(c.pd);
        CAPTURE(n);
        CAPTURE(i);
        REQUIRE(got == pacing_exact(i, n, c.pn, c.pd, c.qn, c.qd, c.r0));
        CHECK(got >= prev);
        prev = got;
      }
      // Saturation from ceil(log_q(1 / p0)) * r0 on.
      const auto sat = static_cast<std::size_t>(std::ceil(std::log(1.0 / p.p0) / std::log(p.q) - 1e-12)) * c.r0;
      CHECK(pacing(sat, n, p) == n);
    }
  }
  CHECK_THROWS_AS(pacing(0, 0, PacingParams{}), InvalidArgument);
  CHECK_THROWS_AS(pacing(0, 10, PacingParams{0.2, 1.0, 1}), InvalidArgument);
}

TEST_CASE("rebuild_pool sorts ascending with id tie-break") {
  auto s = make_state({"a", "b", "c"}, scores_of({{"a", 1.5}, {"b", 0.5}, {"c", 1.0}}), 2);
  CHECK(s.pool == std::vector<std::string>{"b", "c", "a"});
  CHECK(s.batches == std::vector<std::vector<std::string>>{{"b", "c"}, {"a"}});
  CHECK(rebuild_pool(s) == s);

  auto eq = make_state({"d", "b", "a", "c"}, scores_of({{"a", 1}, {"b", 1}, {"c", 1}, {"d", 1}}), 8);
  CHECK(eq.pool == std::vector<std::string>{"a", "b", "c", "d"});

  CurriculumState missing = s;
  missing.scores.erase("c");
  CHECK_THROWS_WITH_AS(rebuild_pool(missing), doctest::Contains("c"), InvalidArgument);
}

TEST_CASE("rebuild_pool yields a sorted permutation on random scores") {
  Rng rng(10);
  for (int t = 0; t < 100; ++t) {
    const auto n = 1 + rng.index(40);
    std::vector<std::string> ids;
    std::map<std::string, double> scores;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back("s" + std::to_string(rng.next_u64() % 100000) + "_" + std::to_string(i));
      // Few distinct values so ties are common.
      scores[ids.back()] = 0.5 + 0.25 * static_cast<double>(rng.index(5));
    }
    const auto s = make_state(ids, scores, 1 + rng.index(6));
    auto sorted_ids = ids;
    std::sort(sorted_ids.begin(), sorted_ids.end());
    auto pool_sorted = s.pool;
    std::sort(pool_sorted.begin(), pool_sorted.end());
    CHECK(pool_sorted == sorted_ids);
    for (std::size_t i = 1; i < s.pool.size(); ++i) {
      const auto& a = s.pool[i - 1];
      const auto& b = s.pool[i];
      CHECK((scores[a] < scores[b] || (scores[a] == scores[b] && a < b)));
    }
    std::vector<std::string> flat;
    for (const auto& b : s.batches) {
      CHECK(b.size() <= s.batch_size);
      flat.insert(flat.end(), b.begin(), b.end());
    }
    CHECK(flat == s.pool);
  }
}

TEST_CASE("curriculum_batches draws from the paced prefix") {
  std::vector<std::string> ids;
  std::map<std::string, double> scores;
  for (int i = 0; i < 100; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "i%03d", i);
    ids.push_back(buf);
    scores[buf] = 1.0 + 0.001 * ((i * 37) % 100);
  }
  const auto s = make_state(ids, scores, 10);
  const auto b0 = curriculum_batches(s, 0, 10, {});
  REQUIRE(b0.size() == 2);
  CHECK(b0[0] == std::vector<std::string>(s.pool.begin(), s.pool.begin() + 10));
  CHECK(b0[1] == std::vector<std::string>(s.pool.begin() + 10, s.pool.begin() + 20));

  const auto late = curriculum_batches(s, 7, 16, {});
  std::vector<std::string> flat;
  for (const auto& b : late) flat.insert(flat.end(), b.begin(), b.end());
  CHECK(flat == s.pool);
  CHECK(late.back().size() == 100 % 16);
  CHECK(std::set<std::string>(flat.begin(), flat.end()).size() == flat.size());
  CHECK_THROWS_AS(curriculum_batches(s, 0, 0, {}), InvalidArgument);
}

TEST_CASE("refresh_scores follows the update counter") {
  const auto base = make_state({"a", "b", "c"}, scores_of({{"a", 1.0}, {"b", 1.0}, {"c", 1.0}}), 2);
  const std::map<std::string, double> fresh{{"a", 0.0}};

  DifficultyParams every{0.5, 0.5, 1};
  auto s = base;
  for (std::size_t m = 0; m < 4; ++m) s = refresh_scores(s, fresh, every, m);
  CHECK(s.scores.at("a") == 1.0 / 16.0);

  DifficultyParams second{0.5, 0.5, 2};
  s = base;
  std::vector<double> seen;
  for (std::size_t m = 0; m < 6; ++m) {
    s = refresh_scores(s, fresh, second, m);
    seen.push_back(s.scores.at("a"));
  }
  CHECK(seen == std::vector<double>{0.5, 0.5, 0.25, 0.25, 0.125, 0.125});

  DifficultyParams frozen{0.5, 0.0, 1};
  s = base;
  Rng rng(1);
  for (std::size_t m = 0; m < 20; ++m) {
    s = refresh_scores(s, {{"a", rng.uniform()}, {"c", rng.uniform(-5, 5)}}, frozen, m);
    CHECK(s.pool == base.pool);
  }

  CHECK_THROWS_WITH_AS(refresh_scores(base, {{"zz", 1.0}}, every, 0), doctest::Contains("zz"), InvalidArgument);
}

TEST_CASE("refresh_scores reorders the pool easiest first") {
  auto s = make_state({"a", "b", "c"}, scores_of({{"a", 1.0}, {"b", 1.0}, {"c", 1.0}}), 3);
  s = refresh_scores(s, {{"a", 1.5}, {"b", 0.5}}, DifficultyParams{0.5, 1.0, 1}, 0);
  CHECK(s.pool == std::vector<std::string>{"b", "c", "a"});
}

TEST_CASE("curriculum evolution is deterministic for a fixed score stream") {
  auto run = [] {
    std::vector<std::string> ids;
    std::map<std::string, double> scores;
    for (int i = 0; i < 30; ++i) {
      ids.push_back("x" + std::to_string(i));
      scores[ids.back()] = 1.0;
    }
    auto s = make_state(ids, scores, 4);
    Rng rng(77);
    std::vector<std::vector<std::string>> trace;
    std::size_t batch_index = 0;
    for (std::size_t step = 0; step < 6; ++step) {
      for (const auto& b : curriculum_batches(s, step, 4, {})) {
        trace.push_back(b);
        std::map<std::string, double> fresh;
        for (const auto& id : b) fresh[id] = rng.uniform(0.5, 1.5);
        s = refresh_scores(s, fresh, DifficultyParams{0.5, 0.1, 2}, batch_index++);
      }
    }
    return std::make_pair(trace, s);
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}
