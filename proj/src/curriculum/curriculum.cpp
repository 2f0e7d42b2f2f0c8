// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "airloom/common.hpp"

namespace airloom::curriculum {

void DifficultyParams::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("curriculum alpha must be >= 0");
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("curriculum beta must lie in [0, 1]");
  if (inv < 1) throw InvalidArgument("curriculum inv must be positive");
}

void PacingParams::validate() const {
  if (!(p0 > 0.0 && p0 <= 1.0)) throw InvalidArgument("pacing p0 must lie in (0, 1]");
  if (!(q > 1.0) || !std::isfinite(q)) throw InvalidArgument("pacing q must be > 1");
  if (r0 < 1) throw InvalidArgument("pacing r0 must be positive");
}

int sgn(double v) {
  if (!std::isfinite(v)) throw InvalidArgument("sgn: non-finite argument");
  return v >= 0.0 ? 1 : -1;
}

double point_difficulty(double y, double y_pred, double alpha) {
  return 1.0 + alpha * sgn(y) * sgn(y_pred - y);
}

double sample_difficulty(const std::vector<SdfQuery>& queries, double alpha) {
  if (queries.empty()) throw InvalidArgument("sample_difficulty: empty query set");
  double sum = 0.0;
  for (const auto& q : queries) sum += point_difficulty(q.y, q.y_pred, alpha);
  return sum / static_cast<double>(queries.size());
}

double ema_update(double s_k, double s, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("ema_update: beta must lie in [0, 1]");
  return (1.0 - beta) * s_k + beta * s;
}

std::size_t pacing(std::size_t i, std::size_t n, const PacingParams& p) {
  p.validate();
  if (n == 0) throw InvalidArgument("pacing: n must be positive");
  const double k = std::floor(static_cast<double>(i) / p.r0);
  const double frac = std::min(1.0, p.p0 * std::pow(p.q, k));
  // The small slack keeps products such as 0.29 * 100 = 28.999999999999996
  // from flooring one below the exact value.
  const double v = std::floor(static_cast<double>(n) * frac + 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(v));
}

bool easier(double score_a, const std::string& id_a, double score_b, const std::string& id_b) {
  if (score_a != score_b) return score_a < score_b;
  return id_a < id_b;
}

CurriculumState make_state(std::vector<std::string> ids, const std::map<std::string, double>& scores,
                           std::size_t batch_size) {
  if (batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
  std::set<std::string> unique(ids.begin(), ids.end());
  if (unique.size() != ids.size()) throw InvalidArgument("curriculum ids must be unique");
  CurriculumState s;
  s.ids = std::move(ids);
  s.scores = scores;
  s.batch_size = batch_size;
  return rebuild_pool(s);
}

CurriculumState rebuild_pool(const CurriculumState& state) {
  CurriculumState out = state;
  for (const auto& id : state.ids) {
    auto it = state.scores.find(id);
    if (it == state.scores.end()) throw InvalidArgument("curriculum: no score for sample " + id);
    if (!std::isfinite(it->second)) throw InvalidArgument("curriculum: non-finite score for sample " + id);
  }
  out.pool = state.ids;
  std::sort(out.pool.begin(), out.pool.end(), [&](const std::string& a, const std::string& b) {
    return easier(state.scores.at(a), a, state.scores.at(b), b);
  });
  out.batches.clear();
  for (std::size_t i = 0; i < out.pool.size(); i += out.batch_size) {
    const auto end = std::min(out.pool.size(), i + out.batch_size);
    out.batches.emplace_back(out.pool.begin() + static_cast<std::ptrdiff_t>(i),
                             out.pool.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

std::vector<std::vector<std::string>> curriculum_batches(const CurriculumState& state, std::size_t step,
                                                         std::size_t batch_size, const PacingParams& pacing_params) {
  if (batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
  if (state.pool.empty()) throw InvalidArgument("curriculum pool is empty");
  const std::size_t visible = pacing(step, state.pool.size(), pacing_params);
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i < visible; i += batch_size) {
    const auto end = std::min(visible, i + batch_size);
    out.emplace_back(state.pool.begin() + static_cast<std::ptrdiff_t>(i),
                     state.pool.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

CurriculumState refresh_scores(const CurriculumState& state, const std::map<std::string, double>& new_scores,
                               const DifficultyParams& params, std::size_t batch_index) {
  params.validate();
  for (const auto& [id, s] : new_scores) {
    if (!state.scores.count(id)) throw InvalidArgument("curriculum: unknown sample " + id);
    if (!std::isfinite(s)) throw InvalidArgument("curriculum: non-finite new score for sample " + id);
  }
  const auto k = static_cast<long long>(batch_index / static_cast<std::size_t>(params.inv));
  if (k <= state.last_k) return state;
  CurriculumState out = state;
  for (const auto& [id, s] : new_scores) out.scores[id] = ema_update(out.scores[id], s, params.beta);
  out.last_k = k;
  return rebuild_pool(out);
}

}  // namespace airloom::curriculum
