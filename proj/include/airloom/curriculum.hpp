// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

// Adaptive curriculum: per-point SDF difficulty scores, per-sample EMA
// scores, an ascending sample pool and a pacing function that decides how
// much of the pool each step may draw from.

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace airloom::curriculum {

struct DifficultyParams {
  double alpha = 0.5;  // >= 0
  double beta = 0.1;   // [0, 1]
  int inv = 1;         // > 0
  void validate() const;
};

struct PacingParams {
  double p0 = 0.2;  // (0, 1]
  double q = 1.9;   // > 1
  int r0 = 1;       // > 0
  void validate() const;
};

struct SdfQuery {
  std::array<float, 3> point{};
  double y = 0.0;       // ground-truth SDF
  double y_pred = 0.0;  // predicted SDF
};

/// +1 for v >= 0 (including -0.0), -1 otherwise. Throws on non-finite v.
int sgn(double v);

/// 1 + alpha * sgn(y) * sgn(y_pred - y).
double point_difficulty(double y, double y_pred, double alpha);

/// Mean point difficulty over a non-empty query set.
double sample_difficulty(const std::vector<SdfQuery>& queries, double alpha);

/// (1 - beta) * s_k + beta * s.
double ema_update(double s_k, double s, double beta);

/// floor(n * min(1, p0 * q^floor(i / r0))), at least 1.
std::size_t pacing(std::size_t i, std::size_t n, const PacingParams& p);

/// The single ordering used for the pool: ascending score, ties by id.
bool easier(double score_a, const std::string& id_a, double score_b, const std::string& id_b);

struct CurriculumState {
  std::vector<std::string> ids;           // the sample id set
  std::map<std::string, double> scores;   // s_k per id
  std::vector<std::string> pool;          // ids sorted by easier()
  std::vector<std::vector<std::string>> batches;  // pool partition
  std::size_t batch_size = 8;
  long long last_k = -1;                  // last value of floor(batch_index / inv) that updated

  bool operator==(const CurriculumState&) const = default;
};

/// Initial state over `ids` with the given scores (one per id).
CurriculumState make_state(std::vector<std::string> ids, const std::map<std::string, double>& scores,
                           std::size_t batch_size);

/// Sorts the pool and re-partitions batches; throws naming any id without a score.
CurriculumState rebuild_pool(const CurriculumState& state);

/// Batches of at most batch_size ids covering pool[0, pacing(step, n)).
std::vector<std::vector<std::string>> curriculum_batches(const CurriculumState& state, std::size_t step,
                                                         std::size_t batch_size, const PacingParams& pacing_params);

/// Applies ema_update to every id in new_scores when floor(batch_index / inv)
/// has advanced past the last update, then rebuilds the pool. Otherwise the
/// state is returned unchanged. Throws on ids outside the state.
CurriculumState refresh_scores(const CurriculumState& state, const std::map<std::string, double>& new_scores,
                               const DifficultyParams& params, std::size_t batch_index);

}  // namespace airloom::curriculum
