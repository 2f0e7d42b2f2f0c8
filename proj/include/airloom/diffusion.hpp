// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

// Coarse-to-fine conditional diffusion: schedule, forward process, the
// epsilon-prediction loss, guidance, the active band and the samplers.
//
// Grids enter the networks as [B, 1, D, D, D] float tensors indexed
// [x][y][z], matching the (x * R + y) * R + z layout of the geometry types.
// The coarse stage diffuses an occupancy field (occupied 1, empty -1); the
// fine stage diffuses sdf / truncation on the active band only.

#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <functional>
#include <vector>

#include "airloom/common.hpp"
#include "airloom/geometry/types.hpp"
#include "airloom/model.hpp"

namespace airloom {

/// Raised when the coarse stage leaves no active band to refine.
class EmptyBandError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct NoiseSchedule {
  int T = 0;
  std::vector<double> betas;       // betas[t - 1] for t in [1, T]
  std::vector<double> alpha_bars;  // alpha_bars[t - 1]
  /// alpha_bar at t in [0, T]; alpha_bar(0) = 1.
  double alpha_bar(int t) const;
};

/// Linear betas from beta_start to beta_end. Requires T >= 10 and
/// 0 < beta_start <= beta_end < 1.
NoiseSchedule make_schedule(int T, double beta_start, double beta_end);
NoiseSchedule make_schedule(const DiffusionConfig& cfg);

/// sqrt(ab_t) * z0 + sqrt(1 - ab_t) * eps for a single t in [1, T].
torch::Tensor q_sample(const torch::Tensor& z0, int t, const torch::Tensor& eps, const NoiseSchedule& sched);
/// Per-sample timesteps t: [B] int64, z0 and eps [B, ...].
torch::Tensor q_sample(const torch::Tensor& z0, const torch::Tensor& t, const torch::Tensor& eps,
                       const NoiseSchedule& sched);

/// (z_t, t, cond) -> predicted noise.
using Denoiser = std::function<torch::Tensor(const torch::Tensor&, const torch::Tensor&, const torch::Tensor&)>;

/// Mean of (eps - net(z_t, t, cond))^2 over the batch and the active
/// elements of `mask` (all elements when mask is undefined). Inactive
/// elements of z_t are held at z0.
torch::Tensor denoising_loss(const torch::Tensor& z0, const torch::Tensor& mask, const torch::Tensor& t,
                             const torch::Tensor& eps, const torch::Tensor& cond, const NoiseSchedule& sched,
                             const Denoiser& net);

/// eps_uncond + w * (eps_cond - eps_uncond); exact at w = 0 and w = 1.
torch::Tensor cfg_combine(const torch::Tensor& eps_cond, const torch::Tensor& eps_uncond, double w);

/// Fine voxels within band_width (Chebyshev) of the boundary of the
/// upsampled coarse occupancy. A boundary voxel is occupied with an empty
/// or out-of-domain 6-neighbor, so a full grid yields its domain faces.
geometry::OccupancyGrid build_band(const geometry::OccupancyGrid& coarse, int fine_res, int band_width);

/// i * T / steps for i in [1, steps]: strictly increasing and ending at T.
std::vector<int> sampling_timesteps(int T, int steps);

// Grid/tensor conversions ([D, D, D] float tensors).
torch::Tensor occupancy_field(const geometry::OccupancyGrid& occ);  // +1 occupied, -1 empty
torch::Tensor mask_tensor(const geometry::OccupancyGrid& occ);      // 1 / 0
torch::Tensor sdf_field(const geometry::SDFGrid& sdf);              // values / truncation
geometry::OccupancyGrid occupancy_from_field(const torch::Tensor& field);  // bit iff value > 0

/// Training-time inputs of one stage for a batch, all [B, 1, D, D, D]
/// except cond [B, 1024].
struct StageBatch {
  torch::Tensor z0;
  torch::Tensor cond;
  torch::Tensor coarse;  // fine stage only: upsampled coarse occupancy field
  torch::Tensor mask;    // fine stage only: active band
};

enum class Stage { coarse, fine };

/// Random draws of one training step: timesteps, noise, condition dropout
/// and self-conditioning flags.
struct StepNoise {
  torch::Tensor t;        // [B] int64 in [1, T]
  torch::Tensor eps;      // like z0
  torch::Tensor drop;     // [B] bool: use the null condition
  torch::Tensor self_cond;  // [B] bool
};

StepNoise draw_step_noise(const StageBatch& batch, const NoiseSchedule& sched, const DiffusionConfig& cfg, Rng& rng);

/// Denoising loss of one stage with condition dropout and self-conditioning.
torch::Tensor stage_loss(GarmentModel& model, Stage stage, const StageBatch& batch, const StepNoise& noise,
                         const NoiseSchedule& sched);

/// Clean-signal estimate of one stage at a fixed t with zero self-conditioning,
/// as used for curriculum scoring. Returns [B, 1, D, D, D].
torch::Tensor predict_clean(GarmentModel& model, Stage stage, const StageBatch& batch, int t, const torch::Tensor& eps,
                            const NoiseSchedule& sched);

/// Standard normals drawn from `rng` in element order.
torch::Tensor normal_tensor(at::IntArrayRef shape, Rng& rng);

struct SampleSettings {
  std::uint64_t seed = 0;
  double guidance = 3.0;
  int steps = 50;
};

/// Ancestral sampling of the coarse occupancy field; thresholded at 0.
/// Throws when steps > T or steps < 1.
geometry::OccupancyGrid sample_coarse(GarmentModel& model, const NoiseSchedule& sched, const ConditionEmbedding& cond,
                                      const SampleSettings& s);

/// Band-restricted fine SDF sampling. Inactive voxels are +truncation
/// outside the coarse occupancy and -truncation inside. Throws on an empty band.
geometry::SDFGrid sample_fine(GarmentModel& model, const NoiseSchedule& sched, const geometry::OccupancyGrid& coarse,
                              const ConditionEmbedding& cond, const SampleSettings& s);

struct Generation {
  geometry::TriangleMesh mesh;
  geometry::OccupancyGrid coarse;
  geometry::OccupancyGrid band;
  geometry::SDFGrid sdf;
};

/// sample_coarse -> build_band -> sample_fine -> extract_mesh.
Generation generate(GarmentModel& model, const NoiseSchedule& sched, const ConditionEmbedding& cond,
                    const SampleSettings& s);

}  // namespace airloom
