// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "airloom/geometry/sdf.hpp"

namespace airloom {

using geometry::OccupancyGrid;
using geometry::SDFGrid;

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 0 || t > T) throw InvalidArgument("alpha_bar: t=" + std::to_string(t) + " outside [0, " + std::to_string(T) + "]");
  return t == 0 ? 1.0 : alpha_bars[static_cast<std::size_t>(t - 1)];
}

NoiseSchedule make_schedule(int T, double beta_start, double beta_end) {
  if (T < 10) throw InvalidArgument("make_schedule: T must be >= 10, got " + std::to_string(T));
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw InvalidArgument("make_schedule: need 0 < beta_start <= beta_end < 1");
  }
  NoiseSchedule s;
  s.T = T;
  double prod = 1.0;
  for (int i = 0; i < T; ++i) {
    const double b = beta_start + (beta_end - beta_start) * i / (T - 1);
    prod *= 1.0 - b;
    s.betas.push_back(b);
    s.alpha_bars.push_back(prod);
  }
  return s;
}

NoiseSchedule make_schedule(const DiffusionConfig& cfg) {
  return make_schedule(cfg.timesteps, cfg.beta_start, cfg.beta_end);
}

namespace {

void check_t(int t, const NoiseSchedule& sched) {
  if (t < 1 || t > sched.T) {
    throw InvalidArgument("timestep " + std::to_string(t) + " outside [1, " + std::to_string(sched.T) + "]");
  }
}

/// alpha_bar per sample, broadcastable against [B, ...] of rank `dims`.
torch::Tensor alpha_bar_of(const torch::Tensor& t, const NoiseSchedule& sched, int64_t dims) {
  if (t.dim() != 1) throw InvalidArgument("timesteps must be a 1-d tensor");
  auto tc = t.to(torch::kLong).contiguous();
  std::vector<double> ab(static_cast<std::size_t>(tc.size(0)));
  for (int64_t i = 0; i < tc.size(0); ++i) {
    const auto ti = static_cast<int>(tc[i].item<int64_t>());
    check_t(ti, sched);
    ab[static_cast<std::size_t>(i)] = sched.alpha_bar(ti);
  }
  std::vector<int64_t> shape(static_cast<std::size_t>(dims), 1);
  shape[0] = tc.size(0);
  return torch::tensor(ab, torch::kFloat64).view(shape);
}

void check_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
  if (a.sizes() != b.sizes()) throw InvalidArgument(std::string(what) + ": shape mismatch");
}

torch::Tensor clean_estimate(const torch::Tensor& z_t, const torch::Tensor& eps, const torch::Tensor& ab) {
  auto x0 = (z_t.to(torch::kFloat64) - torch::sqrt(1.0 - ab) * eps.to(torch::kFloat64)) / torch::sqrt(ab);
  return x0.clamp(-1.0, 1.0).to(torch::kFloat32);
}

}  // namespace

torch::Tensor q_sample(const torch::Tensor& z0, int t, const torch::Tensor& eps, const NoiseSchedule& sched) {
  check_t(t, sched);
  check_same_shape(z0, eps, "q_sample");
  const double ab = sched.alpha_bar(t);
  return z0 * static_cast<float>(std::sqrt(ab)) + eps * static_cast<float>(std::sqrt(1.0 - ab));
}

torch::Tensor q_sample(const torch::Tensor& z0, const torch::Tensor& t, const torch::Tensor& eps,
                       const NoiseSchedule& sched) {
  check_same_shape(z0, eps, "q_sample");
  if (t.dim() != 1 || t.size(0) != z0.size(0)) throw InvalidArgument("q_sample: need one timestep per sample");
  auto ab = alpha_bar_of(t, sched, z0.dim());
  return z0 * torch::sqrt(ab).to(torch::kFloat32) + eps * torch::sqrt(1.0 - ab).to(torch::kFloat32);
}

torch::Tensor denoising_loss(const torch::Tensor& z0, const torch::Tensor& mask, const torch::Tensor& t,
                             const torch::Tensor& eps, const torch::Tensor& cond, const NoiseSchedule& sched,
                             const Denoiser& net) {
  check_same_shape(z0, eps, "denoising_loss");
  if (cond.dim() != 2 || cond.size(0) != z0.size(0)) throw InvalidArgument("denoising_loss: cond must be [B, 1024]");
  auto z_t = q_sample(z0, t, eps, sched);
  if (mask.defined()) {
    check_same_shape(z0, mask, "denoising_loss mask");
    z_t = torch::where(mask > 0, z_t, z0);
  }
  auto pred = net(z_t, t, cond);
  check_same_shape(pred, eps, "denoising_loss prediction");
  auto sq = (pred - eps).pow(2);
  if (!mask.defined()) return sq.mean();
  const auto active = mask.sum();
  if (active.item<double>() <= 0.0) throw InvalidArgument("denoising_loss: mask has no active elements");
  return (sq * mask).sum() / active;
}

torch::Tensor cfg_combine(const torch::Tensor& eps_cond, const torch::Tensor& eps_uncond, double w) {
  check_same_shape(eps_cond, eps_uncond, "cfg_combine");
  return torch::lerp(eps_uncond, eps_cond, w);
}

OccupancyGrid build_band(const OccupancyGrid& coarse, int fine_res, int band_width) {
  coarse.validate_shape();
  if (band_width < 0) throw InvalidArgument("build_band: band_width must be >= 0");
  if (fine_res < coarse.resolution || fine_res % coarse.resolution != 0) {
    throw InvalidArgument("build_band: fine_res " + std::to_string(fine_res) + " is not a multiple of coarse " +
                          std::to_string(coarse.resolution));
  }
  const auto up = geometry::upsample_occupancy(coarse, fine_res / coarse.resolution);
  const int n = fine_res;
  auto occ = [&](int x, int y, int z) {
    if (x < 0 || y < 0 || z < 0 || x >= n || y >= n || z >= n) return false;
    return up.at(x, y, z);
  };
  // Boundary, then a separable box (Chebyshev) dilation along each axis.
  std::vector<std::uint8_t> cur(up.size(), 0);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        if (!occ(x, y, z)) continue;
        if (!occ(x - 1, y, z) || !occ(x + 1, y, z) || !occ(x, y - 1, z) || !occ(x, y + 1, z) ||
            !occ(x, y, z - 1) || !occ(x, y, z + 1)) {
          cur[up.index(x, y, z)] = 1;
        }
      }
  const int stride[3] = {n * n, n, 1};
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<std::uint8_t> next(cur.size(), 0);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        for (int z = 0; z < n; ++z) {
          const int c[3] = {x, y, z};
          const auto i = up.index(x, y, z);
          for (int d = -band_width; d <= band_width && !next[i]; ++d) {
            const int v = c[axis] + d;
            if (v >= 0 && v < n && cur[static_cast<std::size_t>(static_cast<long>(i) + d * stride[axis])]) next[i] = 1;
          }
        }
    cur.swap(next);
  }
  OccupancyGrid band(n);
  band.bits = std::move(cur);
  return band;
}

std::vector<int> sampling_timesteps(int T, int steps) {
  if (steps < 1 || steps > T) {
    throw InvalidArgument("sampling steps " + std::to_string(steps) + " outside [1, " + std::to_string(T) + "]");
  }
  std::vector<int> out;
  for (int i = 1; i <= steps; ++i) out.push_back(static_cast<int>(static_cast<long long>(i) * T / steps));
  return out;
}

torch::Tensor occupancy_field(const OccupancyGrid& occ) {
  const long r = occ.resolution;
  auto out = torch::empty({r, r, r}, torch::kFloat32);
  float* p = out.data_ptr<float>();
  for (std::size_t i = 0; i < occ.size(); ++i) p[i] = occ.bits[i] ? 1.0f : -1.0f;
  return out;
}

torch::Tensor mask_tensor(const OccupancyGrid& occ) {
  const long r = occ.resolution;
  auto out = torch::empty({r, r, r}, torch::kFloat32);
  float* p = out.data_ptr<float>();
  for (std::size_t i = 0; i < occ.size(); ++i) p[i] = occ.bits[i] ? 1.0f : 0.0f;
  return out;
}

torch::Tensor sdf_field(const SDFGrid& sdf) {
  const long r = sdf.resolution;
  auto out = torch::empty({r, r, r}, torch::kFloat32);
  float* p = out.data_ptr<float>();
  for (std::size_t i = 0; i < sdf.size(); ++i) p[i] = sdf.values[i] / sdf.truncation;
  return out;
}

OccupancyGrid occupancy_from_field(const torch::Tensor& field) {
  if (field.dim() != 3 || field.size(0) != field.size(1) || field.size(1) != field.size(2)) {
    throw InvalidArgument("occupancy_from_field: expected a cubic [D, D, D] tensor");
  }
  auto c = field.contiguous().to(torch::kFloat32);
  OccupancyGrid occ(static_cast<int>(c.size(0)));
  const float* p = c.data_ptr<float>();
  for (std::size_t i = 0; i < occ.size(); ++i) occ.bits[i] = p[i] > 0.0f ? 1 : 0;
  return occ;
}

torch::Tensor normal_tensor(at::IntArrayRef shape, Rng& rng) {
  auto out = torch::empty(shape, torch::kFloat32);
  float* p = out.data_ptr<float>();
  for (int64_t i = 0; i < out.numel(); ++i) p[i] = static_cast<float>(rng.normal());
  return out;
}

StepNoise draw_step_noise(const StageBatch& batch, const NoiseSchedule& sched, const DiffusionConfig& cfg, Rng& rng) {
  const auto b = batch.z0.size(0);
  StepNoise n;
  n.t = torch::empty({b}, torch::kLong);
  n.drop = torch::empty({b}, torch::kBool);
  n.self_cond = torch::empty({b}, torch::kBool);
  for (int64_t i = 0; i < b; ++i) {
    n.t[i] = static_cast<int64_t>(1 + rng.index(static_cast<std::uint64_t>(sched.T)));
    n.drop[i] = rng.bernoulli(cfg.cond_dropout);
    n.self_cond[i] = rng.bernoulli(cfg.self_cond_prob);
  }
  n.eps = normal_tensor(batch.z0.sizes(), rng);
  return n;
}

namespace {

nn::UNet3d& net_of(GarmentModel& model, Stage stage) { return stage == Stage::coarse ? model->coarse : model->fine; }

void check_batch(const StageBatch& batch, Stage stage) {
  if (!batch.z0.defined() || batch.z0.dim() != 5 || batch.z0.size(1) != 1) {
    throw InvalidArgument("stage batch: z0 must be [B, 1, D, D, D]");
  }
  if (!batch.cond.defined() || batch.cond.dim() != 2 || batch.cond.size(0) != batch.z0.size(0)) {
    throw InvalidArgument("stage batch: cond must be [B, 1024]");
  }
  if (stage == Stage::fine) {
    if (!batch.coarse.defined() || !batch.mask.defined()) throw InvalidArgument("stage batch: fine stage needs coarse and mask");
    check_same_shape(batch.z0, batch.coarse, "stage batch coarse");
    check_same_shape(batch.z0, batch.mask, "stage batch mask");
  }
}

torch::Tensor net_input(Stage stage, const torch::Tensor& z_t, const torch::Tensor& self_cond, const StageBatch& batch) {
  if (stage == Stage::coarse) return torch::cat({z_t, self_cond}, 1);
  return torch::cat({z_t, self_cond, batch.coarse, batch.mask}, 1);
}

}  // namespace

torch::Tensor stage_loss(GarmentModel& model, Stage stage, const StageBatch& batch, const StepNoise& noise,
                         const NoiseSchedule& sched) {
  check_batch(batch, stage);
  auto& net = net_of(model, stage);
  const auto b = batch.z0.size(0);
  auto null = model->null_embedding.unsqueeze(0).expand({b, nn::kConditionDim});
  auto cond = torch::where(noise.drop.view({b, 1}), null, batch.cond);
  const torch::Tensor mask = stage == Stage::fine ? batch.mask : torch::Tensor();

  auto self_cond = torch::zeros_like(batch.z0);
  if (noise.self_cond.any().item<bool>()) {
    torch::NoGradGuard ng;
    auto z_t = q_sample(batch.z0, noise.t, noise.eps, sched);
    if (mask.defined()) z_t = torch::where(mask > 0, z_t, batch.z0);
    auto eps = net->forward(net_input(stage, z_t, self_cond, batch), noise.t, cond.detach());
    auto x0 = clean_estimate(z_t, eps, alpha_bar_of(noise.t, sched, 5));
    if (mask.defined()) x0 = torch::where(mask > 0, x0, batch.z0);
    self_cond = x0 * noise.self_cond.view({b, 1, 1, 1, 1}).to(torch::kFloat32);
  }
  Denoiser fn = [&](const torch::Tensor& z_t, const torch::Tensor& t, const torch::Tensor& c) {
    return net->forward(net_input(stage, z_t, self_cond, batch), t, c);
  };
  return denoising_loss(batch.z0, mask, noise.t, noise.eps, cond, sched, fn);
}

torch::Tensor predict_clean(GarmentModel& model, Stage stage, const StageBatch& batch, int t, const torch::Tensor& eps,
                            const NoiseSchedule& sched) {
  check_batch(batch, stage);
  check_t(t, sched);
  torch::NoGradGuard ng;
  const auto b = batch.z0.size(0);
  auto tt = torch::full({b}, t, torch::kLong);
  auto z_t = q_sample(batch.z0, tt, eps, sched);
  if (stage == Stage::fine) z_t = torch::where(batch.mask > 0, z_t, batch.z0);
  auto pred = net_of(model, stage)->forward(net_input(stage, z_t, torch::zeros_like(z_t), batch), tt, batch.cond);
  return clean_estimate(z_t, pred, alpha_bar_of(tt, sched, 5));
}

namespace {

/// Guided ancestral sampling of one grid. `extras` holds the static input
/// channels ([1, C, D, D, D], may be undefined); `mask`/`fill` hold inactive
/// voxels at a fixed value (undefined for the coarse stage).
torch::Tensor run_sampler(nn::UNet3d& net, Stage stage, const torch::Tensor& extras, const torch::Tensor& mask,
                          const torch::Tensor& fill, const torch::Tensor& cond, const torch::Tensor& null,
                          const NoiseSchedule& sched, const SampleSettings& s, int res) {
  if (!(s.guidance >= 0.0) || !std::isfinite(s.guidance)) throw InvalidArgument("guidance must be finite and >= 0");
  const auto ts = sampling_timesteps(sched.T, s.steps);
  Rng rng(derive_seed(s.seed, stage == Stage::coarse ? 0xc0a25eULL : 0xf19eULL));
  torch::NoGradGuard ng;
  auto z = normal_tensor({1, 1, res, res, res}, rng);
  if (mask.defined()) z = torch::where(mask > 0, z, fill);
  auto self_cond = torch::zeros_like(z);
  auto input = [&](const torch::Tensor& zz) {
    return extras.defined() ? torch::cat({zz, self_cond, extras}, 1) : torch::cat({zz, self_cond}, 1);
  };
  for (int i = static_cast<int>(ts.size()) - 1; i >= 0; --i) {
    const int t = ts[static_cast<std::size_t>(i)];
    const int prev = i > 0 ? ts[static_cast<std::size_t>(i - 1)] : 0;
    auto in = input(z);
    torch::Tensor eps;
    if (s.guidance == 0.0) {
      eps = net->forward(in, torch::full({1}, t, torch::kLong), null.unsqueeze(0));
    } else if (s.guidance == 1.0) {
      eps = net->forward(in, torch::full({1}, t, torch::kLong), cond.unsqueeze(0));
    } else {
      auto both = net->forward(torch::cat({in, in}, 0), torch::full({2}, t, torch::kLong), torch::stack({cond, null}));
      eps = cfg_combine(both.slice(0, 0, 1), both.slice(0, 1, 2), s.guidance);
    }
    const double ab = sched.alpha_bar(t), ab_prev = sched.alpha_bar(prev);
    // Both stages train on targets in [-1, 1].
    auto x0 = clean_estimate(z, eps, torch::full({1, 1, 1, 1, 1}, ab, torch::kFloat64)).clamp(-1.0, 1.0);
    if (prev == 0) {
      z = x0;
    } else {
      const double beta = 1.0 - ab / ab_prev;
      const double c0 = std::sqrt(ab_prev) * beta / (1.0 - ab);
      const double ct = std::sqrt(ab / ab_prev) * (1.0 - ab_prev) / (1.0 - ab);
      const double sigma = std::sqrt(beta * (1.0 - ab_prev) / (1.0 - ab));
      z = x0 * static_cast<float>(c0) + z * static_cast<float>(ct) +
          normal_tensor(z.sizes(), rng) * static_cast<float>(sigma);
    }
    if (mask.defined()) {
      z = torch::where(mask > 0, z, fill);
      x0 = torch::where(mask > 0, x0, fill);
    }
    self_cond = x0;
  }
  return z[0][0];
}

}  // namespace

OccupancyGrid sample_coarse(GarmentModel& model, const NoiseSchedule& sched, const ConditionEmbedding& cond,
                            const SampleSettings& s) {
  const int r = model->config().coarse_resolution;
  auto field = run_sampler(model->coarse, Stage::coarse, torch::Tensor(), torch::Tensor(), torch::Tensor(),
                           cond.tensor(), model->null_embedding.detach(), sched, s, r);
  return occupancy_from_field(field);
}

SDFGrid sample_fine(GarmentModel& model, const NoiseSchedule& sched, const OccupancyGrid& coarse,
                    const ConditionEmbedding& cond, const SampleSettings& s) {
  const auto& cfg = model->config();
  if (coarse.resolution != cfg.coarse_resolution) {
    throw InvalidArgument("sample_fine: coarse grid resolution " + std::to_string(coarse.resolution) +
                          " does not match the model (" + std::to_string(cfg.coarse_resolution) + ")");
  }
  const int r = cfg.fine_resolution;
  const auto band = build_band(coarse, r, cfg.band_width);
  if (band.count() == 0) throw EmptyBandError("sample_fine: the active band is empty");
  const auto up = occupancy_field(geometry::upsample_occupancy(coarse, r / coarse.resolution)).view({1, 1, r, r, r});
  const auto mask = mask_tensor(band).view({1, 1, r, r, r});
  const auto fill = -up;
  auto field = run_sampler(model->fine, Stage::fine, torch::cat({up, mask}, 1), mask, fill, cond.tensor(),
                           model->null_embedding.detach(), sched, s, r);
  SDFGrid out(r, cfg.truncation);
  auto c = field.contiguous();
  const float* p = c.data_ptr<float>();
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = std::clamp(p[i], -1.0f, 1.0f) * cfg.truncation;
  return out;
}

Generation generate(GarmentModel& model, const NoiseSchedule& sched, const ConditionEmbedding& cond,
                    const SampleSettings& s) {
  Generation g;
  g.coarse = sample_coarse(model, sched, cond, s);
  g.band = build_band(g.coarse, model->config().fine_resolution, model->config().band_width);
  g.sdf = sample_fine(model, sched, g.coarse, cond, s);
  g.mesh = geometry::extract_mesh(g.sdf);
  return g;
}

}  // namespace airloom
