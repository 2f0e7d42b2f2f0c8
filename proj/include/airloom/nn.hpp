// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

// Volumetric encoder-decoder denoiser shared by the coarse and fine stages.

#pragma once

#include <torch/torch.h>

#include <vector>

namespace airloom::nn {

inline constexpr int kConditionDim = 1024;

struct UNetConfig {
  int in_channels = 2;
  int out_channels = 1;
  std::vector<int> channels{32, 48, 64, 96, 96};  // one entry per level
  std::vector<bool> attention{false, false, true, true, true};
  int time_dim = 128;
  int context_tokens = 8;
  int context_dim = 128;
  int heads = 4;
  int groups = 8;

  int levels() const { return static_cast<int>(channels.size()); }
  /// Inputs must be divisible by 2^(levels-1).
  void validate() const;
};

/// Sinusoidal features of integer timesteps, [B] -> [B, dim].
torch::Tensor timestep_features(const torch::Tensor& t, int dim);

class ResBlock3dImpl : public torch::nn::Module {
 public:
  ResBlock3dImpl(int in, int out, int time_dim, int groups);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& temb);

 private:
  torch::nn::GroupNorm norm1_{nullptr}, norm2_{nullptr};
  torch::nn::Conv3d conv1_{nullptr}, conv2_{nullptr}, skip_{nullptr};
  torch::nn::Linear time_{nullptr};
};
TORCH_MODULE(ResBlock3d);

/// Residual multi-head attention from voxels (queries) to condition tokens.
class CrossAttention3dImpl : public torch::nn::Module {
 public:
  CrossAttention3dImpl(int channels, int context_dim, int heads);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& context);

 private:
  int heads_;
  torch::nn::LayerNorm norm_{nullptr};
  torch::nn::Linear q_{nullptr}, k_{nullptr}, v_{nullptr}, out_{nullptr};
};
TORCH_MODULE(CrossAttention3d);

class UNet3dImpl : public torch::nn::Module {
 public:
  explicit UNet3dImpl(const UNetConfig& cfg);

  /// x: [B, in, D, D, D]; t: [B] int64; cond: [B, 1024] -> [B, out, D, D, D].
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& t, const torch::Tensor& cond);

  const UNetConfig& config() const { return cfg_; }

 private:
  UNetConfig cfg_;
  torch::nn::Sequential time_mlp_{nullptr};
  torch::nn::Linear cond_global_{nullptr}, cond_tokens_{nullptr};
  torch::nn::Conv3d stem_{nullptr}, head_{nullptr};
  torch::nn::GroupNorm head_norm_{nullptr};
  std::vector<ResBlock3d> down_, up_;
  std::vector<CrossAttention3d> down_attn_, up_attn_;
  std::vector<torch::nn::Conv3d> downsample_, upsample_;
  ResBlock3d mid1_{nullptr}, mid2_{nullptr};
  CrossAttention3d mid_attn_{nullptr};
};
TORCH_MODULE(UNet3d);

}  // namespace airloom::nn
