// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/nn.hpp"

#include <cmath>

#include "airloom/common.hpp"

namespace airloom::nn {

namespace F = torch::nn::functional;

void UNetConfig::validate() const {
  if (in_channels < 1 || out_channels < 1) throw InvalidArgument("unet: channel counts must be positive");
  if (channels.empty()) throw InvalidArgument("unet: at least one level required");
  if (attention.size() != channels.size()) throw InvalidArgument("unet: attention flags must match levels");
  for (int c : channels) {
    if (c < 1 || c % groups != 0) throw InvalidArgument("unet: level widths must be positive multiples of groups");
  }
  if (time_dim < 2 || time_dim % 2 != 0) throw InvalidArgument("unet: time_dim must be even");
  if (context_tokens < 1 || context_dim < 1 || heads < 1) throw InvalidArgument("unet: bad attention shape");
  for (int c : channels) {
    if (c % heads != 0) throw InvalidArgument("unet: level widths must be divisible by heads");
  }
}

torch::Tensor timestep_features(const torch::Tensor& t, int dim) {
  const int half = dim / 2;
  auto freqs = torch::exp(torch::arange(half, torch::kFloat32) * (-std::log(10000.0) / half));
  auto args = t.to(torch::kFloat32).unsqueeze(1) * freqs.unsqueeze(0);
  return torch::cat({torch::sin(args), torch::cos(args)}, 1);
}

ResBlock3dImpl::ResBlock3dImpl(int in, int out, int time_dim, int groups) {
  norm1_ = register_module("norm1", torch::nn::GroupNorm(groups, in));
  conv1_ = register_module("conv1", torch::nn::Conv3d(torch::nn::Conv3dOptions(in, out, 3).padding(1)));
  time_ = register_module("time", torch::nn::Linear(time_dim, out));
  norm2_ = register_module("norm2", torch::nn::GroupNorm(groups, out));
  conv2_ = register_module("conv2", torch::nn::Conv3d(torch::nn::Conv3dOptions(out, out, 3).padding(1)));
  if (in != out) skip_ = register_module("skip", torch::nn::Conv3d(torch::nn::Conv3dOptions(in, out, 1)));
}

torch::Tensor ResBlock3dImpl::forward(const torch::Tensor& x, const torch::Tensor& temb) {
  auto h = conv1_(F::silu(norm1_(x)));
  h = h + time_(temb).view({h.size(0), h.size(1), 1, 1, 1});
  h = conv2_(F::silu(norm2_(h)));
  return h + (skip_ ? skip_(x) : x);
}

CrossAttention3dImpl::CrossAttention3dImpl(int channels, int context_dim, int heads) : heads_(heads) {
  norm_ = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({channels})));
  q_ = register_module("q", torch::nn::Linear(torch::nn::LinearOptions(channels, channels).bias(false)));
  k_ = register_module("k", torch::nn::Linear(torch::nn::LinearOptions(context_dim, channels).bias(false)));
  v_ = register_module("v", torch::nn::Linear(torch::nn::LinearOptions(context_dim, channels).bias(false)));
  out_ = register_module("out", torch::nn::Linear(channels, channels));
  torch::NoGradGuard ng;
  out_->weight.zero_();
  out_->bias.zero_();
}

torch::Tensor CrossAttention3dImpl::forward(const torch::Tensor& x, const torch::Tensor& context) {
  const auto b = x.size(0), c = x.size(1);
  auto seq = x.flatten(2).transpose(1, 2);  // [B, N, C]
  const auto n = seq.size(1), m = context.size(1), d = c / heads_;
  auto q = q_(norm_(seq)).view({b, n, heads_, d}).transpose(1, 2);
  auto k = k_(context).view({b, m, heads_, d}).transpose(1, 2);
  auto v = v_(context).view({b, m, heads_, d}).transpose(1, 2);
  auto att = torch::softmax(torch::matmul(q, k.transpose(2, 3)) / std::sqrt(static_cast<double>(d)), -1);
  auto o = torch::matmul(att, v).transpose(1, 2).reshape({b, n, c});
  return x + out_(o).transpose(1, 2).view(x.sizes());
}

UNet3dImpl::UNet3dImpl(const UNetConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int td = cfg_.time_dim, levels = cfg_.levels();
  time_mlp_ = register_module("time_mlp", torch::nn::Sequential(torch::nn::Linear(td, td), torch::nn::SiLU(),
                                                                torch::nn::Linear(td, td)));
  cond_global_ = register_module("cond_global", torch::nn::Linear(kConditionDim, td));
  cond_tokens_ = register_module("cond_tokens",
                                 torch::nn::Linear(kConditionDim, cfg_.context_tokens * cfg_.context_dim));
  stem_ = register_module("stem", torch::nn::Conv3d(torch::nn::Conv3dOptions(cfg_.in_channels, cfg_.channels[0], 3)
                                                        .padding(1)));
  int prev = cfg_.channels[0];
  for (int l = 0; l < levels; ++l) {
    const int c = cfg_.channels[l];
    const auto tag = std::to_string(l);
    down_.push_back(register_module("down" + tag, ResBlock3d(prev, c, td, cfg_.groups)));
    down_attn_.push_back(cfg_.attention[l]
                             ? register_module("down_attn" + tag, CrossAttention3d(c, cfg_.context_dim, cfg_.heads))
                             : CrossAttention3d(nullptr));
    if (l + 1 < levels) {
      downsample_.push_back(register_module(
          "downsample" + tag, torch::nn::Conv3d(torch::nn::Conv3dOptions(c, c, 3).stride(2).padding(1))));
    }
    prev = c;
  }
  mid1_ = register_module("mid1", ResBlock3d(prev, prev, td, cfg_.groups));
  mid_attn_ = register_module("mid_attn", CrossAttention3d(prev, cfg_.context_dim, cfg_.heads));
  mid2_ = register_module("mid2", ResBlock3d(prev, prev, td, cfg_.groups));
  up_.resize(levels, nullptr);
  up_attn_.resize(levels, nullptr);
  upsample_.resize(levels, nullptr);
  for (int l = levels - 1; l >= 0; --l) {
    const int c = cfg_.channels[l];
    const auto tag = std::to_string(l);
    up_[l] = register_module("up" + tag, ResBlock3d(prev + c, c, td, cfg_.groups));
    if (cfg_.attention[l]) up_attn_[l] = register_module("up_attn" + tag, CrossAttention3d(c, cfg_.context_dim, cfg_.heads));
    if (l > 0) {
      const int next = cfg_.channels[l - 1];
      upsample_[l] = register_module("upsample" + tag,
                                     torch::nn::Conv3d(torch::nn::Conv3dOptions(c, next, 3).padding(1)));
      prev = next;
    } else {
      prev = c;
    }
  }
  head_norm_ = register_module("head_norm", torch::nn::GroupNorm(cfg_.groups, cfg_.channels[0]));
  head_ = register_module("head", torch::nn::Conv3d(torch::nn::Conv3dOptions(cfg_.channels[0], cfg_.out_channels, 3)
                                                        .padding(1)));
  torch::NoGradGuard ng;
  head_->weight.zero_();
  head_->bias.zero_();
}

torch::Tensor UNet3dImpl::forward(const torch::Tensor& x, const torch::Tensor& t, const torch::Tensor& cond) {
  const int levels = cfg_.levels();
  const auto b = x.size(0);
  if (x.dim() != 5 || x.size(1) != cfg_.in_channels) throw InvalidArgument("unet: input must be [B, in, D, D, D]");
  if (x.size(2) % (1 << (levels - 1)) != 0) throw InvalidArgument("unet: spatial size not divisible by 2^(levels-1)");
  if (t.dim() != 1 || t.size(0) != b) throw InvalidArgument("unet: t must be [B]");
  if (cond.dim() != 2 || cond.size(0) != b || cond.size(1) != kConditionDim) {
    throw InvalidArgument("unet: cond must be [B, 1024]");
  }
  auto temb = time_mlp_->forward(timestep_features(t, cfg_.time_dim)) + cond_global_(cond);
  temb = F::silu(temb);
  auto context = cond_tokens_(cond).view({b, cfg_.context_tokens, cfg_.context_dim});

  auto h = stem_(x);
  std::vector<torch::Tensor> skips;
  for (int l = 0; l < levels; ++l) {
    h = down_[l](h, temb);
    if (down_attn_[l]) h = down_attn_[l](h, context);
    skips.push_back(h);
    if (l + 1 < levels) h = downsample_[l](h);
  }
  h = mid2_(mid_attn_(mid1_(h, temb), context), temb);
  for (int l = levels - 1; l >= 0; --l) {
    h = up_[l](torch::cat({h, skips[l]}, 1), temb);
    if (up_attn_[l]) h = up_attn_[l](h, context);
    if (l > 0) {
      h = F::interpolate(h, F::InterpolateFuncOptions().scale_factor(std::vector<double>{2, 2, 2})
                                .mode(torch::kNearest));
      h = upsample_[l](h);
    }
  }
  return head_(F::silu(head_norm_(h)));
}

}  // namespace airloom::nn
