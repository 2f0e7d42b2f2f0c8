// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

// Point-set encoders into the shared 1024-d condition space.

#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <string>
#include <vector>

#include "airloom/geometry/types.hpp"
#include "airloom/nn.hpp"

namespace airloom {

struct EncoderConfig {
  int token_count = 256;
  int layers = 4;
  int heads = 8;
  int width = 256;
  int neighbors = 32;  // points aggregated per token
  static constexpr int output_dim = nn::kConditionDim;
  void validate() const;
};

enum class EmbeddingSource { pointcloud, sketch, null };
enum class EncodeMode { train, eval };

struct ConditionEmbedding {
  std::vector<float> vector;  // exactly 1024 finite values
  EmbeddingSource source = EmbeddingSource::null;
  void validate() const;
  torch::Tensor tensor() const;  // [1024]
};

/// Fixed-size token set of a cloud: FPS centers and their k nearest
/// neighbors relative to the center. Points are sorted lexicographically
/// before selection and every tie is broken by coordinates, so the result
/// does not depend on input order.
struct PointTokens {
  torch::Tensor centers;    // [T, 3]
  torch::Tensor neighbors;  // [T, k, 3]
};

/// Throws on non-finite input or fewer points than token_count.
PointTokens tokenize(const std::vector<geometry::Vec3>& points, const EncoderConfig& cfg);

class TransformerBlockImpl : public torch::nn::Module {
 public:
  TransformerBlockImpl(int width, int heads);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  int heads_;
  torch::nn::LayerNorm norm1_{nullptr}, norm2_{nullptr};
  torch::nn::Linear qkv_{nullptr}, proj_{nullptr}, fc1_{nullptr}, fc2_{nullptr};
};
TORCH_MODULE(TransformerBlock);

/// Mini-PointNet per token, pre-norm transformer, mean pooling, projection to 1024.
class PointEncoderImpl : public torch::nn::Module {
 public:
  explicit PointEncoderImpl(const EncoderConfig& cfg);
  /// centers [B, T, 3], neighbors [B, T, k, 3] -> [B, 1024].
  torch::Tensor forward(const torch::Tensor& centers, const torch::Tensor& neighbors);
  /// Stacks tokens of several clouds and runs forward.
  torch::Tensor forward(const std::vector<PointTokens>& batch);
  const EncoderConfig& config() const { return cfg_; }

 private:
  EncoderConfig cfg_;
  torch::nn::Sequential local_{nullptr}, center_{nullptr};
  std::vector<TransformerBlock> blocks_;
  torch::nn::LayerNorm norm_{nullptr};
  torch::nn::Linear out_{nullptr};
};
TORCH_MODULE(PointEncoder);

/// Runs `encoder` on one cloud. Eval mode disables autograd.
torch::Tensor encode_points(PointEncoder& encoder, const std::vector<geometry::Vec3>& points, EncodeMode mode);

/// Raw little-endian float32[1024].
void export_embedding(const ConditionEmbedding& e, const std::filesystem::path& path);
ConditionEmbedding import_embedding(const std::filesystem::path& path, EmbeddingSource source);

}  // namespace airloom
