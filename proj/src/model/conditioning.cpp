// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "airloom/common.hpp"
#include "airloom/geometry/io.hpp"

namespace airloom {

using geometry::Vec3;
namespace F = torch::nn::functional;

void EncoderConfig::validate() const {
  if (token_count < 1 || layers < 1 || heads < 1 || width < 2 || neighbors < 1) {
    throw InvalidArgument("encoder config values must be positive");
  }
  if (width % heads != 0) throw InvalidArgument("encoder width must be divisible by heads");
}

void ConditionEmbedding::validate() const {
  if (vector.size() != static_cast<std::size_t>(EncoderConfig::output_dim)) {
    throw InvalidArgument("condition embedding must have 1024 values, got " + std::to_string(vector.size()));
  }
  for (float v : vector) {
    if (!std::isfinite(v)) throw InvalidArgument("condition embedding has a non-finite value");
  }
}

torch::Tensor ConditionEmbedding::tensor() const {
  validate();
  return torch::from_blob(const_cast<float*>(vector.data()), {EncoderConfig::output_dim}, torch::kFloat32).clone();
}

namespace {

bool lex_less(const Vec3& a, const Vec3& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

}  // namespace

PointTokens tokenize(const std::vector<Vec3>& points, const EncoderConfig& cfg) {
  cfg.validate();
  const auto n = points.size();
  const auto t = static_cast<std::size_t>(cfg.token_count);
  if (n < t) {
    throw InvalidArgument("tokenize: need at least " + std::to_string(t) + " points, got " + std::to_string(n));
  }
  for (const auto& p : points) {
    if (!p.allFinite()) throw InvalidArgument("tokenize: non-finite point");
  }
  std::vector<Vec3> pts = points;
  std::sort(pts.begin(), pts.end(), lex_less);

  Vec3 centroid = Vec3::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(n);

  // Farthest-point sampling; strict comparisons keep the lowest sorted index on ties.
  std::vector<std::size_t> chosen;
  chosen.reserve(t);
  std::size_t start = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (pts[i] - centroid).squaredNorm();
    if (d > best) best = d, start = i;
  }
  std::vector<double> mind(n, std::numeric_limits<double>::infinity());
  std::size_t cur = start;
  for (std::size_t s = 0; s < t; ++s) {
    chosen.push_back(cur);
    std::size_t next = 0;
    double far = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      mind[i] = std::min(mind[i], (pts[i] - pts[cur]).squaredNorm());
      if (mind[i] > far) far = mind[i], next = i;
    }
    cur = next;
  }

  const auto k = std::min<std::size_t>(static_cast<std::size_t>(cfg.neighbors), n);
  PointTokens out;
  out.centers = torch::empty({static_cast<long>(t), 3}, torch::kFloat32);
  out.neighbors = torch::empty({static_cast<long>(t), static_cast<long>(k), 3}, torch::kFloat32);
  auto ca = out.centers.accessor<float, 2>();
  auto na = out.neighbors.accessor<float, 3>();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t s = 0; s < t; ++s) {
    const Vec3& c = pts[chosen[s]];
    for (int d = 0; d < 3; ++d) ca[s][d] = static_cast<float>(c[d]);
    for (std::size_t i = 0; i < n; ++i) dist[i] = {(pts[i] - c).squaredNorm(), i};
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t j = 0; j < k; ++j) {
      const Vec3 rel = pts[dist[j].second] - c;
      for (int d = 0; d < 3; ++d) na[s][j][d] = static_cast<float>(rel[d]);
    }
  }
  return out;
}

TransformerBlockImpl::TransformerBlockImpl(int width, int heads) : heads_(heads) {
  norm1_ = register_module("norm1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({width})));
  qkv_ = register_module("qkv", torch::nn::Linear(width, 3 * width));
  proj_ = register_module("proj", torch::nn::Linear(width, width));
  norm2_ = register_module("norm2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({width})));
  fc1_ = register_module("fc1", torch::nn::Linear(width, 2 * width));
  fc2_ = register_module("fc2", torch::nn::Linear(2 * width, width));
}

torch::Tensor TransformerBlockImpl::forward(const torch::Tensor& x) {
  const auto b = x.size(0), n = x.size(1), w = x.size(2), d = w / heads_;
  auto qkv = qkv_(norm1_(x)).view({b, n, 3, heads_, d}).permute({2, 0, 3, 1, 4});
  auto att = torch::softmax(torch::matmul(qkv[0], qkv[1].transpose(2, 3)) / std::sqrt(static_cast<double>(d)), -1);
  auto o = torch::matmul(att, qkv[2]).transpose(1, 2).reshape({b, n, w});
  auto h = x + proj_(o);
  return h + fc2_(F::gelu(fc1_(norm2_(h))));
}

PointEncoderImpl::PointEncoderImpl(const EncoderConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int w = cfg_.width;
  local_ = register_module("local", torch::nn::Sequential(torch::nn::Linear(3, w / 2), torch::nn::GELU(),
                                                          torch::nn::Linear(w / 2, w)));
  center_ = register_module("center", torch::nn::Sequential(torch::nn::Linear(3, w), torch::nn::GELU(),
                                                            torch::nn::Linear(w, w)));
  for (int i = 0; i < cfg_.layers; ++i) {
    blocks_.push_back(register_module("block" + std::to_string(i), TransformerBlock(w, cfg_.heads)));
  }
  norm_ = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({w})));
  out_ = register_module("out", torch::nn::Linear(w, EncoderConfig::output_dim));
}

torch::Tensor PointEncoderImpl::forward(const torch::Tensor& centers, const torch::Tensor& neighbors) {
  if (centers.dim() != 3 || centers.size(2) != 3 || neighbors.dim() != 4 || neighbors.size(3) != 3 ||
      neighbors.size(1) != centers.size(1)) {
    throw InvalidArgument("point encoder: expected centers [B,T,3] and neighbors [B,T,k,3]");
  }
  // Neighborhood offsets are scaled up so the local MLP sees O(1) inputs.
  auto local = std::get<0>(local_->forward(neighbors * 10.0).max(2));
  auto x = local + center_->forward(centers);
  for (auto& b : blocks_) x = b(x);
  return out_(norm_(x.mean(1)));
}

torch::Tensor PointEncoderImpl::forward(const std::vector<PointTokens>& batch) {
  if (batch.empty()) throw InvalidArgument("point encoder: empty batch");
  std::vector<torch::Tensor> c, nb;
  for (const auto& t : batch) c.push_back(t.centers), nb.push_back(t.neighbors);
  return forward(torch::stack(c), torch::stack(nb));
}

torch::Tensor encode_points(PointEncoder& encoder, const std::vector<Vec3>& points, EncodeMode mode) {
  auto tokens = tokenize(points, encoder->config());
  // No mode-dependent layers: eval only disables autograd.
  if (mode == EncodeMode::eval) {
    torch::NoGradGuard ng;
    return encoder->forward({tokens})[0];
  }
  return encoder->forward({tokens})[0];
}

void export_embedding(const ConditionEmbedding& e, const std::filesystem::path& path) {
  e.validate();
  geometry::write_f32(path, e.vector);
}

ConditionEmbedding import_embedding(const std::filesystem::path& path, EmbeddingSource source) {
  ConditionEmbedding e{geometry::read_f32(path, EncoderConfig::output_dim), source};
  e.validate();
  return e;
}

}  // namespace airloom
