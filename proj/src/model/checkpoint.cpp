// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/checkpoint.hpp"

#include <algorithm>
#include <cstring>
#include <map>

#include "airloom/common.hpp"
#include "airloom/geometry/io.hpp"

namespace airloom {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'A', 'I', 'R', 'L', 'O', 'O', 'M', 'W'};

template <class T>
void put(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw InvalidArgument("weights.bin: truncated file");
  }
  const std::string& data_;
  std::size_t pos_ = 0;
};

std::map<std::string, torch::Tensor> sorted_parameters(const GarmentModel& model) {
  std::map<std::string, torch::Tensor> out;
  for (const auto& item : model->named_parameters()) out.emplace(item.key(), item.value());
  return out;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string serialize_weights(const GarmentModel& model, int stage) {
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(stage));
  const auto params = sorted_parameters(model);
  put<std::uint64_t>(out, params.size());
  for (const auto& [name, p] : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.dim()));
    for (auto d : p.sizes()) put<std::int64_t>(out, d);
    auto c = p.detach().contiguous().to(torch::kFloat32);
    out.append(reinterpret_cast<const char*>(c.data_ptr<float>()), static_cast<std::size_t>(c.numel()) * 4);
  }
  return out;
}

std::string Checkpoint::id() const {
  return "s" + std::to_string(stage) + "-" + hex(fnv1a(serialize_weights(model, stage))).substr(0, 12);
}

Checkpoint clone_checkpoint(const Checkpoint& c) {
  Checkpoint out = c;
  out.model = GarmentModel(c.model->config(), 0);
  torch::NoGradGuard ng;
  auto dst = out.model->named_parameters();
  for (const auto& item : c.model->named_parameters()) dst[item.key()].copy_(item.value());
  return out;
}

void save_checkpoint(const Checkpoint& c, const fs::path& dir) {
  if (!c.model) throw InvalidArgument("save_checkpoint: checkpoint has no model");
  const auto weights = serialize_weights(c.model, c.stage);
  const auto& mc = c.model->config();
  json side = {{"format_version", kCheckpointVersion},
               {"stage", c.stage},
               {"coarse_resolution", mc.coarse_resolution},
               {"fine_resolution", mc.fine_resolution},
               {"timesteps", c.diffusion.timesteps},
               {"band_width", mc.band_width},
               {"cond_dropout", c.diffusion.cond_dropout},
               {"data_seed", c.data_seed},
               {"model", to_json(mc)},
               {"diffusion", to_json(c.diffusion)},
               {"config", c.config_snapshot},
               {"weights_fnv1a", hex(fnv1a(weights))}};
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory " + dir.string() + ": " + ec.message());
  geometry::write_text(dir / "weights.bin", weights);
  geometry::write_text(dir / "ckpt.json", side.dump(2) + "\n");
}

Checkpoint load_checkpoint(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("checkpoint " + dir.string() + " is not a directory");
  json side;
  try {
    side = json::parse(geometry::read_text(dir / "ckpt.json"));
  } catch (const json::exception& e) {
    throw InvalidArgument("ckpt.json in " + dir.string() + ": " + e.what());
  }
  const auto weights = geometry::read_text(dir / "weights.bin");
  try {
    const auto version = side.at("format_version").get<std::uint32_t>();
    if (version != kCheckpointVersion) {
      throw InvalidArgument("ckpt.json format_version " + std::to_string(version) + " (this build reads " +
                            std::to_string(kCheckpointVersion) + ")");
    }
    Reader r(weights);
    if (r.bytes(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) throw InvalidArgument("weights.bin: bad magic");
    const auto wversion = r.get<std::uint32_t>();
    if (wversion != kCheckpointVersion) {
      throw InvalidArgument("weights.bin version " + std::to_string(wversion) + " (this build reads " +
                            std::to_string(kCheckpointVersion) + ")");
    }
    const auto wstage = static_cast<int>(r.get<std::uint32_t>());
    const int stage = side.at("stage").get<int>();
    if (stage != wstage) {
      throw InvalidArgument("ckpt.json stage " + std::to_string(stage) + " does not match weights.bin stage " +
                            std::to_string(wstage));
    }
    if (side.at("weights_fnv1a").get<std::string>() != hex(fnv1a(weights))) {
      throw InvalidArgument("weights.bin content does not match the hash recorded in ckpt.json");
    }
    Checkpoint c;
    c.stage = stage;
    c.diffusion = diffusion_config_from_json(side.at("diffusion"));
    c.data_seed = side.at("data_seed").get<std::uint64_t>();
    c.config_snapshot = side.at("config");
    c.model = GarmentModel(model_config_from_json(side.at("model")), 0);
    const auto mc = c.model->config();
    if (side.at("coarse_resolution").get<int>() != mc.coarse_resolution ||
        side.at("fine_resolution").get<int>() != mc.fine_resolution ||
        side.at("band_width").get<int>() != mc.band_width || side.at("timesteps").get<int>() != c.diffusion.timesteps ||
        side.at("cond_dropout").get<double>() != c.diffusion.cond_dropout) {
      throw InvalidArgument("ckpt.json summary fields disagree with its model/diffusion sections");
    }
    auto params = sorted_parameters(c.model);
    const auto count = r.get<std::uint64_t>();
    if (count != params.size()) {
      throw InvalidArgument("weights.bin has " + std::to_string(count) + " tensors, model expects " +
                            std::to_string(params.size()));
    }
    torch::NoGradGuard ng;
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto name = r.bytes(r.get<std::uint32_t>());
      auto it = params.find(name);
      if (it == params.end()) throw InvalidArgument("weights.bin: unexpected tensor " + name);
      const auto rank = r.get<std::uint32_t>();
      std::vector<std::int64_t> dims;
      for (std::uint32_t d = 0; d < rank; ++d) dims.push_back(r.get<std::int64_t>());
      if (it->second.sizes() != at::IntArrayRef(dims)) throw InvalidArgument("weights.bin: shape mismatch for " + name);
      const auto raw = r.bytes(static_cast<std::size_t>(it->second.numel()) * 4);
      auto src = torch::from_blob(const_cast<char*>(raw.data()), dims, torch::kFloat32);
      it->second.copy_(src);
    }
    if (!r.done()) throw InvalidArgument("weights.bin: trailing bytes");
    return c;
  } catch (const json::exception& e) {
    throw InvalidArgument("ckpt.json in " + dir.string() + ": " + e.what());
  }
}

std::vector<std::string> differing_parameters(const GarmentModel& a, const GarmentModel& b) {
  const auto pa = sorted_parameters(a), pb = sorted_parameters(b);
  std::vector<std::string> out;
  for (const auto& [name, t] : pa) {
    auto it = pb.find(name);
    if (it == pb.end() || it->second.sizes() != t.sizes()) {
      out.push_back(name);
      continue;
    }
    auto x = t.detach().contiguous(), y = it->second.detach().contiguous();
    if (std::memcmp(x.data_ptr<float>(), y.data_ptr<float>(), static_cast<std::size_t>(x.numel()) * 4) != 0) {
      out.push_back(name);
    }
  }
  for (const auto& [name, t] : pb) {
    if (!pa.count(name)) out.push_back(name);
  }
  return out;
}

}  // namespace airloom
