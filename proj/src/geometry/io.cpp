// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#include "airloom/geometry/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "airloom/common.hpp"

namespace airloom::geometry {
namespace {

void append_number(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

double parse_double(std::string_view token, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw InvalidArgument("obj line " + std::to_string(line) + ": bad number '" +
                          std::string(token) + "'");
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::vector<char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string to_obj(const TriangleMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 48 + mesh.faces.size() * 24);
  for (const auto& v : mesh.vertices) {
    out += "v ";
    append_number(out, v.x());
    out += ' ';
    append_number(out, v.y());
    out += ' ';
    append_number(out, v.z());
    out += '\n';
  }
  for (const auto& f : mesh.faces) {
    out += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) + ' ' +
           std::to_string(f[2] + 1) + '\n';
  }
  return out;
}

TriangleMesh parse_obj(const std::string& text) {
  TriangleMesh mesh;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      std::string a, b, c;
      ls >> a >> b >> c;
      mesh.vertices.emplace_back(parse_double(a, lineno), parse_double(b, lineno),
                                 parse_double(c, lineno));
    } else if (tag == "f") {
      std::vector<std::int32_t> idx;
      std::string tok;
      while (ls >> tok) {
        // Accept v, v/vt, v//vn and v/vt/vn; only the position index is used.
        const auto slash = tok.find('/');
        const std::string head = tok.substr(0, slash);
        long v = 0;
        auto res = std::from_chars(head.data(), head.data() + head.size(), v);
        if (res.ec != std::errc() || v == 0) {
          throw InvalidArgument("obj line " + std::to_string(lineno) + ": bad face index");
        }
        if (v < 0) v += static_cast<long>(mesh.vertices.size()) + 1;
        idx.push_back(static_cast<std::int32_t>(v - 1));
      }
      if (idx.size() < 3) throw InvalidArgument("obj line " + std::to_string(lineno) + ": face with < 3 vertices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  mesh.validate();
  return mesh;
}

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  write_text(path, to_obj(mesh));
}

TriangleMesh read_obj(const std::filesystem::path& path) {
  try {
    return parse_obj(read_text(path));
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void write_f32(const std::filesystem::path& path, const std::vector<float>& values) {
  auto out = open_out(path);
  std::vector<char> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<float> read_f32(const std::filesystem::path& path, std::size_t expected_count) {
  const auto bytes = read_bytes(path);
  if (bytes.size() != expected_count * 4) {
    throw IoError(path.string() + ": expected " + std::to_string(expected_count * 4) +
                  " bytes, found " + std::to_string(bytes.size()));
  }
  std::vector<float> values(expected_count);
  for (std::size_t i = 0; i < expected_count; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

void write_u8(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  auto out = open_out(path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::uint8_t> read_u8(const std::filesystem::path& path, std::size_t expected_count) {
  const auto bytes = read_bytes(path);
  if (bytes.size() != expected_count) {
    throw IoError(path.string() + ": expected " + std::to_string(expected_count) +
                  " bytes, found " + std::to_string(bytes.size()));
  }
  return {bytes.begin(), bytes.end()};
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  return {bytes.begin(), bytes.end()};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace airloom::geometry
