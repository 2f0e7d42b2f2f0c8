// Copyright 2026 The Airloom Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "airloom/geometry/types.hpp"

namespace airloom::geometry {

/// OBJ text with `v` and `f` records only (1-based indices). Coordinates are
/// printed in shortest round-trip form so write/read is bit-exact.
std::string to_obj(const TriangleMesh& mesh);
TriangleMesh parse_obj(const std::string& text);

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh);
TriangleMesh read_obj(const std::filesystem::path& path);

/// Raw little-endian float32, no header.
void write_f32(const std::filesystem::path& path, const std::vector<float>& values);
std::vector<float> read_f32(const std::filesystem::path& path, std::size_t expected_count);

/// One byte per voxel.
void write_u8(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_u8(const std::filesystem::path& path, std::size_t expected_count);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace airloom::geometry
