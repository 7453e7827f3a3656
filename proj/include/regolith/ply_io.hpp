/*
 * Copyright 2026 The Regolith Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "regolith/geometry.hpp"

static_assert(std::endian::native == std::endian::little,
              "PLY writer assumes a little-endian host");

namespace regolith {

/// Writes a binary little-endian PLY point cloud (float32 x, y, z).
inline void write_ply(const std::filesystem::path& path,
                      const std::vector<Vec3>& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "ply\n"
      << "format binary_little_endian 1.0\n"
      << "element vertex " << points.size() << "\n"
      << "property float x\n"
      << "property float y\n"
      << "property float z\n"
      << "end_header\n";
  for (const Vec3& p : points) {
    const float xyz[3] = {static_cast<float>(p.x()), static_cast<float>(p.y()),
                          static_cast<float>(p.z())};
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
  }
  if (!out) throw IoError("error while writing: " + path.string());
}

/// Reads a point cloud written by write_ply (strict header match).
inline std::vector<Vec3> read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());

  std::string line;
  std::size_t count = 0;
  int property_index = 0;
  bool header_done = false;
  static const char* kExpectedProps[3] = {"property float x", "property float y",
                                          "property float z"};
  if (!std::getline(in, line) || line != "ply")
    throw ParseError("not a PLY file: " + path.string());
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "end_header") {
      header_done = true;
      break;
    }
    if (line.rfind("comment", 0) == 0) continue;
    if (line == "format binary_little_endian 1.0") continue;
    if (line.rfind("element vertex ", 0) == 0) {
      count = std::stoull(line.substr(15));
      continue;
    }
    if (property_index < 3 && line == kExpectedProps[property_index]) {
      ++property_index;
      continue;
    }
    throw ParseError("unsupported PLY header line '" + line + "' in " +
                     path.string());
  }
  if (!header_done || property_index != 3)
    throw ParseError("incomplete PLY header: " + path.string());

  std::vector<Vec3> points;
  points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    float xyz[3];
    in.read(reinterpret_cast<char*>(xyz), sizeof(xyz));
    if (!in) throw ParseError("truncated PLY payload: " + path.string());
    points.emplace_back(xyz[0], xyz[1], xyz[2]);
  }
  return points;
}

}  // namespace regolith
