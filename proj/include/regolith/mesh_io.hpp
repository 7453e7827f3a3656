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
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "regolith/geometry.hpp"
#include "regolith/scene.hpp"
#include "regolith/util.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary mesh writers assume a little-endian host");

namespace regolith {

namespace detail {

struct VertexKey {
  std::uint64_t x, y, z;
  bool operator==(const VertexKey&) const = default;
};

struct VertexKeyHash {
  std::size_t operator()(const VertexKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::uint64_t v : {k.x, k.y, k.z}) {
      h ^= v;
      h *= 0x100000001b3ull;
    }
    return static_cast<std::size_t>(h);
  }
};

inline VertexKey key_of(const Vec3& v) {
  VertexKey k;
  std::memcpy(&k.x, &v.x(), 8);
  std::memcpy(&k.y, &v.y(), 8);
  std::memcpy(&k.z, &v.z(), 8);
  return k;
}

}  // namespace detail

/// Writes an indexed Wavefront OBJ (v/f records only). Identical vertices
/// are shared; coordinates are printed with round-trip precision.
inline void write_obj(const std::filesystem::path& path,
                      const std::vector<Triangle>& tris) {
  std::vector<Vec3> vertices;
  std::unordered_map<detail::VertexKey, std::uint32_t, detail::VertexKeyHash> index;
  std::vector<std::array<std::uint32_t, 3>> faces;
  faces.reserve(tris.size());
  auto vertex_id = [&](const Vec3& v) {
    const auto [it, inserted] =
        index.try_emplace(detail::key_of(v), static_cast<std::uint32_t>(vertices.size()));
    if (inserted) vertices.push_back(v);
    return it->second;
  };
  for (const Triangle& t : tris)
    faces.push_back({vertex_id(t.a), vertex_id(t.b), vertex_id(t.c)});

  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  char line[128];
  for (const Vec3& v : vertices) {
    std::snprintf(line, sizeof(line), "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << line;
  }
  for (const auto& f : faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) throw IoError("error while writing: " + path.string());
}

/// Reads triangles back from a v/f OBJ. Faces with more than three vertices
/// are fan-triangulated; texture/normal references after '/' are ignored.
inline std::vector<Triangle> read_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::vector<Vec3> vertices;
  std::vector<Triangle> tris;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok[0] == '#') continue;
    if (tok == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z()))
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": malformed vertex");
      vertices.push_back(v);
    } else if (tok == "f") {
      std::vector<std::size_t> ids;
      std::string ref;
      while (ls >> ref) {
        const long idx = std::strtol(ref.c_str(), nullptr, 10);
        if (idx <= 0 || static_cast<std::size_t>(idx) > vertices.size())
          throw ParseError(path.string() + ":" + std::to_string(line_no) +
                           ": face index out of range");
        ids.push_back(static_cast<std::size_t>(idx) - 1);
      }
      if (ids.size() < 3)
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": face with fewer than 3 vertices");
      for (std::size_t k = 2; k < ids.size(); ++k)
        tris.push_back({vertices[ids[0]], vertices[ids[k - 1]], vertices[ids[k]]});
    }
    // Other record types are ignored.
  }
  return tris;
}

/// Writes binary little-endian STL.
inline void write_stl(const std::filesystem::path& path,
                      const std::vector<Triangle>& tris) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  char header[80] = {0};
  std::snprintf(header, sizeof(header), "regolith world mesh");
  out.write(header, 80);
  const std::uint32_t count = static_cast<std::uint32_t>(tris.size());
  out.write(reinterpret_cast<const char*>(&count), 4);
  for (const Triangle& t : tris) {
    float record[12];
    const Vec3 n = t.normal();
    const Vec3* vecs[4] = {&n, &t.a, &t.b, &t.c};
    for (int v = 0; v < 4; ++v)
      for (int c = 0; c < 3; ++c)
        record[v * 3 + c] = static_cast<float>((*vecs[v])[c]);
    out.write(reinterpret_cast<const char*>(record), sizeof(record));
    const std::uint16_t attr = 0;
    out.write(reinterpret_cast<const char*>(&attr), 2);
  }
  if (!out) throw IoError("error while writing: " + path.string());
}

inline std::uint32_t stl_triangle_count(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  in.seekg(80);
  std::uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&count), 4);
  if (!in) throw ParseError("truncated STL: " + path.string());
  return count;
}

/// Minimal SDF 1.6 world that includes the exported meshes by relative URI.
inline void write_world_sdf(const std::filesystem::path& path,
                            const std::string& obj_uri,
                            const std::string& stl_uri,
                            const std::string& world_name = "regolith_world") {
  std::ostringstream sdf;
  sdf << "<?xml version=\"1.0\"?>\n"
      << "<sdf version=\"1.6\">\n"
      << "  <world name=\"" << world_name << "\">\n"
      << "    <model name=\"terrain_with_rocks\">\n"
      << "      <static>true</static>\n"
      << "      <link name=\"surface\">\n"
      << "        <visual name=\"visual\">\n"
      << "          <geometry><mesh><uri>" << obj_uri << "</uri></mesh></geometry>\n"
      << "        </visual>\n"
      << "        <collision name=\"collision\">\n"
      << "          <geometry><mesh><uri>" << stl_uri << "</uri></mesh></geometry>\n"
      << "        </collision>\n"
      << "      </link>\n"
      << "    </model>\n"
      << "  </world>\n"
      << "</sdf>\n";
  write_file(path, sdf.str());
}

struct WorldExport {
  std::filesystem::path obj;
  std::filesystem::path stl;
  std::filesystem::path sdf;
};

/// Exports the assembled scene as OBJ + binary STL plus an SDF world file
/// referencing both by relative URI.
inline WorldExport export_world(const Scene& scene,
                                const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  WorldExport files{out_dir / "world.obj", out_dir / "world.stl",
                    out_dir / "world.sdf"};
  write_obj(files.obj, scene.triangles());
  write_stl(files.stl, scene.triangles());
  write_world_sdf(files.sdf, "world.obj", "world.stl");
  return files;
}

}  // namespace regolith
