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

#include "regolith/mesh_io.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "regolith/terrain.hpp"
#include "test_support.hpp"

namespace regolith {
namespace {

using test_support::flat_field;
using test_support::TempDir;

TEST(MeshIo, ObjSharesVerticesOfAQuad) {
  const auto tris = displace_plane(flat_field(2, 2, 1.0));
  ASSERT_EQ(tris.size(), 2u);
  TempDir dir("obj_quad");
  const auto path = dir.path() / "quad.obj";
  write_obj(path, tris);

  std::ifstream in(path);
  std::string line;
  int v_count = 0, f_count = 0;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) ++v_count;
    if (line.rfind("f ", 0) == 0) ++f_count;
  }
  EXPECT_EQ(v_count, 4);  // the shared diagonal is deduplicated
  EXPECT_EQ(f_count, 2);
}

TEST(MeshIo, ObjRoundTripIsNearlyExact) {
  Heightfield hf = flat_field(72, 72, 0.37);
  for (int j = 0; j < hf.height; ++j)
    for (int i = 0; i < hf.width; ++i)
      hf.at(i, j) = 1.7 * std::sin(0.31 * i) * std::cos(0.17 * j) + 0.003 * i * j;
  const auto tris = displace_plane(hf);
  ASSERT_GT(tris.size(), 10000u);

  TempDir dir("obj_roundtrip");
  const auto path = dir.path() / "world.obj";
  write_obj(path, tris);
  const auto back = read_obj(path);
  ASSERT_EQ(back.size(), tris.size());
  double max_dev = 0.0;
  for (std::size_t i = 0; i < tris.size(); ++i) {
    max_dev = std::max(max_dev, (back[i].a - tris[i].a).cwiseAbs().maxCoeff());
    max_dev = std::max(max_dev, (back[i].b - tris[i].b).cwiseAbs().maxCoeff());
    max_dev = std::max(max_dev, (back[i].c - tris[i].c).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(max_dev, 1e-6);
}

TEST(MeshIo, StlTriangleCountMatchesScene) {
  const auto tris = displace_plane(flat_field(9, 7, 1.0));
  TempDir dir("stl_count");
  const auto path = dir.path() / "world.stl";
  write_stl(path, tris);
  EXPECT_EQ(stl_triangle_count(path), tris.size());
}

TEST(MeshIo, ObjParseErrors) {
  TempDir dir("obj_errors");
  const auto bad_face = dir.path() / "bad_face.obj";
  std::ofstream(bad_face) << "v 0 0 0\nv 1 0 0\nf 1 2 5\n";
  EXPECT_THROW(read_obj(bad_face), ParseError);

  const auto bad_vertex = dir.path() / "bad_vertex.obj";
  std::ofstream(bad_vertex) << "v 0 0\n";
  EXPECT_THROW(read_obj(bad_vertex), ParseError);

  EXPECT_THROW(read_obj(dir.path() / "missing.obj"), IoError);
}

TEST(MeshIo, ExportWorldWritesAllThreeFiles) {
  const Scene scene = build_scene(displace_plane(flat_field(5, 5, 1.0)));
  TempDir dir("world_export");
  const WorldExport files = export_world(scene, dir.path() / "world");
  EXPECT_TRUE(std::filesystem::exists(files.obj));
  EXPECT_TRUE(std::filesystem::exists(files.stl));
  EXPECT_TRUE(std::filesystem::exists(files.sdf));
  EXPECT_EQ(stl_triangle_count(files.stl), scene.triangles().size());

  const std::string sdf = read_file(files.sdf);
  EXPECT_NE(sdf.find("<sdf version=\"1.6\">"), std::string::npos);
  EXPECT_NE(sdf.find("<mesh><uri>world.obj</uri></mesh>"), std::string::npos);
  EXPECT_NE(sdf.find("<mesh><uri>world.stl</uri></mesh>"), std::string::npos);

  const auto back = read_obj(files.obj);
  EXPECT_EQ(back.size(), scene.triangles().size());
}

TEST(MeshIo, ExportIsDeterministic) {
  const Scene scene = build_scene(displace_plane(flat_field(6, 6, 0.5)));
  TempDir dir("world_determinism");
  export_world(scene, dir.path() / "a");
  export_world(scene, dir.path() / "b");
  EXPECT_EQ(read_file(dir.path() / "a" / "world.obj"),
            read_file(dir.path() / "b" / "world.obj"));
  EXPECT_EQ(read_file(dir.path() / "a" / "world.stl"),
            read_file(dir.path() / "b" / "world.stl"));
  EXPECT_EQ(read_file(dir.path() / "a" / "world.sdf"),
            read_file(dir.path() / "b" / "world.sdf"));
}

}  // namespace
}  // namespace regolith
