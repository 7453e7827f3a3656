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

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "regolith/geometry.hpp"
#include "regolith/heightfield.hpp"
#include "regolith/rng.hpp"

namespace regolith {

/// One rock class: how many per square meter and how big.
struct RockPopulation {
  double density = 0.0;          // rocks per m^2
  double diameter_min = 0.1;     // m
  double diameter_max = 0.5;     // m
  double shape_irregularity = 0.4;  // 0 = sphere, 1 = maximally perturbed
  std::uint64_t seed = 0;

  void validate() const {
    if (!(diameter_min > 0.0) || !(diameter_max >= diameter_min))
      throw ValidationError("rock population requires 0 < diameter_min <= diameter_max");
    if (!(density >= 0.0))
      throw ValidationError("rock population density must be >= 0");
    if (!(shape_irregularity >= 0.0 && shape_irregularity <= 1.0))
      throw ValidationError("shape_irregularity must be in [0, 1]");
  }
};

struct RockPlacement {
  int population = 0;
  double diameter = 0.0;
  Vec3 position = Vec3::Zero();  // rock center, embedded below local terrain
  double yaw = 0.0;
};

/// Fraction of a rock's diameter buried below the local terrain surface.
inline constexpr double kRockEmbedFraction = 0.25;

/// Refuse scatter requests above this expected rock count.
inline constexpr double kMaxExpectedRocks = 1e7;

/// Displaces a regular grid plane by the heightfield. Each cell is split
/// along the (i,j)->(i+1,j+1) diagonal into two upward-wound triangles,
/// (width-1) x (height-1) x 2 in total.
inline std::vector<Triangle> displace_plane(const Heightfield& hf) {
  hf.validate();
  std::vector<Triangle> tris;
  tris.reserve(static_cast<std::size_t>(hf.width - 1) * (hf.height - 1) * 2);
  auto vertex = [&](int i, int j) {
    return Vec3(hf.origin_x + i * hf.cell_size, hf.origin_y + j * hf.cell_size,
                hf.at(i, j));
  };
  for (int j = 0; j + 1 < hf.height; ++j) {
    for (int i = 0; i + 1 < hf.width; ++i) {
      const Vec3 v00 = vertex(i, j);
      const Vec3 v10 = vertex(i + 1, j);
      const Vec3 v01 = vertex(i, j + 1);
      const Vec3 v11 = vertex(i + 1, j + 1);
      tris.push_back({v00, v10, v11, kTerrainTag});
      tris.push_back({v00, v11, v01, kTerrainTag});
    }
  }
  return tris;
}

namespace detail {

/// Incremental 3D convex hull. Returns outward-oriented triangle index
/// faces. Inputs are expected in general position (random sphere samples);
/// exactly coplanar inputs raise DegenerateGeometryError.
inline std::vector<std::array<int, 3>> convex_hull(const std::vector<Vec3>& pts) {
  const int n = static_cast<int>(pts.size());
  if (n < 4) throw ValidationError("convex hull needs at least 4 points");

  double scale = 0.0;
  for (const Vec3& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double eps = 1e-12 * std::max(scale, 1.0);

  // Initial tetrahedron from extreme points.
  int i0 = 0;
  for (int i = 1; i < n; ++i)
    if (pts[i].x() < pts[i0].x()) i0 = i;
  int i1 = -1;
  double best = eps;
  for (int i = 0; i < n; ++i) {
    const double d = (pts[i] - pts[i0]).norm();
    if (d > best) { best = d; i1 = i; }
  }
  if (i1 < 0) throw DegenerateGeometryError("hull input points coincide");
  int i2 = -1;
  best = eps;
  const Vec3 dir = (pts[i1] - pts[i0]).normalized();
  for (int i = 0; i < n; ++i) {
    const Vec3 off = pts[i] - pts[i0];
    const double d = (off - off.dot(dir) * dir).norm();
    if (d > best) { best = d; i2 = i; }
  }
  if (i2 < 0) throw DegenerateGeometryError("hull input points are collinear");
  int i3 = -1;
  best = eps;
  const Vec3 face_n = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(face_n.dot(pts[i] - pts[i0]));
    if (d > best) { best = d; i3 = i; }
  }
  if (i3 < 0) throw DegenerateGeometryError("hull input points are coplanar");

  struct Face {
    std::array<int, 3> v;
    Vec3 n;     // outward scaled normal
    bool alive = true;
  };
  std::vector<Face> faces;
  const Vec3 inner = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
  auto add_face = [&](int a, int b, int c) {
    Face f;
    f.v = {a, b, c};
    f.n = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    if (f.n.dot(inner - pts[a]) > 0.0) {  // orient outward
      std::swap(f.v[1], f.v[2]);
      f.n = -f.n;
    }
    faces.push_back(f);
  };
  add_face(i0, i1, i2);
  add_face(i0, i1, i3);
  add_face(i0, i2, i3);
  add_face(i1, i2, i3);

  for (int p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    // Faces that see the point.
    std::vector<int> visible;
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
      if (!faces[f].alive) continue;
      if (faces[f].n.dot(pts[p] - pts[faces[f].v[0]]) > eps) visible.push_back(f);
    }
    if (visible.empty()) continue;  // interior point

    // Horizon: directed edges of visible faces whose reverse is not also on
    // a visible face.
    std::vector<std::array<int, 2>> edges;
    for (int f : visible)
      for (int k = 0; k < 3; ++k)
        edges.push_back({faces[f].v[k], faces[f].v[(k + 1) % 3]});
    std::vector<std::array<int, 2>> horizon;
    for (const auto& e : edges) {
      bool shared = false;
      for (const auto& o : edges)
        if (o[0] == e[1] && o[1] == e[0]) { shared = true; break; }
      if (!shared) horizon.push_back(e);
    }
    for (int f : visible) faces[f].alive = false;
    for (const auto& e : horizon) add_face(e[0], e[1], p);
  }

  std::vector<std::array<int, 3>> out;
  for (const Face& f : faces)
    if (f.alive) out.push_back(f.v);
  return out;
}

}  // namespace detail

/// Number of sphere samples hulled into one rock mesh.
inline constexpr int kRockSamplePoints = 40;

/// Generates one rock as the convex hull of random points on a sphere of
/// radius diameter/2, each radius perturbed by up to +/- irregularity*50%.
/// The mesh is centered at the origin; deterministic in the seed.
inline std::vector<Triangle> generate_rock_mesh(double diameter,
                                                double irregularity,
                                                std::uint64_t seed) {
  if (!(diameter > 0.0)) throw ValidationError("rock diameter must be > 0");
  if (!(irregularity >= 0.0 && irregularity <= 1.0))
    throw ValidationError("rock irregularity must be in [0, 1]");

  Pcg32 rng(seed, /*stream=*/0x726f636bull);  // "rock"
  const double base_radius = diameter / 2.0;
  std::vector<Vec3> pts;
  pts.reserve(kRockSamplePoints);
  for (int k = 0; k < kRockSamplePoints; ++k) {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 dir(s * std::cos(phi), s * std::sin(phi), z);
    const double radius = base_radius * (1.0 + irregularity * (rng.uniform() - 0.5));
    pts.push_back(radius * dir);
  }

  std::vector<Triangle> tris;
  for (const auto& f : detail::convex_hull(pts))
    tris.push_back({pts[f[0]], pts[f[1]], pts[f[2]], kTerrainTag});
  return tris;
}

/// Scatters every population over the heightfield extent. Counts are
/// Poisson(density * area), positions uniform in XY, diameters log-uniform,
/// yaw uniform; each rock is embedded 25% of its diameter below the local
/// terrain height. Deterministic in (populations, global_seed).
inline std::vector<RockPlacement> scatter_rocks(
    const Heightfield& hf, const std::vector<RockPopulation>& populations,
    std::uint64_t global_seed) {
  hf.validate();
  if (populations.empty())
    throw ValidationError("scatter_rocks requires at least one population");

  std::vector<RockPlacement> placements;
  for (std::size_t p = 0; p < populations.size(); ++p) {
    const RockPopulation& pop = populations[p];
    pop.validate();
    const double mean = pop.density * hf.area();
    if (mean > kMaxExpectedRocks)
      throw ValidationError("requested rock count exceeds " +
                            std::to_string(static_cast<long long>(kMaxExpectedRocks)) +
                            " (density * area too large)");
    Pcg32 rng(mix_seed(global_seed, pop.seed, p), /*stream=*/p);
    const std::uint64_t count = rng.poisson(mean);
    for (std::uint64_t k = 0; k < count; ++k) {
      RockPlacement rock;
      rock.population = static_cast<int>(p);
      const double x = hf.origin_x + rng.uniform() * hf.extent_x();
      const double y = hf.origin_y + rng.uniform() * hf.extent_y();
      rock.diameter = rng.log_uniform(pop.diameter_min, pop.diameter_max);
      rock.yaw = rng.uniform(0.0, 2.0 * kPi);
      const double ground = hf.sample(x, y);
      const double center_z = ground + rock.diameter / 2.0 -
                              kRockEmbedFraction * rock.diameter;
      rock.position = Vec3(x, y, center_z);
      placements.push_back(rock);
    }
  }
  return placements;
}

/// Instantiates rock meshes at their placements. Triangle tags carry the
/// placement index; mesh seeds derive from the owning population seed and
/// the placement index, so the world is reproducible from the placement
/// list alone.
inline std::vector<Triangle> instantiate_rocks(
    const std::vector<RockPlacement>& placements,
    const std::vector<RockPopulation>& populations) {
  std::vector<Triangle> tris;
  for (std::size_t r = 0; r < placements.size(); ++r) {
    const RockPlacement& rock = placements[r];
    const RockPopulation& pop = populations.at(rock.population);
    const std::uint64_t mesh_seed = mix_seed(pop.seed, r);
    const Mat3 yaw_rot =
        Eigen::AngleAxisd(rock.yaw, Vec3::UnitZ()).toRotationMatrix();
    for (Triangle t : generate_rock_mesh(rock.diameter, pop.shape_irregularity,
                                         mesh_seed)) {
      t.a = yaw_rot * t.a + rock.position;
      t.b = yaw_rot * t.b + rock.position;
      t.c = yaw_rot * t.c + rock.position;
      t.tag = static_cast<std::int32_t>(r);
      tris.push_back(t);
    }
  }
  return tris;
}

}  // namespace regolith
