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

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "regolith/errors.hpp"

namespace regolith {

/// Raster grid of elevations. Grid index (i, j) sits at world
/// (origin_x + i*cell_size, origin_y + j*cell_size); elevations are stored
/// row-major with stride `width`.
struct Heightfield {
  int width = 0;
  int height = 0;
  double cell_size = 1.0;
  double origin_x = 0.0;
  double origin_y = 0.0;
  std::vector<double> elevations;

  double at(int i, int j) const { return elevations[static_cast<std::size_t>(j) * width + i]; }
  double& at(int i, int j) { return elevations[static_cast<std::size_t>(j) * width + i]; }

  double extent_x() const { return (width - 1) * cell_size; }
  double extent_y() const { return (height - 1) * cell_size; }
  double area() const { return extent_x() * extent_y(); }

  bool contains(double x, double y) const {
    return x >= origin_x && x <= origin_x + extent_x() && y >= origin_y &&
           y <= origin_y + extent_y();
  }

  /// Bilinear elevation at a world XY position, clamped to the grid border.
  double sample(double x, double y) const {
    const double gx = std::clamp((x - origin_x) / cell_size, 0.0, double(width - 1));
    const double gy = std::clamp((y - origin_y) / cell_size, 0.0, double(height - 1));
    const int i0 = std::min(static_cast<int>(gx), width - 2);
    const int j0 = std::min(static_cast<int>(gy), height - 2);
    const double fx = gx - i0;
    const double fy = gy - j0;
    const double z00 = at(i0, j0), z10 = at(i0 + 1, j0);
    const double z01 = at(i0, j0 + 1), z11 = at(i0 + 1, j0 + 1);
    return z00 * (1 - fx) * (1 - fy) + z10 * fx * (1 - fy) +
           z01 * (1 - fx) * fy + z11 * fx * fy;
  }

  void validate() const {
    if (width < 2 || height < 2)
      throw ValidationError("heightfield must be at least 2x2 cells");
    if (!(cell_size > 0.0))
      throw ValidationError("heightfield cell_size must be > 0");
    if (elevations.size() != static_cast<std::size_t>(width) * height)
      throw ValidationError("heightfield elevation count does not match dimensions");
    for (double z : elevations)
      if (!std::isfinite(z))
        throw ValidationError("heightfield contains non-finite elevation");
  }
};

namespace detail {

struct PngDeleter {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

inline Heightfield load_heightfield_png(const std::string& path,
                                        double cell_size, double z_scale) {
  std::unique_ptr<std::FILE, PngDeleter> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open raster: " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialization failed");
  }

  std::vector<png_bytep> row_ptrs;
  std::vector<unsigned char> raster;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("not a readable PNG file: " + path);
  }

  png_init_io(png, file.get());
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);

  if (color != PNG_COLOR_TYPE_GRAY || (depth != 8 && depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("unsupported raster format (need 8- or 16-bit grayscale PNG): " +
                     path);
  }
  if (depth == 16) png_set_swap(png);  // file is big-endian
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const std::size_t row_bytes = static_cast<std::size_t>(w) * (depth / 8);
  raster.resize(row_bytes * h);
  row_ptrs.resize(h);
  for (png_uint_32 r = 0; r < h; ++r) row_ptrs[r] = raster.data() + r * row_bytes;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Heightfield hf;
  hf.width = static_cast<int>(w);
  hf.height = static_cast<int>(h);
  hf.cell_size = cell_size;
  hf.elevations.resize(static_cast<std::size_t>(w) * h);
  const double norm = depth == 8 ? 255.0 : 65535.0;
  for (png_uint_32 j = 0; j < h; ++j) {
    for (png_uint_32 i = 0; i < w; ++i) {
      double value;
      if (depth == 8) {
        value = raster[j * row_bytes + i];
      } else {
        std::uint16_t v16;
        std::memcpy(&v16, &raster[j * row_bytes + 2 * i], 2);
        value = v16;
      }
      hf.elevations[static_cast<std::size_t>(j) * w + i] = value / norm * z_scale;
    }
  }
  return hf;
}

inline Heightfield load_heightfield_ascii(const std::string& path,
                                          double cell_size, double z_scale) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open raster: " + path);

  int ncols = -1, nrows = -1;
  double xll = 0.0, yll = 0.0;
  std::string line;
  int line_no = 0;
  std::streampos data_start = in.tellg();

  // Header: "key value" lines until the first line that starts numerically.
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) {
      data_start = in.tellg();
      continue;  // blank line
    }
    if (std::isdigit(static_cast<unsigned char>(key[0])) || key[0] == '-' ||
        key[0] == '+' || key[0] == '.')
      break;  // first data row
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    double value;
    if (!(ls >> value))
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": header line without numeric value");
    if (key == "ncols") ncols = static_cast<int>(value);
    else if (key == "nrows") nrows = static_cast<int>(value);
    else if (key == "xllcorner") xll = value;
    else if (key == "yllcorner") yll = value;
    else if (key == "cellsize" || key == "nodata_value") { /* informational */ }
    else
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": unknown header key '" + key + "'");
    data_start = in.tellg();
  }
  if (ncols < 2 || nrows < 2)
    throw ParseError(path + ": missing or invalid ncols/nrows header");

  in.clear();
  in.seekg(data_start);

  Heightfield hf;
  hf.width = ncols;
  hf.height = nrows;
  hf.cell_size = cell_size;
  hf.origin_x = xll;
  hf.origin_y = yll;
  hf.elevations.resize(static_cast<std::size_t>(ncols) * nrows);
  for (std::size_t k = 0; k < hf.elevations.size(); ++k) {
    double v;
    if (!(in >> v))
      throw ParseError(path + ": expected " + std::to_string(hf.elevations.size()) +
                       " elevation values, got " + std::to_string(k));
    hf.elevations[k] = v * z_scale;
  }
  return hf;
}

}  // namespace detail

/// Loads a DTM raster into a heightfield. PNG values are normalized by the
/// bit-depth maximum and scaled to [0, z_scale]; ASCII-grid values are scaled
/// by z_scale directly. The cell_size argument always wins over any cellsize
/// header in the file.
inline Heightfield load_heightfield(const std::string& path, double cell_size,
                                    double z_scale) {
  if (!(cell_size > 0.0)) throw ValidationError("cell_size must be > 0");
  if (!std::isfinite(z_scale)) throw ValidationError("z_scale must be finite");

  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open raster: " + path);
  unsigned char sig[8] = {0};
  probe.read(reinterpret_cast<char*>(sig), 8);
  probe.close();

  static const unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  Heightfield hf = std::memcmp(sig, kPngSig, 8) == 0
                       ? detail::load_heightfield_png(path, cell_size, z_scale)
                       : detail::load_heightfield_ascii(path, cell_size, z_scale);
  hf.validate();
  return hf;
}

}  // namespace regolith
