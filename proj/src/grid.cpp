/* Copyright 2026 The Occflow Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "occflow/grid.hpp"

#include <string>

namespace occflow {
namespace {

// a + t * (b - a): returns `a` exactly at t = 0, which keeps zero-flow warps
// byte-identical to their input.
inline double Lerp(double a, double b, double t) { return a + t * (b - a); }

inline double CellOrZero(std::span<const double> values, int height, int width,
                         int x, int y) {
  if (x < 0 || x >= width || y < 0 || y >= height) return 0.0;
  return values[static_cast<size_t>(y) * width + x];
}

inline void CheckFinite(Vec2 p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw std::invalid_argument("invalid sample coordinate");
  }
}

}  // namespace

void GridSpec::Validate() const {
  if (height_cells < 1 || width_cells < 1) {
    throw std::invalid_argument("grid dimensions must be at least 1x1");
  }
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw std::invalid_argument("cell_size must be positive and finite");
  }
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y)) {
    throw std::invalid_argument("origin must be finite");
  }
  if (num_waypoints < 1) {
    throw std::invalid_argument("num_waypoints must be at least 1");
  }
  if (input_steps < 1) {
    throw std::invalid_argument("input_steps must be at least 1");
  }
  if (aggregation_factor < 1) {
    throw std::invalid_argument("aggregation_factor must be at least 1");
  }
}

void OccupancyGrid::ValidateRange() const {
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("occupancy value out of range [0, 1]: " +
                                  std::to_string(v));
    }
  }
}

void FlowField::ValidateFinite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("flow component is not finite");
    }
  }
}

double BilinearSample(std::span<const double> values, int height, int width,
                      Vec2 p) {
  CheckFinite(p);
  // At or beyond one cell outside the lattice every corner weight-value
  // product is zero.  The early return also keeps the int casts in range.
  if (p.x <= -1.0 || p.y <= -1.0 || p.x >= width || p.y >= height) return 0.0;
  const double fx0 = std::floor(p.x), fy0 = std::floor(p.y);
  const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
  const double fx = p.x - fx0, fy = p.y - fy0;
  const double v00 = CellOrZero(values, height, width, x0, y0);
  const double v10 = CellOrZero(values, height, width, x0 + 1, y0);
  const double v01 = CellOrZero(values, height, width, x0, y0 + 1);
  const double v11 = CellOrZero(values, height, width, x0 + 1, y0 + 1);
  return Lerp(Lerp(v00, v10, fx), Lerp(v01, v11, fx), fy);
}

double BilinearSample(const OccupancyGrid& grid, Vec2 p) {
  return BilinearSample(grid.values(), grid.spec().height_cells,
                        grid.spec().width_cells, p);
}

BilinearCorners CornersAt(int height, int width, Vec2 p) {
  CheckFinite(p);
  BilinearCorners c;
  if (p.x <= -1.0 || p.y <= -1.0 || p.x >= width || p.y >= height) return c;
  const double fx0 = std::floor(p.x), fy0 = std::floor(p.y);
  c.x0 = static_cast<int>(fx0);
  c.y0 = static_cast<int>(fy0);
  const double fx = p.x - fx0, fy = p.y - fy0;
  c.weight[0] = (1.0 - fx) * (1.0 - fy);
  c.weight[1] = fx * (1.0 - fy);
  c.weight[2] = (1.0 - fx) * fy;
  c.weight[3] = fx * fy;
  c.valid = true;
  return c;
}

Vec2 BilinearPositionGradient(std::span<const double> values, int height,
                              int width, Vec2 p) {
  CheckFinite(p);
  // The left/lower convention keeps the stencil base at ceil - 1, so an exact
  // lattice coordinate differentiates the interval it terminates.
  if (p.x <= -1.0 || p.y <= -1.0 || p.x > width || p.y > height) return {};
  const double fx0 = std::ceil(p.x) - 1.0, fy0 = std::ceil(p.y) - 1.0;
  const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
  const double fx = p.x - fx0, fy = p.y - fy0;
  const double v00 = CellOrZero(values, height, width, x0, y0);
  const double v10 = CellOrZero(values, height, width, x0 + 1, y0);
  const double v01 = CellOrZero(values, height, width, x0, y0 + 1);
  const double v11 = CellOrZero(values, height, width, x0 + 1, y0 + 1);
  return {(1.0 - fy) * (v10 - v00) + fy * (v11 - v01),
          (1.0 - fx) * (v01 - v00) + fx * (v11 - v10)};
}

}  // namespace occflow
