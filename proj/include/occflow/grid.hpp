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
// Dense grid types and the sampling conventions shared by every module.
//
// Conventions, used consistently by all grids, file formats and tools:
//   - Storage is row-major with x = column and y = row: index = y * width + x.
//   - Cell (x, y) covers the world square
//       [origin + x * cell_size, origin + (x + 1) * cell_size)  (same in y),
//     so WorldToGrid is the plain affine map (p - origin) / cell_size and
//     CellCenterWorld applies the half-cell offset.
//   - For sampling, the value stored in cell (x, y) is treated as a point
//     sample at continuous coordinate (x, y).  Flow vectors in cell units are
//     therefore directly usable as sample offsets: the pull source for
//     destination cell (x, y) is (x, y) + flow(x, y).
//   - Out-of-bounds sample corners contribute zero (vacuum boundary).

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace occflow {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  bool operator==(const Vec2&) const = default;

  double Dot(Vec2 o) const { return x * o.x + y * o.y; }
  double Norm() const { return std::hypot(x, y); }
  // Counter-clockwise rotation by `angle` radians.
  Vec2 Rotated(double angle) const {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * x - s * y, s * x + c * y};
  }
};

struct GridSpec {
  int height_cells = 0;
  int width_cells = 0;
  double cell_size = 0.0;  // meters per cell
  Vec2 origin;             // world coordinates of the corner of cell (0, 0)
  int num_waypoints = 0;   // predicted waypoints T
  int input_steps = 0;     // observed steps, covering t in [-(input_steps-1), 0]
  int aggregation_factor = 0;  // dataset steps per waypoint window

  bool operator==(const GridSpec&) const = default;

  int CellCount() const { return height_cells * width_cells; }
  int FutureSteps() const { return num_waypoints * aggregation_factor; }
  int FirstStep() const { return -(input_steps - 1); }

  // Throws std::invalid_argument when any dimension or count is out of range.
  void Validate() const;

  Vec2 WorldToGrid(Vec2 world) const {
    return {(world.x - origin.x) / cell_size, (world.y - origin.y) / cell_size};
  }
  Vec2 GridToWorld(Vec2 grid) const {
    return {origin.x + grid.x * cell_size, origin.y + grid.y * cell_size};
  }
  Vec2 CellCenterWorld(int x, int y) const {
    return GridToWorld({x + 0.5, y + 0.5});
  }
  bool Contains(int x, int y) const {
    return x >= 0 && x < width_cells && y >= 0 && y < height_cells;
  }
};

// Real-valued single-channel grid without a range invariant (e.g. logits).
class ValueGrid {
 public:
  ValueGrid() = default;
  ValueGrid(const GridSpec& spec, double fill = 0.0)
      : spec_(spec), values_(static_cast<size_t>(spec.CellCount()), fill) {}

  const GridSpec& spec() const { return spec_; }
  double at(int x, int y) const { return values_[Index(x, y)]; }
  double& at(int x, int y) { return values_[Index(x, y)]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

 protected:
  size_t Index(int x, int y) const {
    return static_cast<size_t>(y) * spec_.width_cells + x;
  }
  GridSpec spec_;
  std::vector<double> values_;
};

// Occupancy probabilities; every value must stay in [0, 1].
class OccupancyGrid : public ValueGrid {
 public:
  OccupancyGrid() = default;
  explicit OccupancyGrid(const GridSpec& spec, double fill = 0.0)
      : ValueGrid(spec, fill) {}

  // Throws std::invalid_argument when a value leaves [0, 1] or is not finite.
  void ValidateRange() const;
};

// Per-cell 2-D vectors in cell units, stored interleaved as (dx, dy).
class FlowField {
 public:
  FlowField() = default;
  explicit FlowField(const GridSpec& spec)
      : spec_(spec), data_(static_cast<size_t>(spec.CellCount()) * 2, 0.0) {}

  const GridSpec& spec() const { return spec_; }
  Vec2 at(int x, int y) const {
    const size_t i = Index(x, y);
    return {data_[i], data_[i + 1]};
  }
  void set(int x, int y, Vec2 v) {
    const size_t i = Index(x, y);
    data_[i] = v.x;
    data_[i + 1] = v.y;
  }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  // Throws std::invalid_argument when any component is not finite.
  void ValidateFinite() const;

 private:
  size_t Index(int x, int y) const {
    return (static_cast<size_t>(y) * spec_.width_cells + x) * 2;
  }
  GridSpec spec_;
  std::vector<double> data_;
};

// Per-cell agent ids; 0 means empty.
class IdGrid {
 public:
  IdGrid() = default;
  explicit IdGrid(const GridSpec& spec)
      : spec_(spec), ids_(static_cast<size_t>(spec.CellCount()), 0u) {}

  const GridSpec& spec() const { return spec_; }
  uint32_t at(int x, int y) const { return ids_[Index(x, y)]; }
  uint32_t& at(int x, int y) { return ids_[Index(x, y)]; }
  const std::vector<uint32_t>& ids() const { return ids_; }
  std::vector<uint32_t>& ids() { return ids_; }

 private:
  size_t Index(int x, int y) const {
    return static_cast<size_t>(y) * spec_.width_cells + x;
  }
  GridSpec spec_;
  std::vector<uint32_t> ids_;
};

// Bilinear interpolation of the four cells surrounding `p` (sample-space
// coordinates as described above); out-of-bounds corners contribute zero.
// Exact on constant fields and under integer translations.  Throws
// std::invalid_argument on non-finite coordinates.
double BilinearSample(std::span<const double> values, int height, int width,
                      Vec2 p);
double BilinearSample(const OccupancyGrid& grid, Vec2 p);

// Floor-based corner decomposition of a sample point: corner k covers
// (x0 + k % 2, y0 + k / 2) with the matching bilinear weight.  Weights of
// out-of-bounds corners are reported as is; callers skip those cells.
struct BilinearCorners {
  int x0 = 0, y0 = 0;
  double weight[4] = {0, 0, 0, 0};
  bool valid = false;  // false when the whole stencil lies outside the grid
};
BilinearCorners CornersAt(int height, int width, Vec2 p);

// Derivative of BilinearSample with respect to the sample point.  On exact
// lattice lines the left/lower interval's one-sided derivative is used.
Vec2 BilinearPositionGradient(std::span<const double> values, int height,
                              int width, Vec2 p);

}  // namespace occflow
