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
#include "occflow/warp.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace occflow {
namespace {

void WarpRows(const WarpedOccupancy& prev, const FlowField& flow,
              WarpedOccupancy& out, int y_begin, int y_end) {
  const GridSpec& spec = prev.values.spec();
  const int h = spec.height_cells, w = spec.width_cells;
  for (int y = y_begin; y < y_end; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec2 f = flow.at(x, y);
      const Vec2 p{x + f.x, y + f.y};
      const double value =
          std::clamp(BilinearSample(prev.values, p), 0.0, 1.0);
      out.values.at(x, y) = value;
      if (value < kIdMassFloor) continue;  // ids stay 0 under the mass floor
      const BilinearCorners c = CornersAt(h, w, p);
      double best_any = -1.0, best_id_contrib = -1.0;
      uint32_t best_any_id = 0, best_id = 0;
      if (c.valid) {
        for (int k = 0; k < 4; ++k) {
          const int cx = c.x0 + (k & 1), cy = c.y0 + (k >> 1);
          if (cx < 0 || cx >= w || cy < 0 || cy >= h) continue;
          const double contrib = c.weight[k] * prev.values.at(cx, cy);
          if (contrib > best_any) {
            best_any = contrib;
            best_any_id = prev.ids.at(cx, cy);
          }
          const uint32_t id = prev.ids.at(cx, cy);
          if (id != 0 && contrib > best_id_contrib) {
            best_id_contrib = contrib;
            best_id = id;
          }
        }
      }
      // The top corner may carry no id (its mass fell under the floor at an
      // earlier step); fall back to the best corner that still has one.
      out.ids.at(x, y) = best_any_id != 0 ? best_any_id : best_id;
    }
  }
}

}  // namespace

WarpedOccupancy WarpOnce(const WarpedOccupancy& prev, const FlowField& flow,
                         int threads) {
  const GridSpec& spec = prev.values.spec();
  if (!(flow.spec() == spec) || !(prev.ids.spec() == spec)) {
    throw std::invalid_argument("spec mismatch between flow and occupancy");
  }
  WarpedOccupancy out{OccupancyGrid(spec), IdGrid(spec)};
  const int h = spec.height_cells;
  threads = std::clamp(threads, 1, h);
  if (threads == 1) {
    WarpRows(prev, flow, out, 0, h);
    return out;
  }
  // Each worker owns a contiguous row block; destinations never contend, so
  // the result is byte-identical for every thread count.
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int i = 0; i < threads; ++i) {
    const int y0 = static_cast<int>(static_cast<long>(h) * i / threads);
    const int y1 = static_cast<int>(static_cast<long>(h) * (i + 1) / threads);
    pool.emplace_back(WarpRows, std::cref(prev), std::cref(flow),
                      std::ref(out), y0, y1);
  }
  for (std::thread& t : pool) t.join();
  return out;
}

std::vector<WarpedOccupancy> TraceFlow(const OccupancyGrid& current,
                                       const IdGrid& current_ids,
                                       const std::vector<FlowField>& flows,
                                       int threads) {
  const GridSpec& spec = current.spec();
  if (static_cast<int>(flows.size()) != spec.num_waypoints) {
    throw std::invalid_argument("flow count does not match num_waypoints");
  }
  std::vector<WarpedOccupancy> trace;
  trace.reserve(flows.size());
  WarpedOccupancy state{current, current_ids};
  for (const FlowField& flow : flows) {
    state = WarpOnce(state, flow, threads);
    trace.push_back(state);
  }
  return trace;
}

uint32_t RecoverId(const std::vector<WarpedOccupancy>& trace, int t, int x,
                   int y) {
  if (t < 1 || t > static_cast<int>(trace.size())) {
    throw std::out_of_range("waypoint index outside the trace");
  }
  const WarpedOccupancy& frame = trace[t - 1];
  if (!frame.values.spec().Contains(x, y)) {
    throw std::out_of_range("cell outside the grid");
  }
  return frame.ids.at(x, y);
}

}  // namespace occflow
