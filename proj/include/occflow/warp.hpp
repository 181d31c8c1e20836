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
// Recursive backward-flow warping of occupancy together with agent-id
// propagation.  Warping pulls: the value of destination cell (x, y) is the
// bilinear sample of the previous grid at (x, y) + flow(x, y), so each
// destination is computed independently of all others.

#pragma once

#include <cstdint>
#include <vector>

#include "occflow/grid.hpp"

namespace occflow {

// Warped mass below this floor drops its agent id.
inline constexpr double kIdMassFloor = 1e-6;

// Occupancy mass moved along flow fields, with the id of the agent that the
// mass came from.  ids(x,y) is 0 exactly where values fall below
// kIdMassFloor, and nonzero otherwise.
struct WarpedOccupancy {
  OccupancyGrid values;
  IdGrid ids;
};

// One warp application.  Per destination cell: value is the bilinear sample
// of prev.values at (x, y) + flow(x, y) clamped into [0, 1]; the id comes
// from the source corner with the largest weight*value contribution, falling
// back to the best corner with a nonzero id when the top corner has none.
// Out-of-bounds corners contribute zero.  Deterministic for any `threads`.
// Throws std::invalid_argument on spec mismatch.
WarpedOccupancy WarpOnce(const WarpedOccupancy& prev, const FlowField& flow,
                         int threads = 1);

// The warp recursion: result[t-1] holds the occupancy mass after applying
// flows[0..t-1] in order, starting from `current`.  Work is linear in
// h * w * flows.size().  Throws std::invalid_argument when the flow count
// does not equal spec.num_waypoints or specs mismatch.
std::vector<WarpedOccupancy> TraceFlow(const OccupancyGrid& current,
                                       const IdGrid& current_ids,
                                       const std::vector<FlowField>& flows,
                                       int threads = 1);

// Reads the agent id the trace transported into `cell` at waypoint t
// (1-based).  Throws std::out_of_range on a bad index.
uint32_t RecoverId(const std::vector<WarpedOccupancy>& trace, int t, int x,
                   int y);

}  // namespace occflow
