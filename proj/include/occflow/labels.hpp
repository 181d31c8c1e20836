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
// Ground-truth rendering: occupancy grids, backward-flow fields and agent-id
// rasters from tracks, plus the timestep-to-waypoint aggregation.

#pragma once

#include <array>
#include <string>
#include <vector>

#include "occflow/scene.hpp"

namespace occflow {

// One rendered timestep or aggregated waypoint of ground truth.
//
// For frames rendered at a single timestep, ids(x,y) != 0 exactly where
// occupancy(x,y) = 1.  For aggregated waypoints, occupancy is the window
// union while ids and flow describe the window-end frame, so cells occupied
// only mid-window carry occupancy 1 with id 0 and zero flow.
struct LabeledFrame {
  OccupancyGrid occupancy;
  FlowField flow;
  IdGrid ids;
};

// Which agents a label set describes.  Regular agents were observed at some
// step t <= 0; speculative agents appear for the first time at a future step.
// The two sets are disjoint and together cover every future-valid agent.
enum class LabelMode : int { kAll = 0, kRegular = 1, kSpeculative = 2 };

// "all" / "regular" / "speculative"; parsing throws std::invalid_argument.
const std::string& LabelModeName(LabelMode mode);
LabelMode ParseLabelMode(const std::string& name);

struct AgentPartition {
  std::vector<uint32_t> regular;      // sorted ids
  std::vector<uint32_t> speculative;  // sorted ids
};

// Splits one class's future-valid agents into regular and speculative sets.
AgentPartition PartitionAgents(const Scenario& scenario, AgentClass cls);

struct LabelSet {
  GridSpec spec;
  AgentClass agent_class = AgentClass::kVehicle;
  LabelMode mode = LabelMode::kAll;
  LabeledFrame current;                 // timestep 0
  std::vector<LabeledFrame> waypoints;  // waypoints 1..num_waypoints
};

struct RenderedOccupancy {
  OccupancyGrid occupancy;  // binary: 1 where any selected box overlaps
  IdGrid ids;               // owning agent per cell; smallest id wins ties
};

// Renders the selected tracks at one dataset timestep.  Only states that are
// valid at that step contribute.
RenderedOccupancy RenderOccupancy(const std::vector<const AgentTrack*>& agents,
                                  const GridSpec& spec, int step);
// All valid agents of the class; throws std::out_of_range when the step is
// outside the scenario range.
RenderedOccupancy RenderOccupancy(const Scenario& scenario, int step,
                                  AgentClass cls);

// Backward displacement field at `to_step`: each cell owned by an agent gets
// (position of the same box point at from_step - position at to_step) in
// cell units; cells whose owner is invalid at from_step get zero flow.
FlowField RenderFlowBetween(const std::vector<const AgentTrack*>& agents,
                            const GridSpec& spec, int to_step, int from_step);
// One-step backward flow (from_step = step - 1) over all valid class agents.
FlowField RenderBackwardFlow(const Scenario& scenario, int step,
                             AgentClass cls);

// Collapses per-step frames into waypoint frames.  `step_frames[s]` must hold
// the rendering of dataset timestep s for s = 0..num_waypoints*factor.
// Waypoint occupancy is the element-wise max over the window, ids come from
// the window-end frame, and flow spans the whole window (window start - 1 to
// window end) evaluated at window-end cells.  Throws std::invalid_argument
// on count mismatches.
std::vector<LabeledFrame> AggregateWaypoints(
    const std::vector<const AgentTrack*>& agents, const GridSpec& spec,
    const std::vector<RenderedOccupancy>& step_frames);

// Full per-class label set for the scenario.
LabelSet BuildLabels(const Scenario& scenario, AgentClass cls, LabelMode mode);
std::array<LabelSet, kNumAgentClasses> BuildAllLabels(const Scenario& scenario,
                                                      LabelMode mode);

}  // namespace occflow
