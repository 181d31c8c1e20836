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
#include "occflow/labels.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace occflow {
namespace {

const std::array<std::string, 3> kModeNames = {"all", "regular",
                                               "speculative"};

std::vector<const AgentTrack*> ClassTracks(const Scenario& scenario,
                                           AgentClass cls) {
  std::vector<const AgentTrack*> out;
  for (const AgentTrack& track : scenario.tracks) {
    if (track.agent_class == cls) out.push_back(&track);
  }
  return out;
}

}  // namespace

const std::string& LabelModeName(LabelMode mode) {
  return kModeNames[static_cast<int>(mode)];
}

LabelMode ParseLabelMode(const std::string& name) {
  for (int i = 0; i < 3; ++i) {
    if (kModeNames[i] == name) return static_cast<LabelMode>(i);
  }
  throw std::invalid_argument("unknown label mode: " + name);
}

AgentPartition PartitionAgents(const Scenario& scenario, AgentClass cls) {
  AgentPartition out;
  for (const AgentTrack* track : ClassTracks(scenario, cls)) {
    // Tracks may cover more steps than the grid window; "observed" means
    // valid at any covered step <= 0.
    bool past = false, future = false;
    for (int t = track->first_step; t <= 0; ++t) {
      if (track->ValidAt(t)) past = true;
    }
    for (int t = std::max(1, track->first_step); t <= track->LastStep(); ++t) {
      if (track->ValidAt(t)) future = true;
    }
    if (past) {
      out.regular.push_back(track->agent_id);
    } else if (future) {
      out.speculative.push_back(track->agent_id);
    }
  }
  std::sort(out.regular.begin(), out.regular.end());
  std::sort(out.speculative.begin(), out.speculative.end());
  return out;
}

RenderedOccupancy RenderOccupancy(const std::vector<const AgentTrack*>& agents,
                                  const GridSpec& spec, int step) {
  RenderedOccupancy out{OccupancyGrid(spec), IdGrid(spec)};
  for (const AgentTrack* track : agents) {
    if (!track->ValidAt(step)) continue;
    const OrientedBox box = BoxForState(track->StateAt(step));
    for (const auto& [x, y] : OverlappedCells(box, spec)) {
      out.occupancy.at(x, y) = 1.0;
      uint32_t& id = out.ids.at(x, y);
      if (id == 0 || track->agent_id < id) id = track->agent_id;
    }
  }
  return out;
}

RenderedOccupancy RenderOccupancy(const Scenario& scenario, int step,
                                  AgentClass cls) {
  if (step < scenario.FirstStep() || step > scenario.LastStep()) {
    throw std::out_of_range("timestep outside the scenario range");
  }
  return RenderOccupancy(ClassTracks(scenario, cls), scenario.spec, step);
}

FlowField RenderFlowBetween(const std::vector<const AgentTrack*>& agents,
                            const GridSpec& spec, int to_step, int from_step) {
  const RenderedOccupancy frame = RenderOccupancy(agents, spec, to_step);
  FlowField flow(spec);
  for (const AgentTrack* track : agents) {
    if (!track->ValidAt(to_step) || !track->ValidAt(from_step)) continue;
    const RigidMotion back = RigidTransformBetween(track->StateAt(from_step),
                                                   track->StateAt(to_step));
    for (int y = 0; y < spec.height_cells; ++y) {
      for (int x = 0; x < spec.width_cells; ++x) {
        if (frame.ids.at(x, y) != track->agent_id) continue;
        const Vec2 c = spec.CellCenterWorld(x, y);
        flow.set(x, y, (back.Apply(c) - c) / spec.cell_size);
      }
    }
  }
  return flow;
}

FlowField RenderBackwardFlow(const Scenario& scenario, int step,
                             AgentClass cls) {
  if (step < scenario.FirstStep() + 1 || step > scenario.LastStep()) {
    throw std::out_of_range("timestep outside the scenario range");
  }
  return RenderFlowBetween(ClassTracks(scenario, cls), scenario.spec, step,
                           step - 1);
}

std::vector<LabeledFrame> AggregateWaypoints(
    const std::vector<const AgentTrack*>& agents, const GridSpec& spec,
    const std::vector<RenderedOccupancy>& step_frames) {
  const int factor = spec.aggregation_factor;
  const int expected = spec.num_waypoints * factor + 1;
  if (static_cast<int>(step_frames.size()) != expected) {
    throw std::invalid_argument("step frame count does not match the spec");
  }
  std::map<uint32_t, const AgentTrack*> by_id;
  for (const AgentTrack* track : agents) by_id[track->agent_id] = track;

  std::vector<LabeledFrame> out;
  out.reserve(spec.num_waypoints);
  for (int w = 1; w <= spec.num_waypoints; ++w) {
    const int end = w * factor;
    const int before = (w - 1) * factor;
    LabeledFrame frame;
    frame.occupancy = step_frames[end].occupancy;
    frame.ids = step_frames[end].ids;
    for (int s = before + 1; s < end; ++s) {
      const OccupancyGrid& member = step_frames[s].occupancy;
      for (size_t i = 0; i < frame.occupancy.values().size(); ++i) {
        frame.occupancy.values()[i] =
            std::max(frame.occupancy.values()[i], member.values()[i]);
      }
    }
    frame.flow = FlowField(spec);
    for (int y = 0; y < spec.height_cells; ++y) {
      for (int x = 0; x < spec.width_cells; ++x) {
        const uint32_t id = frame.ids.at(x, y);
        if (id == 0) continue;
        const AgentTrack* track = by_id.at(id);
        if (!track->ValidAt(before)) continue;
        const RigidMotion back = RigidTransformBetween(track->StateAt(before),
                                                       track->StateAt(end));
        const Vec2 c = spec.CellCenterWorld(x, y);
        frame.flow.set(x, y, (back.Apply(c) - c) / spec.cell_size);
      }
    }
    out.push_back(std::move(frame));
  }
  return out;
}

LabelSet BuildLabels(const Scenario& scenario, AgentClass cls,
                     LabelMode mode) {
  const GridSpec& spec = scenario.spec;
  const AgentPartition part = PartitionAgents(scenario, cls);
  const std::vector<uint32_t>& keep =
      mode == LabelMode::kRegular ? part.regular : part.speculative;
  std::vector<const AgentTrack*> selected;
  for (const AgentTrack* track : ClassTracks(scenario, cls)) {
    if (mode == LabelMode::kAll ||
        std::binary_search(keep.begin(), keep.end(), track->agent_id)) {
      selected.push_back(track);
    }
  }

  LabelSet set;
  set.spec = spec;
  set.agent_class = cls;
  set.mode = mode;

  std::vector<RenderedOccupancy> steps;
  steps.reserve(spec.FutureSteps() + 1);
  for (int s = 0; s <= spec.FutureSteps(); ++s) {
    steps.push_back(RenderOccupancy(selected, spec, s));
  }
  set.current.occupancy = steps[0].occupancy;
  set.current.ids = steps[0].ids;
  set.current.flow =
      scenario.FirstStep() <= -1
          ? RenderFlowBetween(selected, spec, 0, -1)
          : FlowField(spec);
  set.waypoints = AggregateWaypoints(selected, spec, steps);
  return set;
}

std::array<LabelSet, kNumAgentClasses> BuildAllLabels(const Scenario& scenario,
                                                      LabelMode mode) {
  return {BuildLabels(scenario, AgentClass::kVehicle, mode),
          BuildLabels(scenario, AgentClass::kPedestrian, mode)};
}

}  // namespace occflow
