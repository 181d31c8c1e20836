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
// Agent tracks, rigid box motion and synthetic scenario generation.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "occflow/grid.hpp"

namespace occflow {

enum class AgentClass : int { kVehicle = 0, kPedestrian = 1 };
inline constexpr int kNumAgentClasses = 2;

// "vehicle" / "pedestrian"; parsing throws std::invalid_argument on others.
const std::string& AgentClassName(AgentClass cls);
AgentClass ParseAgentClass(const std::string& name);

struct AgentState {
  Vec2 center;             // meters
  double heading = 0.0;    // radians in (-pi, pi], along the box length axis
  double width = 0.0;      // meters, > 0 when valid
  double length = 0.0;     // meters, > 0 when valid
  Vec2 velocity;           // m/s
  Vec2 acceleration;       // m/s^2
  bool valid = false;
};

struct AgentTrack {
  uint32_t agent_id = 0;  // positive; 0 is reserved for "no agent"
  AgentClass agent_class = AgentClass::kVehicle;
  int first_step = 0;  // dataset timestep of states.front()
  std::vector<AgentState> states;

  int LastStep() const {
    return first_step + static_cast<int>(states.size()) - 1;
  }
  bool CoversStep(int t) const { return t >= first_step && t <= LastStep(); }
  const AgentState& StateAt(int t) const { return states[t - first_step]; }
  bool ValidAt(int t) const { return CoversStep(t) && StateAt(t).valid; }
};

// Map features are carried through serialization but never consumed.
struct RoadPoint {
  Vec2 position;
  std::string type;
};
struct TrafficLight {
  int t = 0;
  Vec2 position;
  std::string state;
};

struct Scenario {
  GridSpec spec;
  double step_duration = 0.1;  // seconds per dataset timestep
  std::vector<AgentTrack> tracks;
  std::vector<RoadPoint> road_points;
  std::vector<TrafficLight> traffic_lights;

  int FirstStep() const { return spec.FirstStep(); }
  int LastStep() const { return spec.FutureSteps(); }
  // Checks the spec, that every track covers [FirstStep, LastStep], that ids
  // are positive and unique, and that valid states have positive extents.
  void Validate() const;
};

// Normalizes an angle into (-pi, pi].
double NormalizeAngle(double a);

// Rigid motion represented as a rotation about `pivot` followed by a
// translation of the pivot: p -> R(rotation) * (p - pivot) + pivot +
// translation.
struct RigidMotion {
  double rotation = 0.0;  // radians
  Vec2 translation;       // meters
  Vec2 pivot;             // meters

  Vec2 Apply(Vec2 p) const {
    return (p - pivot).Rotated(rotation) + pivot + translation;
  }
  static RigidMotion Identity() { return {}; }
};

// Equivalent of applying `inner` first and `outer` second.
RigidMotion Compose(const RigidMotion& outer, const RigidMotion& inner);

// Motion that maps the box pose of `b` onto the box pose of `a`: rotation is
// the heading change, translation the center displacement, pivot b's center.
// Extent changes between the states are ignored.  Throws
// std::invalid_argument("state not observed") when either state is invalid.
RigidMotion RigidTransformBetween(const AgentState& a, const AgentState& b);

struct OrientedBox {
  Vec2 center;
  double heading = 0.0;
  double half_width = 0.0;
  double half_length = 0.0;

  // Counter-clockwise corners; the heading points along the length axis.
  std::array<Vec2, 4> Corners() const;
};

OrientedBox BoxForState(const AgentState& state);

// True when the box and the cell's world square intersect with positive area.
// Computed by exact convex polygon clipping; a shared edge or corner touch
// does not count as overlap.
bool BoxCellOverlap(const OrientedBox& box, const GridSpec& spec, int cell_x,
                    int cell_y);

// All in-bounds cells overlapping the box, in row-major order.
std::vector<std::pair<int, int>> OverlappedCells(const OrientedBox& box,
                                                 const GridSpec& spec);

// Deterministic splitmix64-based generator, fully pinned across platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}
  uint64_t NextU64();
  double Uniform();  // [0, 1)
  double Uniform(double lo, double hi);
  int UniformInt(int lo, int hi);  // inclusive bounds
  // Index drawn proportionally to the non-negative weights.
  int PickWeighted(std::span<const double> weights);

 private:
  uint64_t state_;
};

struct MotionMix {
  double constant_velocity = 0.5;
  double constant_turn = 0.25;
  double stop_and_go = 0.25;
};

struct SpeedRange {
  double min = 0.0;
  double max = 0.0;
};

struct GeneratorConfig {
  GridSpec spec = {200, 200, 0.2, {-20.0, -20.0}, 10, 5, 3};
  double step_duration = 0.1;
  int num_vehicles = 6;
  int num_pedestrians = 4;
  SpeedRange vehicle_speed = {1.0, 6.0};
  SpeedRange pedestrian_speed = {0.4, 1.6};
  SpeedRange turn_rate = {0.1, 0.4};  // rad/s, vehicles only
  MotionMix motion_mix;
  double margin = 2.0;      // meters kept clear of every grid edge
  double separation = 1.0;  // meters of clearance between agent paths
  bool allow_overlap = false;
  double speculative_fraction = 0.0;  // agents that appear only in the future
  double disappear_fraction = 0.0;    // agents that vanish before step 1
  // When set, speeds snap to multiples of cell_size / step_duration so every
  // per-step displacement is a whole number of cells.
  bool integer_cell_speeds = false;
  int max_placement_attempts = 600;

  void Validate() const;
};

// Deterministic synthetic scene: same seed and config, byte-identical result.
// Agents stay inside the configured margin for every step; paths keep the
// configured separation unless allow_overlap is set.  Headings follow the
// velocity direction.  Throws std::runtime_error when placement is
// infeasible.
Scenario GenerateSyntheticScenario(uint64_t seed, const GeneratorConfig& config);

// JSON serialization of grid specs, scenarios, and generator configs.
std::string SpecToJsonText(const GridSpec& spec);
GridSpec SpecFromJsonText(const std::string& json_text);
std::string ScenarioToJson(const Scenario& scenario);
Scenario ScenarioFromJson(const std::string& json_text);
void SaveScenario(const std::string& path, const Scenario& scenario);
Scenario LoadScenario(const std::string& path);
GeneratorConfig GeneratorConfigFromJson(const std::string& json_text);

}  // namespace occflow
