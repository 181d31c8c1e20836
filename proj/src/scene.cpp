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
#include "occflow/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace occflow {
namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;
// Intersections smaller than this fraction of a cell's area do not count as
// overlap, so edge and corner touches stay out of the occupied set.
constexpr double kAreaEpsilonFraction = 1e-9;

const std::array<std::string, kNumAgentClasses> kClassNames = {"vehicle",
                                                               "pedestrian"};

// Clips a convex polygon against the half-plane where
// normal.Dot(p) <= bound, appending intersection points on crossings.
std::vector<Vec2> ClipHalfPlane(const std::vector<Vec2>& poly, Vec2 normal,
                                double bound) {
  std::vector<Vec2> out;
  out.reserve(poly.size() + 2);
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    const double da = normal.Dot(a) - bound;
    const double db = normal.Dot(b) - bound;
    const bool ina = da <= 0.0, inb = db <= 0.0;
    if (ina) out.push_back(a);
    if (ina != inb) {
      const double t = da / (da - db);
      out.push_back(a + (b - a) * t);
    }
  }
  return out;
}

double PolygonArea(const std::vector<Vec2>& poly) {
  double twice = 0.0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return std::abs(twice) * 0.5;
}

}  // namespace

const std::string& AgentClassName(AgentClass cls) {
  return kClassNames[static_cast<int>(cls)];
}

AgentClass ParseAgentClass(const std::string& name) {
  for (int i = 0; i < kNumAgentClasses; ++i) {
    if (kClassNames[i] == name) return static_cast<AgentClass>(i);
  }
  throw std::invalid_argument("unknown agent class: " + name);
}

void Scenario::Validate() const {
  spec.Validate();
  if (!(step_duration > 0.0) || !std::isfinite(step_duration)) {
    throw std::invalid_argument("step_duration must be positive and finite");
  }
  std::set<uint32_t> seen;
  for (const AgentTrack& track : tracks) {
    if (track.agent_id == 0) {
      throw std::invalid_argument("agent id 0 is reserved");
    }
    if (!seen.insert(track.agent_id).second) {
      throw std::invalid_argument("duplicate agent id " +
                                  std::to_string(track.agent_id));
    }
    // Every track must cover the observation window and all future steps;
    // all tracks share one range, which may extend beyond the spec's.
    if (track.first_step > FirstStep() || track.LastStep() < LastStep() ||
        track.first_step != tracks.front().first_step ||
        track.LastStep() != tracks.front().LastStep()) {
      throw std::invalid_argument(
          "track timestep range does not cover the scenario range");
    }
    for (const AgentState& s : track.states) {
      if (!s.valid) continue;
      const bool finite =
          std::isfinite(s.center.x) && std::isfinite(s.center.y) &&
          std::isfinite(s.heading) && std::isfinite(s.width) &&
          std::isfinite(s.length) && std::isfinite(s.velocity.x) &&
          std::isfinite(s.velocity.y) && std::isfinite(s.acceleration.x) &&
          std::isfinite(s.acceleration.y);
      if (!finite) throw std::invalid_argument("agent state is not finite");
      if (!(s.width > 0.0) || !(s.length > 0.0)) {
        throw std::invalid_argument("valid state must have positive extents");
      }
    }
  }
}

double NormalizeAngle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

RigidMotion Compose(const RigidMotion& outer, const RigidMotion& inner) {
  RigidMotion out;
  out.rotation = NormalizeAngle(outer.rotation + inner.rotation);
  out.pivot = inner.pivot;
  out.translation = outer.Apply(inner.pivot + inner.translation) - inner.pivot;
  return out;
}

RigidMotion RigidTransformBetween(const AgentState& a, const AgentState& b) {
  if (!a.valid || !b.valid) {
    throw std::invalid_argument("state not observed");
  }
  return {NormalizeAngle(a.heading - b.heading), a.center - b.center,
          b.center};
}

std::array<Vec2, 4> OrientedBox::Corners() const {
  const std::array<Vec2, 4> local = {
      Vec2{half_length, half_width}, Vec2{-half_length, half_width},
      Vec2{-half_length, -half_width}, Vec2{half_length, -half_width}};
  std::array<Vec2, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = center + local[i].Rotated(heading);
  return out;
}

OrientedBox BoxForState(const AgentState& state) {
  return {state.center, state.heading, state.width * 0.5, state.length * 0.5};
}

bool BoxCellOverlap(const OrientedBox& box, const GridSpec& spec, int cell_x,
                    int cell_y) {
  const Vec2 lo = spec.GridToWorld({static_cast<double>(cell_x),
                                    static_cast<double>(cell_y)});
  const double cs = spec.cell_size;
  const auto corners = box.Corners();
  std::vector<Vec2> poly(corners.begin(), corners.end());
  poly = ClipHalfPlane(poly, {-1.0, 0.0}, -lo.x);       // x >= lo.x
  if (poly.size() < 3) return false;
  poly = ClipHalfPlane(poly, {1.0, 0.0}, lo.x + cs);    // x <= lo.x + cs
  if (poly.size() < 3) return false;
  poly = ClipHalfPlane(poly, {0.0, -1.0}, -lo.y);       // y >= lo.y
  if (poly.size() < 3) return false;
  poly = ClipHalfPlane(poly, {0.0, 1.0}, lo.y + cs);    // y <= lo.y + cs
  if (poly.size() < 3) return false;
  return PolygonArea(poly) > kAreaEpsilonFraction * cs * cs;
}

std::vector<std::pair<int, int>> OverlappedCells(const OrientedBox& box,
                                                 const GridSpec& spec) {
  const auto corners = box.Corners();
  double min_x = corners[0].x, max_x = corners[0].x;
  double min_y = corners[0].y, max_y = corners[0].y;
  for (const Vec2& c : corners) {
    min_x = std::min(min_x, c.x);
    max_x = std::max(max_x, c.x);
    min_y = std::min(min_y, c.y);
    max_y = std::max(max_y, c.y);
  }
  const Vec2 glo = spec.WorldToGrid({min_x, min_y});
  const Vec2 ghi = spec.WorldToGrid({max_x, max_y});
  const int x0 = std::max(0, static_cast<int>(std::floor(glo.x)));
  const int y0 = std::max(0, static_cast<int>(std::floor(glo.y)));
  const int x1 =
      std::min(spec.width_cells - 1, static_cast<int>(std::floor(ghi.x)));
  const int y1 =
      std::min(spec.height_cells - 1, static_cast<int>(std::floor(ghi.y)));
  std::vector<std::pair<int, int>> cells;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (BoxCellOverlap(box, spec, x, y)) cells.emplace_back(x, y);
    }
  }
  return cells;
}

uint64_t Rng::NextU64() {
  state_ += 0x9E3779B97F4A7C15ull;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Rng::Uniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double Rng::Uniform(double lo, double hi) { return lo + Uniform() * (hi - lo); }

int Rng::UniformInt(int lo, int hi) {
  const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(NextU64() % span);
}

int Rng::PickWeighted(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double r = Uniform() * total;
  for (size_t i = 0; i < weights.size(); ++i) {
    r -= weights[i];
    if (r < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

void GeneratorConfig::Validate() const {
  spec.Validate();
  if (!(step_duration > 0.0) || !std::isfinite(step_duration)) {
    throw std::invalid_argument("step_duration must be positive and finite");
  }
  if (num_vehicles < 0 || num_pedestrians < 0 ||
      num_vehicles + num_pedestrians < 1) {
    throw std::invalid_argument("at least one agent is required");
  }
  for (const SpeedRange& r : {vehicle_speed, pedestrian_speed, turn_rate}) {
    if (!(r.min >= 0.0) || !(r.max >= r.min)) {
      throw std::invalid_argument("invalid speed range");
    }
  }
  const MotionMix& m = motion_mix;
  if (m.constant_velocity < 0.0 || m.constant_turn < 0.0 ||
      m.stop_and_go < 0.0 ||
      m.constant_velocity + m.constant_turn + m.stop_and_go <= 0.0) {
    throw std::invalid_argument("motion mix weights must be non-negative and "
                                "sum to a positive value");
  }
  if (margin < 0.0 || separation < 0.0) {
    throw std::invalid_argument("margin and separation must be non-negative");
  }
  if (speculative_fraction < 0.0 || speculative_fraction > 1.0 ||
      disappear_fraction < 0.0 || disappear_fraction > 1.0) {
    throw std::invalid_argument("fractions must lie in [0, 1]");
  }
  if (spec.FutureSteps() < 1) {
    throw std::invalid_argument("config yields zero future steps");
  }
  if (max_placement_attempts < 1) {
    throw std::invalid_argument("max_placement_attempts must be positive");
  }
}

namespace {

enum MotionModel { kConstantVelocity = 0, kConstantTurn = 1, kStopAndGo = 2 };

struct PlacedAgent {
  std::vector<Vec2> centers;  // one per step in [first, last]
  double radius = 0.0;        // half box diagonal, meters
  int appear = 0, vanish = 0;
};

struct MotionDraw {
  MotionModel model = kConstantVelocity;
  double speed = 0.0;
  double heading = 0.0;
  Vec2 dir;            // unit direction; exact axis vectors in lattice mode
  double omega = 0.0;  // rad/s, constant turn only
  int go_steps = 0, stop_steps = 0, phase = 0;
};

// Positions for every step in [first, last]; index i is step first + i.
std::vector<Vec2> SimulateCenters(const MotionDraw& d, Vec2 start, int first,
                                  int last, double dt) {
  const int n = last - first + 1;
  std::vector<Vec2> centers(n);
  const Vec2 vel = d.dir * d.speed;
  switch (d.model) {
    case kConstantVelocity:
      for (int t = first; t <= last; ++t) {
        centers[t - first] = start + vel * (dt * t);
      }
      break;
    case kConstantTurn: {
      const double s = d.speed, w = d.omega;
      for (int t = first; t <= last; ++t) {
        const double th = d.heading + w * (dt * t);
        centers[t - first] =
            start + Vec2{(std::sin(th) - std::sin(d.heading)) * (s / w),
                         -(std::cos(th) - std::cos(d.heading)) * (s / w)};
      }
      break;
    }
    case kStopAndGo: {
      const int cycle = d.go_steps + d.stop_steps;
      auto moving = [&](int t) {
        int m = (t - first + d.phase) % cycle;
        if (m < 0) m += cycle;
        return m < d.go_steps;
      };
      centers[0 - first] = start;
      for (int t = 0; t < last; ++t) {
        centers[t + 1 - first] =
            centers[t - first] + (moving(t) ? vel * dt : Vec2{});
      }
      for (int t = 0; t > first; --t) {
        centers[t - 1 - first] =
            centers[t - first] - (moving(t - 1) ? vel * dt : Vec2{});
      }
      break;
    }
  }
  return centers;
}

AgentState StateForStep(const MotionDraw& d, const std::vector<Vec2>& centers,
                        int idx, int first, double dt, double width,
                        double length, bool valid) {
  AgentState s;
  if (!valid) return s;
  const int t = first + idx;
  s.center = centers[idx];
  s.valid = true;
  s.width = width;
  s.length = length;
  switch (d.model) {
    case kConstantVelocity: {
      s.heading = NormalizeAngle(d.heading);
      s.velocity = d.dir * d.speed;
      break;
    }
    case kConstantTurn: {
      const double th = d.heading + d.omega * (dt * t);
      s.heading = NormalizeAngle(th);
      s.velocity = Vec2{std::cos(th), std::sin(th)} * d.speed;
      s.acceleration =
          Vec2{-std::sin(th), std::cos(th)} * (d.speed * d.omega);
      break;
    }
    case kStopAndGo: {
      const int cycle = d.go_steps + d.stop_steps;
      int m = (t - first + d.phase) % cycle;
      if (m < 0) m += cycle;
      s.heading = NormalizeAngle(d.heading);
      s.velocity = m < d.go_steps ? d.dir * d.speed : Vec2{};
      break;
    }
  }
  return s;
}

}  // namespace

Scenario GenerateSyntheticScenario(uint64_t seed,
                                   const GeneratorConfig& config) {
  config.Validate();
  Rng rng(seed);
  Scenario scenario;
  scenario.spec = config.spec;
  scenario.step_duration = config.step_duration;
  const int first = scenario.FirstStep(), last = scenario.LastStep();
  const double dt = config.step_duration;
  const int total = config.num_vehicles + config.num_pedestrians;
  std::vector<PlacedAgent> placed;
  placed.reserve(total);

  const Vec2 world_lo = config.spec.origin;
  const Vec2 world_hi =
      config.spec.origin + Vec2{config.spec.width_cells * config.spec.cell_size,
                                config.spec.height_cells *
                                    config.spec.cell_size};

  for (int i = 0; i < total; ++i) {
    const bool is_vehicle = i < config.num_vehicles;
    const AgentClass cls =
        is_vehicle ? AgentClass::kVehicle : AgentClass::kPedestrian;

    int appear = first, vanish = last;
    if (rng.Uniform() < config.speculative_fraction && last >= 1) {
      appear = rng.UniformInt(1, last);
    } else if (rng.Uniform() < config.disappear_fraction) {
      vanish = rng.UniformInt(first, 0);
    }

    const double width =
        is_vehicle ? rng.Uniform(1.7, 2.1) : rng.Uniform(0.5, 0.9);
    const double length =
        is_vehicle ? rng.Uniform(4.0, 4.8) : rng.Uniform(0.5, 0.9);
    const double radius = 0.5 * std::hypot(width, length);

    MotionDraw draw;
    {
      // Turning is reserved for vehicles and disabled when speeds are snapped
      // to the cell lattice, where rotations would break integer motion.
      const double turn_weight =
          (is_vehicle && !config.integer_cell_speeds)
              ? config.motion_mix.constant_turn
              : 0.0;
      const std::array<double, 3> weights = {
          config.motion_mix.constant_velocity, turn_weight,
          config.motion_mix.stop_and_go};
      draw.model = static_cast<MotionModel>(rng.PickWeighted(weights));
    }
    const SpeedRange& range =
        is_vehicle ? config.vehicle_speed : config.pedestrian_speed;
    draw.speed = rng.Uniform(range.min, range.max);
    if (config.integer_cell_speeds) {
      const double quantum = config.spec.cell_size / dt;
      const double k = std::max(1.0, std::round(draw.speed / quantum));
      draw.speed = k * quantum;
    }
    if (draw.model == kConstantTurn) {
      draw.omega = rng.Uniform(config.turn_rate.min, config.turn_rate.max);
      if (rng.Uniform() < 0.5) draw.omega = -draw.omega;
      if (draw.omega == 0.0) draw.omega = 0.1;
    }
    if (draw.model == kStopAndGo) {
      draw.go_steps = rng.UniformInt(4, 10);
      draw.stop_steps = rng.UniformInt(2, 6);
      draw.phase = rng.UniformInt(0, draw.go_steps + draw.stop_steps - 1);
    }

    const Vec2 lo = world_lo + Vec2{config.margin + radius,
                                    config.margin + radius};
    const Vec2 hi = world_hi - Vec2{config.margin + radius,
                                    config.margin + radius};
    if (!(lo.x < hi.x) || !(lo.y < hi.y)) {
      throw std::runtime_error("margin leaves no room to place agents");
    }

    bool accepted = false;
    for (int attempt = 0; attempt < config.max_placement_attempts; ++attempt) {
      if (attempt > 0 && attempt % 60 == 0) {
        draw.speed *= 0.7;
        if (config.integer_cell_speeds) {
          const double quantum = config.spec.cell_size / dt;
          draw.speed =
              std::max(1.0, std::round(draw.speed / quantum)) * quantum;
        }
      }
      Vec2 start;
      if (config.integer_cell_speeds) {
        // Axis-aligned exact directions and cell-center starts keep every
        // coordinate on the cell lattice, so per-step displacements are
        // exact whole-cell vectors.
        static const Vec2 kAxes[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        draw.dir = kAxes[rng.UniformInt(0, 3)];
        draw.heading = std::atan2(draw.dir.y, draw.dir.x);
        const double cs = config.spec.cell_size;
        const auto cell_range = [cs](double wlo, double whi,
                                     double worigin) -> std::pair<int, int> {
          const int a =
              static_cast<int>(std::ceil((wlo - worigin) / cs - 0.5));
          const int b =
              static_cast<int>(std::floor((whi - worigin) / cs - 0.5));
          return {a, b};
        };
        const auto [ax, bx] = cell_range(lo.x, hi.x, config.spec.origin.x);
        const auto [ay, by] = cell_range(lo.y, hi.y, config.spec.origin.y);
        if (ax > bx || ay > by) {
          throw std::runtime_error("margin leaves no room to place agents");
        }
        start = {config.spec.origin.x + (rng.UniformInt(ax, bx) + 0.5) * cs,
                 config.spec.origin.y + (rng.UniformInt(ay, by) + 0.5) * cs};
      } else {
        draw.heading = rng.Uniform(-kPi, kPi);
        draw.dir = {std::cos(draw.heading), std::sin(draw.heading)};
        start = {rng.Uniform(lo.x, hi.x), rng.Uniform(lo.y, hi.y)};
      }
      std::vector<Vec2> centers =
          SimulateCenters(draw, start, first, last, dt);

      bool ok = true;
      for (const Vec2& c : centers) {
        if (c.x < lo.x || c.x > hi.x || c.y < lo.y || c.y > hi.y) {
          ok = false;
          break;
        }
      }
      if (ok && !config.allow_overlap) {
        for (const PlacedAgent& other : placed) {
          const int both_lo = std::max(appear, other.appear);
          const int both_hi = std::min(vanish, other.vanish);
          for (int t = both_lo; t <= both_hi && ok; ++t) {
            const Vec2 d = centers[t - first] - other.centers[t - first];
            if (d.Norm() < radius + other.radius + config.separation) {
              ok = false;
            }
          }
          if (!ok) break;
        }
      }
      if (!ok) continue;

      AgentTrack track;
      track.agent_id = static_cast<uint32_t>(i + 1);
      track.agent_class = cls;
      track.first_step = first;
      track.states.resize(centers.size());
      for (size_t idx = 0; idx < centers.size(); ++idx) {
        const int t = first + static_cast<int>(idx);
        track.states[idx] =
            StateForStep(draw, centers, static_cast<int>(idx), first, dt,
                         width, length, t >= appear && t <= vanish);
      }
      scenario.tracks.push_back(std::move(track));
      placed.push_back({std::move(centers), radius, appear, vanish});
      accepted = true;
      break;
    }
    if (!accepted) {
      throw std::runtime_error(
          "could not place agent " + std::to_string(i + 1) +
          " within the attempt budget; relax margins or counts");
    }
  }

  // Decorative map features, carried through serialization but never
  // consumed by labeling.
  for (int k = 0; k < 8; ++k) {
    const double s = static_cast<double>(k) / 8.0;
    scenario.road_points.push_back(
        {{world_lo.x + s * (world_hi.x - world_lo.x), world_lo.y},
         "road_edge"});
  }
  scenario.traffic_lights.push_back(
      {0, {(world_lo.x + world_hi.x) * 0.5, (world_lo.y + world_hi.y) * 0.5},
       "green"});

  scenario.Validate();
  return scenario;
}

namespace {

json SpecToJson(const GridSpec& spec) {
  return json{{"height_cells", spec.height_cells},
              {"width_cells", spec.width_cells},
              {"cell_size", spec.cell_size},
              {"origin", {spec.origin.x, spec.origin.y}},
              {"num_waypoints", spec.num_waypoints},
              {"input_steps", spec.input_steps},
              {"aggregation_factor", spec.aggregation_factor}};
}

GridSpec SpecFromJson(const json& j) {
  GridSpec spec;
  spec.height_cells = j.at("height_cells").get<int>();
  spec.width_cells = j.at("width_cells").get<int>();
  spec.cell_size = j.at("cell_size").get<double>();
  spec.origin = {j.at("origin").at(0).get<double>(),
                 j.at("origin").at(1).get<double>()};
  spec.num_waypoints = j.at("num_waypoints").get<int>();
  spec.input_steps = j.at("input_steps").get<int>();
  spec.aggregation_factor = j.at("aggregation_factor").get<int>();
  return spec;
}

}  // namespace

std::string SpecToJsonText(const GridSpec& spec) {
  return SpecToJson(spec).dump();
}

GridSpec SpecFromJsonText(const std::string& json_text) {
  return SpecFromJson(json::parse(json_text));
}

std::string ScenarioToJson(const Scenario& scenario) {
  json tracks = json::array();
  for (const AgentTrack& track : scenario.tracks) {
    json states = json::array();
    for (size_t i = 0; i < track.states.size(); ++i) {
      const AgentState& s = track.states[i];
      states.push_back(json{{"t", track.first_step + static_cast<int>(i)},
                            {"x", s.center.x},
                            {"y", s.center.y},
                            {"theta", s.heading},
                            {"w", s.width},
                            {"l", s.length},
                            {"vx", s.velocity.x},
                            {"vy", s.velocity.y},
                            {"ax", s.acceleration.x},
                            {"ay", s.acceleration.y},
                            {"valid", s.valid}});
    }
    tracks.push_back(json{{"id", track.agent_id},
                          {"class", AgentClassName(track.agent_class)},
                          {"states", std::move(states)}});
  }
  json roads = json::array();
  for (const RoadPoint& r : scenario.road_points) {
    roads.push_back(
        json{{"x", r.position.x}, {"y", r.position.y}, {"type", r.type}});
  }
  json lights = json::array();
  for (const TrafficLight& l : scenario.traffic_lights) {
    lights.push_back(json{{"t", l.t},
                          {"x", l.position.x},
                          {"y", l.position.y},
                          {"state", l.state}});
  }
  const json doc{{"spec", SpecToJson(scenario.spec)},
                 {"step_duration", scenario.step_duration},
                 {"tracks", std::move(tracks)},
                 {"road_points", std::move(roads)},
                 {"traffic_lights", std::move(lights)}};
  return doc.dump(2) + "\n";
}

Scenario ScenarioFromJson(const std::string& json_text) {
  const json doc = json::parse(json_text);
  Scenario scenario;
  scenario.spec = SpecFromJson(doc.at("spec"));
  scenario.step_duration = doc.value("step_duration", 0.1);
  for (const json& jt : doc.at("tracks")) {
    AgentTrack track;
    track.agent_id = jt.at("id").get<uint32_t>();
    track.agent_class = ParseAgentClass(jt.at("class").get<std::string>());
    const json& states = jt.at("states");
    if (states.empty()) {
      throw std::invalid_argument("track without states");
    }
    track.first_step = states.at(0).at("t").get<int>();
    int expect = track.first_step;
    for (const json& js : states) {
      if (js.at("t").get<int>() != expect++) {
        throw std::invalid_argument("track states must be consecutive in t");
      }
      AgentState s;
      s.center = {js.at("x").get<double>(), js.at("y").get<double>()};
      s.heading = NormalizeAngle(js.at("theta").get<double>());
      s.width = js.at("w").get<double>();
      s.length = js.at("l").get<double>();
      s.velocity = {js.at("vx").get<double>(), js.at("vy").get<double>()};
      s.acceleration = {js.at("ax").get<double>(), js.at("ay").get<double>()};
      s.valid = js.at("valid").get<bool>();
      track.states.push_back(s);
    }
    scenario.tracks.push_back(std::move(track));
  }
  for (const json& jr : doc.value("road_points", json::array())) {
    scenario.road_points.push_back(
        {{jr.at("x").get<double>(), jr.at("y").get<double>()},
         jr.value("type", std::string())});
  }
  for (const json& jl : doc.value("traffic_lights", json::array())) {
    scenario.traffic_lights.push_back(
        {jl.at("t").get<int>(),
         {jl.at("x").get<double>(), jl.at("y").get<double>()},
         jl.value("state", std::string())});
  }
  scenario.Validate();
  return scenario;
}

void SaveScenario(const std::string& path, const Scenario& scenario) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << ScenarioToJson(scenario);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Scenario LoadScenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ScenarioFromJson(buffer.str());
}

GeneratorConfig GeneratorConfigFromJson(const std::string& json_text) {
  const json doc = json::parse(json_text);
  GeneratorConfig cfg;
  if (doc.contains("spec")) {
    json js = SpecToJson(cfg.spec);
    js.update(doc.at("spec"));
    cfg.spec = SpecFromJson(js);
  }
  cfg.step_duration = doc.value("step_duration", cfg.step_duration);
  cfg.num_vehicles = doc.value("num_vehicles", cfg.num_vehicles);
  cfg.num_pedestrians = doc.value("num_pedestrians", cfg.num_pedestrians);
  auto range = [&doc](const char* key, SpeedRange fallback) {
    if (!doc.contains(key)) return fallback;
    return SpeedRange{doc.at(key).at(0).get<double>(),
                      doc.at(key).at(1).get<double>()};
  };
  cfg.vehicle_speed = range("vehicle_speed", cfg.vehicle_speed);
  cfg.pedestrian_speed = range("pedestrian_speed", cfg.pedestrian_speed);
  cfg.turn_rate = range("turn_rate", cfg.turn_rate);
  if (doc.contains("motion_mix")) {
    const json& m = doc.at("motion_mix");
    cfg.motion_mix.constant_velocity =
        m.value("constant_velocity", cfg.motion_mix.constant_velocity);
    cfg.motion_mix.constant_turn =
        m.value("constant_turn", cfg.motion_mix.constant_turn);
    cfg.motion_mix.stop_and_go =
        m.value("stop_and_go", cfg.motion_mix.stop_and_go);
  }
  cfg.margin = doc.value("margin", cfg.margin);
  cfg.separation = doc.value("separation", cfg.separation);
  cfg.allow_overlap = doc.value("allow_overlap", cfg.allow_overlap);
  cfg.speculative_fraction =
      doc.value("speculative_fraction", cfg.speculative_fraction);
  cfg.disappear_fraction =
      doc.value("disappear_fraction", cfg.disappear_fraction);
  cfg.integer_cell_speeds =
      doc.value("integer_cell_speeds", cfg.integer_cell_speeds);
  cfg.max_placement_attempts =
      doc.value("max_placement_attempts", cfg.max_placement_attempts);
  cfg.Validate();
  return cfg;
}

}  // namespace occflow
