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
#include "occflow/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "occflow/metrics.hpp"

namespace occflow {
namespace {

GridSpec SmallSpec(int h, int w, double cell, int waypoints, int aggregation) {
  GridSpec spec;
  spec.height_cells = h;
  spec.width_cells = w;
  spec.cell_size = cell;
  spec.origin = {0.0, 0.0};
  spec.num_waypoints = waypoints;
  spec.input_steps = 1;
  spec.aggregation_factor = aggregation;
  return spec;
}

AgentTrack LinearTrack(uint32_t id, const GridSpec& spec, Vec2 start,
                       Vec2 velocity, double dt) {
  AgentTrack track;
  track.agent_id = id;
  track.agent_class = AgentClass::kVehicle;
  track.first_step = spec.FirstStep();
  for (int t = spec.FirstStep(); t <= spec.FutureSteps() * spec.aggregation_factor;
       ++t) {
    AgentState s;
    s.center = start + velocity * (dt * t);
    s.heading = 0.0;
    s.width = 0.6;
    s.length = 1.0;
    s.velocity = velocity;
    s.valid = true;
    track.states.push_back(s);
  }
  return track;
}

Scenario OneTrackScenario(const GridSpec& spec, const AgentTrack& track,
                          double dt) {
  Scenario scenario;
  scenario.spec = spec;
  scenario.step_duration = dt;
  scenario.tracks = {track};
  return scenario;
}

// Probability the near-binary encoding assigns after the logit round trip.
bool NearBinaryMatches(const OccupancyGrid& probs, const OccupancyGrid& occ) {
  for (size_t k = 0; k < probs.values().size(); ++k) {
    const double want = occ.values()[k] != 0.0 ? 0.99 : 0.01;
    if (std::abs(probs.values()[k] - want) > 1e-12) return false;
  }
  return true;
}

TEST_CASE("constant-velocity prediction of a static scene repeats the "
          "current frame") {
  const GridSpec spec = SmallSpec(12, 12, 0.5, 3, 1);
  const AgentTrack track = LinearTrack(4, spec, {2.0, 3.0}, {0.0, 0.0}, 0.1);
  const Scenario scenario = OneTrackScenario(spec, track, 0.1);
  const LabelSet labels =
      BuildLabels(scenario, AgentClass::kVehicle, LabelMode::kAll);

  const CvPrediction cv = ConstantVelocityPredict(scenario);
  CHECK(cv.skipped[0].empty());
  CHECK(cv.skipped[1].empty());
  for (int i = 0; i < spec.num_waypoints; ++i) {
    CHECK(NearBinaryMatches(cv.prediction.Probabilities(AgentClass::kVehicle, i),
                            labels.current.occupancy));
    for (double v : cv.prediction.flows[0][i].data()) CHECK(v == 0.0);
  }
}

TEST_CASE("constant-velocity prediction advances fifteen cells per waypoint") {
  // 5 m/s on a 0.2 m grid with 0.6 s between waypoints: 15 cells.
  const GridSpec spec = SmallSpec(12, 48, 0.2, 2, 6);
  const double dt = 0.1;
  const AgentTrack track = LinearTrack(9, spec, {1.0, 1.2}, {5.0, 0.0}, dt);
  const Scenario scenario = OneTrackScenario(spec, track, dt);

  const CvPrediction cv = ConstantVelocityPredict(scenario);

  // Oracle: labels built from the analytically moved track.  The track in
  // the scenario already follows the same kinematics, so its labels are the
  // expected prediction.
  const LabelSet want =
      BuildLabels(scenario, AgentClass::kVehicle, LabelMode::kAll);
  REQUIRE(want.waypoints.size() == 2);
  for (int i = 0; i < spec.num_waypoints; ++i) {
    CHECK(NearBinaryMatches(cv.prediction.Probabilities(AgentClass::kVehicle, i),
                            want.waypoints[i].occupancy));
    CHECK(cv.prediction.flows[0][i].data() == want.waypoints[i].flow.data());
  }

  // At waypoint 1, every cell that ends the window occupied points back 15
  // cells in x.
  int end_cells = 0;
  const LabeledFrame& first = want.waypoints[0];
  for (int y = 0; y < spec.height_cells; ++y) {
    for (int x = 0; x < spec.width_cells; ++x) {
      if (first.ids.at(x, y) == 0) continue;
      ++end_cells;
      CHECK(cv.prediction.flows[0][0].at(x, y).x ==
            doctest::Approx(-15.0).epsilon(1e-9));
      CHECK(cv.prediction.flows[0][0].at(x, y).y ==
            doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    }
  }
  CHECK(end_cells > 0);
}

TEST_CASE("agents unobserved at the current step are skipped with a notice") {
  const GridSpec spec = SmallSpec(12, 12, 0.5, 2, 1);
  AgentTrack seen = LinearTrack(3, spec, {2.0, 2.0}, {0.0, 0.0}, 0.1);
  AgentTrack unseen = LinearTrack(8, spec, {4.0, 4.0}, {0.0, 0.0}, 0.1);
  unseen.states[0].valid = false;  // invalid exactly at step 0

  Scenario scenario;
  scenario.spec = spec;
  scenario.step_duration = 0.1;
  scenario.tracks = {seen, unseen};

  const CvPrediction cv = ConstantVelocityPredict(scenario);
  CHECK(cv.skipped[0] == std::vector<uint32_t>{8});
  CHECK(cv.skipped[1].empty());

  // The skipped agent leaves no occupancy behind.
  const OccupancyGrid probs =
      cv.prediction.Probabilities(AgentClass::kVehicle, 0);
  const auto cell = spec.WorldToGrid({4.0, 4.0});
  CHECK(probs.at(int(cell.x), int(cell.y)) == doctest::Approx(0.01));
  const auto kept = spec.WorldToGrid({2.0, 2.0});
  CHECK(probs.at(int(kept.x), int(kept.y)) == doctest::Approx(0.99));
}

TEST_CASE("the predictor is exact on generated constant-velocity scenes") {
  GeneratorConfig config;
  config.spec = SmallSpec(80, 80, 0.25, 4, 2);
  config.num_vehicles = 3;
  config.num_pedestrians = 2;
  config.motion_mix = {1.0, 0.0, 0.0};
  config.margin = 3.0;

  for (uint64_t seed : {11ull, 12ull, 13ull}) {
    const Scenario scenario = GenerateSyntheticScenario(seed, config);
    const CvPrediction cv = ConstantVelocityPredict(scenario);
    CHECK(cv.skipped[0].empty());
    CHECK(cv.skipped[1].empty());

    const std::array<LabelSet, kNumAgentClasses> labels = {
        BuildLabels(scenario, AgentClass::kVehicle, LabelMode::kAll),
        BuildLabels(scenario, AgentClass::kPedestrian, LabelMode::kAll)};
    const MetricReport report = Evaluate(cv.prediction, labels);
    for (int cls = 0; cls < kNumAgentClasses; ++cls) {
      REQUIRE(!report.per_class[cls].waypoints.empty());
      REQUIRE(report.per_class[cls].waypoints[0].epe.has_value());
      CHECK(*report.per_class[cls].waypoints[0].epe <= 1e-6);
      for (const WaypointMetrics& m : report.per_class[cls].waypoints) {
        REQUIRE(m.auc.has_value());
        CHECK(*m.auc >= 0.99);
        REQUIRE(m.epe.has_value());
        CHECK(*m.epe <= 1e-6);
      }
    }
  }
}

HypothesisSet OneBoxSet(const GridSpec& spec, Vec2 center, double likelihood,
                        double cov_xx, double cov_xy, double cov_yy) {
  TrajectoryHypothesis hyp;
  hyp.likelihood = likelihood;
  for (int t = 0; t < spec.num_waypoints; ++t) {
    hyp.waypoints.push_back({center, 0.0, cov_xx, cov_xy, cov_yy});
  }
  AgentHypotheses agent;
  agent.agent_id = 1;
  agent.agent_class = AgentClass::kVehicle;
  agent.width = 0.6;
  agent.length = 1.0;
  agent.hypotheses = {hyp};
  return {spec, {agent}};
}

TEST_CASE("a certain hypothesis with zero covariance is the plain box") {
  const GridSpec spec = SmallSpec(16, 16, 0.5, 2, 1);
  const HypothesisSet set = OneBoxSet(spec, {3.1, 4.2}, 1.0, 0.0, 0.0, 0.0);
  const std::vector<OccupancyGrid> grids =
      TrajectoriesToOccupancy(set.agents, spec);
  REQUIRE(grids.size() == 2);

  const OrientedBox box{{3.1, 4.2}, 0.0, 0.3, 0.5};
  std::set<std::pair<int, int>> covered;
  for (const auto& [x, y] : OverlappedCells(box, spec)) covered.insert({x, y});
  REQUIRE(!covered.empty());
  for (const OccupancyGrid& grid : grids) {
    for (int y = 0; y < spec.height_cells; ++y) {
      for (int x = 0; x < spec.width_cells; ++x) {
        const double want = covered.count({x, y}) ? 1.0 : 0.0;
        CHECK(grid.at(x, y) == want);
      }
    }
  }
}

TEST_CASE("hypothesis likelihoods weight and combine contributions") {
  const GridSpec spec = SmallSpec(16, 16, 0.5, 1, 1);
  TrajectoryHypothesis left;
  left.likelihood = 0.6;
  left.waypoints = {{{2.0, 2.0}, 0.0, 0.0, 0.0, 0.0}};
  TrajectoryHypothesis right = left;
  right.likelihood = 0.4;
  right.waypoints = {{{6.0, 6.0}, 0.0, 0.0, 0.0, 0.0}};
  AgentHypotheses agent;
  agent.agent_id = 2;
  agent.agent_class = AgentClass::kVehicle;
  agent.width = 0.6;
  agent.length = 1.0;
  agent.hypotheses = {left, right};

  const std::vector<OccupancyGrid> grids =
      TrajectoriesToOccupancy({agent}, spec);
  const OccupancyGrid& grid = grids[0];
  const auto value_at = [&](Vec2 world) {
    const Vec2 g = spec.WorldToGrid(world);
    return grid.at(int(g.x), int(g.y));
  };
  CHECK(value_at({2.0, 2.0}) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(value_at({6.0, 6.0}) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(value_at({4.0, 4.0}) == 0.0);

  // Overlapping boxes combine by the complementary product.
  AgentHypotheses overlapping = agent;
  overlapping.hypotheses[1].waypoints[0].center = {2.0, 2.0};
  const std::vector<OccupancyGrid> merged =
      TrajectoriesToOccupancy({overlapping}, spec);
  const Vec2 g = spec.WorldToGrid({2.0, 2.0});
  CHECK(merged[0].at(int(g.x), int(g.y)) ==
        doctest::Approx(1.0 - 0.4 * 0.6).epsilon(1e-12));
}

TEST_CASE("a unit-sigma kernel spreads exactly one unit of mass") {
  const GridSpec spec = SmallSpec(24, 24, 0.5, 1, 1);
  // A box strictly inside one cell, blurred by sigma = 1 cell isotropic.
  const Vec2 center = spec.CellCenterWorld(12, 12);
  const double cs = spec.cell_size;
  HypothesisSet set = OneBoxSet(spec, center, 1.0, cs * cs, 0.0, cs * cs);
  set.agents[0].width = 0.4;
  set.agents[0].length = 0.4;

  const std::vector<OccupancyGrid> grids =
      TrajectoriesToOccupancy(set.agents, spec);
  const OccupancyGrid& grid = grids[0];

  double total = 0.0;
  for (double v : grid.values()) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // Direct discrete-Gaussian evaluation over the 3-sigma window.
  double denom = 0.0;
  for (int dy = -3; dy <= 3; ++dy) {
    for (int dx = -3; dx <= 3; ++dx) {
      denom += std::exp(-0.5 * (dx * dx + dy * dy));
    }
  }
  CHECK(grid.at(12, 12) == doctest::Approx(1.0 / denom).epsilon(1e-12));
  CHECK(grid.at(13, 12) ==
        doctest::Approx(std::exp(-0.5) / denom).epsilon(1e-12));
  CHECK(grid.at(13, 14) ==
        doctest::Approx(std::exp(-2.5) / denom).epsilon(1e-12));
  CHECK(grid.at(12, 12 + 4) == 0.0);  // outside the truncation window
}

TEST_CASE("occupancy from hypotheses stays in range and grows with "
          "likelihood") {
  const GridSpec spec = SmallSpec(24, 24, 0.5, 2, 1);
  HypothesisSet weak = OneBoxSet(spec, {6.0, 6.0}, 0.3, 0.25, 0.0, 0.25);
  HypothesisSet strong = OneBoxSet(spec, {6.0, 6.0}, 0.6, 0.25, 0.0, 0.25);

  const std::vector<OccupancyGrid> lo =
      TrajectoriesToOccupancy(weak.agents, spec);
  const std::vector<OccupancyGrid> hi =
      TrajectoriesToOccupancy(strong.agents, spec);
  bool strictly_larger = false;
  for (int t = 0; t < spec.num_waypoints; ++t) {
    for (size_t k = 0; k < lo[t].values().size(); ++k) {
      CHECK(lo[t].values()[k] >= 0.0);
      CHECK(hi[t].values()[k] <= 1.0);
      CHECK(lo[t].values()[k] <= hi[t].values()[k] + 1e-15);
      if (hi[t].values()[k] > lo[t].values()[k] + 1e-9) strictly_larger = true;
    }
  }
  CHECK(strictly_larger);
}

TEST_CASE("degenerate covariances are rejected") {
  const GridSpec spec = SmallSpec(16, 16, 0.5, 1, 1);
  CHECK_THROWS_WITH_AS(
      TrajectoriesToOccupancy(
          OneBoxSet(spec, {4.0, 4.0}, 1.0, -0.1, 0.0, 0.1).agents, spec),
      "covariance is not positive semidefinite", std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      TrajectoriesToOccupancy(
          OneBoxSet(spec, {4.0, 4.0}, 1.0, 0.1, 0.2, 0.1).agents, spec),
      "covariance is not positive semidefinite", std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      TrajectoriesToOccupancy(
          OneBoxSet(spec, {4.0, 4.0}, 1.0, 0.1, 0.0, 0.0).agents, spec),
      "nonzero singular covariance has no planar density",
      std::invalid_argument);
}

TEST_CASE("hypothesis sets are validated") {
  const GridSpec spec = SmallSpec(16, 16, 0.5, 2, 1);
  HypothesisSet set = OneBoxSet(spec, {4.0, 4.0}, 1.0, 0.0, 0.0, 0.0);

  HypothesisSet bad = set;
  bad.agents[0].hypotheses[0].likelihood = 1.5;
  CHECK_THROWS_WITH_AS(bad.Validate(), "likelihood must be in [0, 1]",
                       std::invalid_argument);

  bad = set;
  bad.agents[0].hypotheses.push_back(bad.agents[0].hypotheses[0]);
  bad.agents[0].hypotheses[0].likelihood = 0.7;
  bad.agents[0].hypotheses[1].likelihood = 0.7;
  CHECK_THROWS_WITH_AS(bad.Validate(),
                       "hypothesis likelihoods must sum to at most 1",
                       std::invalid_argument);

  bad = set;
  bad.agents[0].hypotheses[0].waypoints.pop_back();
  CHECK_THROWS_WITH_AS(bad.Validate(),
                       "hypothesis must have one waypoint per prediction step",
                       std::invalid_argument);

  bad = set;
  bad.agents[0].agent_id = 0;
  CHECK_THROWS_WITH_AS(bad.Validate(), "hypothesis agent id must be nonzero",
                       std::invalid_argument);

  bad = set;
  bad.agents[0].width = 0.0;
  CHECK_THROWS_WITH_AS(bad.Validate(),
                       "hypothesis agent extent must be positive",
                       std::invalid_argument);
}

TEST_CASE("hypothesis files round-trip byte for byte") {
  const GridSpec spec = SmallSpec(16, 16, 0.5, 2, 1);
  HypothesisSet set = OneBoxSet(spec, {3.25, 4.75}, 0.55, 0.09, 0.01, 0.16);
  set.agents[0].hypotheses[0].waypoints[1].center = {3.5, 5.0};
  set.agents[0].hypotheses[0].waypoints[1].heading = 0.4;

  const std::string text = HypothesisSetToJson(set);
  const HypothesisSet back = HypothesisSetFromJson(text);
  CHECK(HypothesisSetToJson(back) == text);
  CHECK(back.agents[0].hypotheses[0].likelihood == 0.55);
  CHECK(back.agents[0].hypotheses[0].waypoints[1].center == Vec2{3.5, 5.0});
  CHECK(back.agents[0].hypotheses[0].waypoints[1].cov_xy == 0.01);

  CHECK_THROWS_AS(HypothesisSetFromJson("{not json"), std::invalid_argument);

  // Waypoint indices must be 1..T in order.
  nlohmann::json doc = nlohmann::json::parse(text);
  doc["agents"][0]["hypotheses"][0]["waypoints"][0]["t"] = 2;
  CHECK_THROWS_WITH_AS(HypothesisSetFromJson(doc.dump()),
                       "hypothesis waypoints must be consecutive from 1",
                       std::invalid_argument);
}

TEST_CASE("hypotheses convert to a class-split prediction with zero flow") {
  const GridSpec spec = SmallSpec(16, 16, 0.5, 1, 1);
  HypothesisSet set = OneBoxSet(spec, {2.0, 2.0}, 0.6, 0.0, 0.0, 0.0);
  AgentHypotheses walker = set.agents[0];
  walker.agent_id = 5;
  walker.agent_class = AgentClass::kPedestrian;
  walker.hypotheses[0].waypoints[0].center = {6.0, 6.0};
  set.agents.push_back(walker);

  const Prediction pred = HypothesesToPrediction(set);
  for (int cls = 0; cls < kNumAgentClasses; ++cls) {
    std::vector<AgentHypotheses> only;
    for (const AgentHypotheses& agent : set.agents) {
      if (agent.agent_class == static_cast<AgentClass>(cls)) {
        only.push_back(agent);
      }
    }
    const std::vector<OccupancyGrid> want =
        TrajectoriesToOccupancy(only, spec);
    const OccupancyGrid probs =
        pred.Probabilities(static_cast<AgentClass>(cls), 0);
    for (size_t k = 0; k < probs.values().size(); ++k) {
      const double expect = std::clamp(want[0].values()[k], 1e-7, 1.0 - 1e-7);
      CHECK(probs.values()[k] == doctest::Approx(expect).epsilon(1e-9));
    }
    for (double v : pred.flows[cls][0].data()) CHECK(v == 0.0);
  }
}

}  // namespace
}  // namespace occflow
