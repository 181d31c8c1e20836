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
// Non-learned predictors.  The constant-velocity predictor extrapolates every
// agent from its step-0 state and runs the regular label pipeline on the
// extrapolated tracks, so its output is exact on scenes whose agents really
// do move at constant velocity.  The trajectory-set converter turns weighted
// trajectory hypotheses with Gaussian position uncertainty into occupancy
// grids.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "occflow/labels.hpp"
#include "occflow/losses.hpp"
#include "occflow/scene.hpp"

namespace occflow {

struct CvPrediction {
  Prediction prediction;
  // Agents that could not be extrapolated (not valid at step 0), per class.
  std::array<std::vector<uint32_t>, kNumAgentClasses> skipped;
};

// Extrapolates each agent valid at step 0 with its stored velocity and
// constant heading, rebuilds waypoint labels from the extrapolated tracks,
// and encodes their occupancy at probability 0.99 (0.01 where empty).
// Predicted flows are the extrapolated backward flows.
CvPrediction ConstantVelocityPredict(const Scenario& scenario);

struct HypothesisWaypoint {
  Vec2 center;           // meters
  double heading = 0.0;  // radians
  // Position covariance in meters^2; symmetric, so three entries.
  double cov_xx = 0.0;
  double cov_xy = 0.0;
  double cov_yy = 0.0;
};

struct TrajectoryHypothesis {
  double likelihood = 1.0;
  std::vector<HypothesisWaypoint> waypoints;  // one per waypoint 1..T
};

struct AgentHypotheses {
  uint32_t agent_id = 0;
  AgentClass agent_class = AgentClass::kVehicle;
  double width = 0.0;   // meters
  double length = 0.0;  // meters
  std::vector<TrajectoryHypothesis> hypotheses;
};

struct HypothesisSet {
  GridSpec spec;
  std::vector<AgentHypotheses> agents;

  // Checks spec validity, positive extents, likelihoods in [0, 1] summing
  // to at most 1 + 1e-6 per agent, waypoint counts, and finite values.
  void Validate() const;
};

// Rasterizes each hypothesis box per waypoint, convolves it with the
// discretized Gaussian of its covariance (truncated at 3 sigma, renormalized
// to unit sum; an all-zero covariance is a delta), scales by likelihood, and
// combines contributions with the complementary product
// O = 1 - prod(1 - c).  Throws std::invalid_argument on covariances that are
// not positive semidefinite (and on nonzero singular ones, which have no
// two-dimensional density).
std::vector<OccupancyGrid> TrajectoriesToOccupancy(
    const std::vector<AgentHypotheses>& agents, const GridSpec& spec);

// Splits the set by class, converts each to occupancy, and wraps the result
// as a prediction (occupancy encoded as logits; flows all zero, since
// trajectory sets carry no per-cell motion).
Prediction HypothesesToPrediction(const HypothesisSet& set);

// JSON round trip.  Schema mirrors the scenario file: agents with id, class,
// w, l, and per-hypothesis "likelihood" plus waypoint states carrying
// t (waypoint index, 1-based), x, y, theta, and cov = [xx, xy, yy].
std::string HypothesisSetToJson(const HypothesisSet& set);
HypothesisSet HypothesisSetFromJson(const std::string& json_text);
void SaveHypothesisSet(const std::string& path, const HypothesisSet& set);
HypothesisSet LoadHypothesisSet(const std::string& path);

}  // namespace occflow
