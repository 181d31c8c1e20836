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

#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "occflow/io.hpp"

namespace occflow {
namespace {

constexpr double kNearBinaryHigh = 0.99;
constexpr double kNearBinaryLow = 0.01;
constexpr double kLikelihoodSumSlack = 1e-6;

bool IsFinite(double v) { return std::isfinite(v); }

}  // namespace

CvPrediction ConstantVelocityPredict(const Scenario& scenario) {
  scenario.Validate();
  const GridSpec& spec = scenario.spec;
  const double dt = scenario.step_duration;

  CvPrediction out;
  Scenario extrapolated;
  extrapolated.spec = spec;
  extrapolated.step_duration = dt;

  for (const AgentTrack& track : scenario.tracks) {
    if (!track.ValidAt(0)) {
      out.skipped[static_cast<int>(track.agent_class)].push_back(
          track.agent_id);
      continue;
    }
    const AgentState& s0 = track.StateAt(0);
    AgentTrack synth;
    synth.agent_id = track.agent_id;
    synth.agent_class = track.agent_class;
    synth.first_step = track.first_step;
    synth.states.reserve(track.states.size());
    for (int t = track.first_step; t <= track.LastStep(); ++t) {
      if (t <= 0) {
        synth.states.push_back(track.StateAt(t));
        continue;
      }
      AgentState s = s0;
      s.center = s0.center + s0.velocity * (dt * t);
      s.acceleration = {0.0, 0.0};
      s.valid = true;
      synth.states.push_back(s);
    }
    extrapolated.tracks.push_back(std::move(synth));
  }

  std::array<std::vector<OccupancyGrid>, kNumAgentClasses> probabilities;
  std::array<std::vector<FlowField>, kNumAgentClasses> flows;
  for (int cls = 0; cls < kNumAgentClasses; ++cls) {
    const LabelSet labels =
        BuildLabels(extrapolated, static_cast<AgentClass>(cls),
                    LabelMode::kAll);
    for (const LabeledFrame& frame : labels.waypoints) {
      OccupancyGrid probs(spec);
      for (size_t i = 0; i < probs.values().size(); ++i) {
        probs.values()[i] = frame.occupancy.values()[i] != 0.0
                                ? kNearBinaryHigh
                                : kNearBinaryLow;
      }
      probabilities[cls].push_back(std::move(probs));
      flows[cls].push_back(frame.flow);
    }
  }
  out.prediction = Prediction::FromProbabilities(spec, probabilities, flows);
  return out;
}

void HypothesisSet::Validate() const {
  spec.Validate();
  for (const AgentHypotheses& agent : agents) {
    if (agent.agent_id == 0) {
      throw std::invalid_argument("hypothesis agent id must be nonzero");
    }
    if (!(agent.width > 0.0) || !(agent.length > 0.0) ||
        !IsFinite(agent.width) || !IsFinite(agent.length)) {
      throw std::invalid_argument("hypothesis agent extent must be positive");
    }
    double likelihood_sum = 0.0;
    for (const TrajectoryHypothesis& hyp : agent.hypotheses) {
      if (!(hyp.likelihood >= 0.0) || !(hyp.likelihood <= 1.0)) {
        throw std::invalid_argument("likelihood must be in [0, 1]");
      }
      likelihood_sum += hyp.likelihood;
      if (hyp.waypoints.size() != static_cast<size_t>(spec.num_waypoints)) {
        throw std::invalid_argument(
            "hypothesis must have one waypoint per prediction step");
      }
      for (const HypothesisWaypoint& wp : hyp.waypoints) {
        if (!IsFinite(wp.center.x) || !IsFinite(wp.center.y) ||
            !IsFinite(wp.heading) || !IsFinite(wp.cov_xx) ||
            !IsFinite(wp.cov_xy) || !IsFinite(wp.cov_yy)) {
          throw std::invalid_argument("hypothesis waypoint must be finite");
        }
      }
    }
    if (likelihood_sum > 1.0 + kLikelihoodSumSlack) {
      throw std::invalid_argument(
          "hypothesis likelihoods must sum to at most 1");
    }
  }
}

namespace {

// Discrete Gaussian over integer cell offsets, truncated at 3 sigma per axis
// and renormalized to unit sum.  Covariance comes in meters^2 and is scaled
// to cell units here.  Returns an empty kernel for the all-zero covariance
// (delta).  Throws on non-PSD and on nonzero singular covariances.
struct Kernel {
  int radius_x = 0;
  int radius_y = 0;
  std::vector<double> weights;  // (2rx+1) * (2ry+1), row-major

  double At(int dx, int dy) const {
    return weights[(dy + radius_y) * (2 * radius_x + 1) + (dx + radius_x)];
  }
  bool IsDelta() const { return weights.empty(); }
};

Kernel BuildKernel(const HypothesisWaypoint& wp, double cell_size) {
  const double scale = cell_size * cell_size;
  const double xx = wp.cov_xx / scale;
  const double xy = wp.cov_xy / scale;
  const double yy = wp.cov_yy / scale;
  if (xx == 0.0 && xy == 0.0 && yy == 0.0) return {};
  const double det = xx * yy - xy * xy;
  if (xx < 0.0 || yy < 0.0 || det < 0.0) {
    throw std::invalid_argument("covariance is not positive semidefinite");
  }
  if (det == 0.0 || xx == 0.0 || yy == 0.0) {
    throw std::invalid_argument(
        "nonzero singular covariance has no planar density");
  }
  Kernel kernel;
  kernel.radius_x = static_cast<int>(std::ceil(3.0 * std::sqrt(xx)));
  kernel.radius_y = static_cast<int>(std::ceil(3.0 * std::sqrt(yy)));
  const double ixx = yy / det;
  const double ixy = -xy / det;
  const double iyy = xx / det;
  double sum = 0.0;
  for (int dy = -kernel.radius_y; dy <= kernel.radius_y; ++dy) {
    for (int dx = -kernel.radius_x; dx <= kernel.radius_x; ++dx) {
      const double q =
          ixx * dx * dx + 2.0 * ixy * dx * dy + iyy * dy * dy;
      const double w = std::exp(-0.5 * q);
      kernel.weights.push_back(w);
      sum += w;
    }
  }
  for (double& w : kernel.weights) w /= sum;
  return kernel;
}

}  // namespace

std::vector<OccupancyGrid> TrajectoriesToOccupancy(
    const std::vector<AgentHypotheses>& agents, const GridSpec& spec) {
  spec.Validate();
  HypothesisSet set{spec, agents};
  set.Validate();

  std::vector<OccupancyGrid> out(spec.num_waypoints, OccupancyGrid(spec));
  std::vector<double> contribution(static_cast<size_t>(spec.CellCount()));
  for (const AgentHypotheses& agent : agents) {
    for (const TrajectoryHypothesis& hyp : agent.hypotheses) {
      for (int t = 0; t < spec.num_waypoints; ++t) {
        const HypothesisWaypoint& wp = hyp.waypoints[t];
        const OrientedBox box{wp.center, wp.heading, agent.width * 0.5,
                              agent.length * 0.5};
        const Kernel kernel = BuildKernel(wp, spec.cell_size);
        std::fill(contribution.begin(), contribution.end(), 0.0);
        for (const auto& [x, y] : OverlappedCells(box, spec)) {
          if (kernel.IsDelta()) {
            contribution[static_cast<size_t>(y) * spec.width_cells + x] = 1.0;
            continue;
          }
          for (int dy = -kernel.radius_y; dy <= kernel.radius_y; ++dy) {
            const int ty = y + dy;
            if (ty < 0 || ty >= spec.height_cells) continue;
            for (int dx = -kernel.radius_x; dx <= kernel.radius_x; ++dx) {
              const int tx = x + dx;
              if (tx < 0 || tx >= spec.width_cells) continue;
              contribution[static_cast<size_t>(ty) * spec.width_cells + tx] +=
                  kernel.At(dx, dy);
            }
          }
        }
        std::vector<double>& grid = out[t].values();
        for (size_t i = 0; i < grid.size(); ++i) {
          const double c = std::min(1.0, hyp.likelihood * contribution[i]);
          grid[i] = 1.0 - (1.0 - grid[i]) * (1.0 - c);
        }
      }
    }
  }
  return out;
}

Prediction HypothesesToPrediction(const HypothesisSet& set) {
  set.Validate();
  std::array<std::vector<OccupancyGrid>, kNumAgentClasses> probabilities;
  std::array<std::vector<FlowField>, kNumAgentClasses> flows;
  for (int cls = 0; cls < kNumAgentClasses; ++cls) {
    std::vector<AgentHypotheses> class_agents;
    for (const AgentHypotheses& agent : set.agents) {
      if (agent.agent_class == static_cast<AgentClass>(cls)) {
        class_agents.push_back(agent);
      }
    }
    probabilities[cls] = TrajectoriesToOccupancy(class_agents, set.spec);
    flows[cls].assign(set.spec.num_waypoints, FlowField(set.spec));
  }
  return Prediction::FromProbabilities(set.spec, probabilities, flows);
}

std::string HypothesisSetToJson(const HypothesisSet& set) {
  set.Validate();
  nlohmann::json agents = nlohmann::json::array();
  for (const AgentHypotheses& agent : set.agents) {
    nlohmann::json hypotheses = nlohmann::json::array();
    for (const TrajectoryHypothesis& hyp : agent.hypotheses) {
      nlohmann::json waypoints = nlohmann::json::array();
      for (size_t i = 0; i < hyp.waypoints.size(); ++i) {
        const HypothesisWaypoint& wp = hyp.waypoints[i];
        waypoints.push_back(
            nlohmann::json{{"t", i + 1},
                           {"x", wp.center.x},
                           {"y", wp.center.y},
                           {"theta", wp.heading},
                           {"cov", {wp.cov_xx, wp.cov_xy, wp.cov_yy}}});
      }
      hypotheses.push_back(nlohmann::json{{"likelihood", hyp.likelihood},
                                          {"waypoints", std::move(waypoints)}});
    }
    agents.push_back(
        nlohmann::json{{"id", agent.agent_id},
                       {"class", AgentClassName(agent.agent_class)},
                       {"w", agent.width},
                       {"l", agent.length},
                       {"hypotheses", std::move(hypotheses)}});
  }
  const nlohmann::json doc{
      {"spec", nlohmann::json::parse(SpecToJsonText(set.spec))},
      {"agents", std::move(agents)}};
  return doc.dump(2) + "\n";
}

HypothesisSet HypothesisSetFromJson(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("invalid hypothesis JSON: ") +
                                e.what());
  }
  HypothesisSet set;
  try {
    set.spec = SpecFromJsonText(doc.at("spec").dump());
    for (const nlohmann::json& agent_doc : doc.at("agents")) {
      AgentHypotheses agent;
      agent.agent_id = agent_doc.at("id").get<uint32_t>();
      agent.agent_class =
          ParseAgentClass(agent_doc.at("class").get<std::string>());
      agent.width = agent_doc.at("w").get<double>();
      agent.length = agent_doc.at("l").get<double>();
      for (const nlohmann::json& hyp_doc : agent_doc.at("hypotheses")) {
        TrajectoryHypothesis hyp;
        hyp.likelihood = hyp_doc.at("likelihood").get<double>();
        int expected_t = 1;
        for (const nlohmann::json& wp_doc : hyp_doc.at("waypoints")) {
          if (wp_doc.at("t").get<int>() != expected_t++) {
            throw std::invalid_argument(
                "hypothesis waypoints must be consecutive from 1");
          }
          HypothesisWaypoint wp;
          wp.center = {wp_doc.at("x").get<double>(),
                       wp_doc.at("y").get<double>()};
          wp.heading = wp_doc.at("theta").get<double>();
          wp.cov_xx = wp_doc.at("cov").at(0).get<double>();
          wp.cov_xy = wp_doc.at("cov").at(1).get<double>();
          wp.cov_yy = wp_doc.at("cov").at(2).get<double>();
          hyp.waypoints.push_back(wp);
        }
        agent.hypotheses.push_back(std::move(hyp));
      }
      set.agents.push_back(std::move(agent));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("invalid hypothesis JSON: ") +
                                e.what());
  }
  set.Validate();
  return set;
}

void SaveHypothesisSet(const std::string& path, const HypothesisSet& set) {
  WriteTextAtomic(path, HypothesisSetToJson(set));
}

HypothesisSet LoadHypothesisSet(const std::string& path) {
  return HypothesisSetFromJson(ReadTextFile(path));
}

}  // namespace occflow
