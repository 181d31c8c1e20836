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
// Training objective: cross-entropy occupancy loss, occupancy-masked L1 flow
// loss, and the warped-occupancy trace loss, with analytic gradients for all
// of them, including reverse accumulation through the warp recursion.

#pragma once

#include <array>
#include <string>
#include <vector>

#include "occflow/labels.hpp"

namespace occflow {

// Probabilities are clipped into [kProbabilityClip, 1 - kProbabilityClip]
// before every logarithm and when converting probabilities to logits.
inline constexpr double kProbabilityClip = 1e-7;

double Sigmoid(double z);
// Logit of p after clipping; finite for every input in [0, 1].
double Logit(double p);
// H(p, q) = -(q ln p + (1 - q) ln(1 - p)) with p clipped.
double CrossEntropy(double p, double q);
// Same value computed stably from the logit of p (no clipping needed).
double CrossEntropyFromLogit(double z, double q);

struct LossWeights {
  double lambda_occupancy = 1000.0;
  double lambda_flow = 1.0;
  double lambda_trace = 1000.0;
};

// Predicted occupancy is stored as logits so probabilities stay inside the
// open interval (0, 1); flows are dense backward-flow fields in cell units.
// Index [cls][i] holds waypoint i + 1.
struct Prediction {
  GridSpec spec;
  std::array<std::vector<ValueGrid>, kNumAgentClasses> logits;
  std::array<std::vector<FlowField>, kNumAgentClasses> flows;

  // Throws std::invalid_argument when counts, specs or finiteness are off.
  void Validate() const;
  // Sigmoid of the stored logits for waypoint index i (0-based).
  OccupancyGrid Probabilities(AgentClass cls, size_t i) const;
  // Clips every probability and stores its logit; flows are copied as is.
  static Prediction FromProbabilities(
      const GridSpec& spec,
      const std::array<std::vector<OccupancyGrid>, kNumAgentClasses>&
          probabilities,
      const std::array<std::vector<FlowField>, kNumAgentClasses>& flows);
};

struct LossOptions {
  LossWeights weights;
  // When set, the trace loss contributes no flow gradients: the warped
  // occupancy is treated as a constant multiplier of the predicted
  // occupancy.
  bool detach_trace_from_flow = false;
  int threads = 1;
};

struct LossReport {
  struct Components {
    double occupancy = 0.0;
    double flow = 0.0;
    double trace = 0.0;
  };
  std::array<Components, kNumAgentClasses> per_class;  // raw sums
  // Raw sums over classes, before weighting and normalization.
  double l_occupancy = 0.0;
  double l_flow = 0.0;
  double l_trace = 0.0;
  // Weighted combination, normalized by h * w * num_waypoints.
  double total = 0.0;

  std::string ToJson() const;
};

// Raw (unweighted, unnormalized) per-class sums.  Specs must match.
// Sum over waypoints and cells of H(sigmoid(logit), label occupancy).
double OccupancyLoss(const Prediction& pred, const LabelSet& labels,
                     AgentClass cls);
// Sum of the L1 flow error, masked by label occupancy.
double FlowLoss(const Prediction& pred, const LabelSet& labels,
                AgentClass cls);
// Warps the label's current occupancy along the predicted flows and sums
// H(clip(warped * predicted occupancy), label occupancy).
double TraceLoss(const Prediction& pred, const LabelSet& labels,
                 AgentClass cls, int threads = 1);

LossReport TotalLoss(const Prediction& pred,
                     const std::array<LabelSet, kNumAgentClasses>& labels,
                     const LossOptions& options = {});

// Gradients of the combined (weighted, normalized) loss with respect to
// every occupancy logit and both components of every flow vector.
struct LossGradients {
  std::array<std::vector<ValueGrid>, kNumAgentClasses> d_logits;
  std::array<std::vector<FlowField>, kNumAgentClasses> d_flows;
  LossReport report;
};

// The trace-loss term backpropagates through the warp recursion: each
// destination cell's gradient flows to its four source corners and, through
// the bilinear weights, to the flow vector that chose the sample point, so a
// flow at waypoint s accumulates gradient from every later waypoint.
// Clipping is treated as constant (straight-through) and on lattice lines
// the left/lower interval's derivative is used.  Single-threaded adjoint;
// deterministic.
LossGradients LossGradientsOf(
    const Prediction& pred,
    const std::array<LabelSet, kNumAgentClasses>& labels,
    const LossOptions& options = {});

}  // namespace occflow
