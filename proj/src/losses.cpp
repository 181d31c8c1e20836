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
#include "occflow/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "occflow/warp.hpp"

namespace occflow {
namespace {

double Clip(double p) {
  return std::clamp(p, kProbabilityClip, 1.0 - kProbabilityClip);
}

// d/du of H(u, q) at the clipped value; the clip itself carries no gradient.
double CrossEntropySlope(double u, double q) {
  return (u - q) / (u * (1.0 - u));
}

void CheckPair(const Prediction& pred, const LabelSet& labels) {
  pred.Validate();
  if (!(pred.spec == labels.spec)) {
    throw std::invalid_argument("spec mismatch between prediction and labels");
  }
  if (labels.waypoints.size() != static_cast<size_t>(pred.spec.num_waypoints)) {
    throw std::invalid_argument("label waypoint count mismatch");
  }
}

}  // namespace

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double Logit(double p) {
  p = Clip(p);
  return std::log(p / (1.0 - p));
}

double CrossEntropy(double p, double q) {
  p = Clip(p);
  return -(q * std::log(p) + (1.0 - q) * std::log(1.0 - p));
}

double CrossEntropyFromLogit(double z, double q) {
  // Equals -(q ln sigmoid(z) + (1-q) ln sigmoid(-z)) without underflow.
  if (z >= 0.0) return (1.0 - q) * z + std::log1p(std::exp(-z));
  return -q * z + std::log1p(std::exp(z));
}

void Prediction::Validate() const {
  spec.Validate();
  for (int cls = 0; cls < kNumAgentClasses; ++cls) {
    const size_t t_count = static_cast<size_t>(spec.num_waypoints);
    if (logits[cls].size() != t_count || flows[cls].size() != t_count) {
      throw std::invalid_argument("prediction waypoint count mismatch");
    }
    for (const ValueGrid& grid : logits[cls]) {
      if (!(grid.spec() == spec)) {
        throw std::invalid_argument("prediction logit spec mismatch");
      }
      for (double z : grid.values()) {
        if (!std::isfinite(z)) {
          throw std::invalid_argument("prediction logit not finite");
        }
      }
    }
    for (const FlowField& flow : flows[cls]) {
      if (!(flow.spec() == spec)) {
        throw std::invalid_argument("prediction flow spec mismatch");
      }
      flow.ValidateFinite();
    }
  }
}

OccupancyGrid Prediction::Probabilities(AgentClass cls, size_t i) const {
  const std::vector<ValueGrid>& grids = logits[static_cast<int>(cls)];
  OccupancyGrid out(spec);
  for (size_t k = 0; k < out.values().size(); ++k) {
    out.values()[k] = Sigmoid(grids[i].values()[k]);
  }
  return out;
}

Prediction Prediction::FromProbabilities(
    const GridSpec& spec,
    const std::array<std::vector<OccupancyGrid>, kNumAgentClasses>&
        probabilities,
    const std::array<std::vector<FlowField>, kNumAgentClasses>& flows) {
  Prediction pred;
  pred.spec = spec;
  for (int cls = 0; cls < kNumAgentClasses; ++cls) {
    for (const OccupancyGrid& p : probabilities[cls]) {
      p.ValidateRange();
      ValueGrid z(spec);
      for (size_t k = 0; k < z.values().size(); ++k) {
        z.values()[k] = Logit(p.values()[k]);
      }
      pred.logits[cls].push_back(std::move(z));
    }
    pred.flows[cls] = flows[cls];
  }
  pred.Validate();
  return pred;
}

double OccupancyLoss(const Prediction& pred, const LabelSet& labels,
                     AgentClass cls) {
  CheckPair(pred, labels);
  const int c = static_cast<int>(cls);
  double sum = 0.0;
  for (size_t i = 0; i < pred.logits[c].size(); ++i) {
    const std::vector<double>& z = pred.logits[c][i].values();
    const std::vector<double>& q = labels.waypoints[i].occupancy.values();
    for (size_t k = 0; k < z.size(); ++k) {
      sum += CrossEntropyFromLogit(z[k], q[k]);
    }
  }
  return sum;
}

double FlowLoss(const Prediction& pred, const LabelSet& labels,
                AgentClass cls) {
  CheckPair(pred, labels);
  const int c = static_cast<int>(cls);
  const GridSpec& spec = pred.spec;
  double sum = 0.0;
  for (size_t i = 0; i < pred.flows[c].size(); ++i) {
    const LabeledFrame& frame = labels.waypoints[i];
    for (int y = 0; y < spec.height_cells; ++y) {
      for (int x = 0; x < spec.width_cells; ++x) {
        const double occ = frame.occupancy.at(x, y);
        if (occ == 0.0) continue;
        const Vec2 d = pred.flows[c][i].at(x, y) - frame.flow.at(x, y);
        sum += (std::abs(d.x) + std::abs(d.y)) * occ;
      }
    }
  }
  return sum;
}

double TraceLoss(const Prediction& pred, const LabelSet& labels,
                 AgentClass cls, int threads) {
  CheckPair(pred, labels);
  const int c = static_cast<int>(cls);
  const std::vector<WarpedOccupancy> trace = TraceFlow(
      labels.current.occupancy, labels.current.ids, pred.flows[c], threads);
  double sum = 0.0;
  for (size_t i = 0; i < trace.size(); ++i) {
    const OccupancyGrid probs = pred.Probabilities(cls, i);
    const std::vector<double>& w = trace[i].values.values();
    const std::vector<double>& q = labels.waypoints[i].occupancy.values();
    for (size_t k = 0; k < w.size(); ++k) {
      sum += CrossEntropy(w[k] * probs.values()[k], q[k]);
    }
  }
  return sum;
}

namespace {

LossReport BuildReport(const std::array<LossReport::Components,
                                        kNumAgentClasses>& per_class,
                       const GridSpec& spec, const LossWeights& weights) {
  LossReport report;
  report.per_class = per_class;
  const double norm = static_cast<double>(spec.CellCount()) *
                      static_cast<double>(spec.num_waypoints);
  for (int cls = 0; cls < kNumAgentClasses; ++cls) {
    const LossReport::Components& c = per_class[cls];
    report.l_occupancy += c.occupancy;
    report.l_flow += c.flow;
    report.l_trace += c.trace;
    report.total += (weights.lambda_occupancy * c.occupancy +
                     weights.lambda_flow * c.flow +
                     weights.lambda_trace * c.trace) /
                    norm;
  }
  return report;
}

}  // namespace

LossReport TotalLoss(const Prediction& pred,
                     const std::array<LabelSet, kNumAgentClasses>& labels,
                     const LossOptions& options) {
  std::array<LossReport::Components, kNumAgentClasses> per_class;
  for (int cls = 0; cls < kNumAgentClasses; ++cls) {
    const AgentClass c = static_cast<AgentClass>(cls);
    per_class[cls].occupancy = OccupancyLoss(pred, labels[cls], c);
    per_class[cls].flow = FlowLoss(pred, labels[cls], c);
    per_class[cls].trace = TraceLoss(pred, labels[cls], c, options.threads);
  }
  return BuildReport(per_class, pred.spec, options.weights);
}

std::string LossReport::ToJson() const {
  nlohmann::json per;
  for (int cls = 0; cls < kNumAgentClasses; ++cls) {
    per[AgentClassName(static_cast<AgentClass>(cls))] = {
        {"l_occupancy", per_class[cls].occupancy},
        {"l_flow", per_class[cls].flow},
        {"l_trace", per_class[cls].trace}};
  }
  const nlohmann::json doc{{"l_occupancy", l_occupancy},
                           {"l_flow", l_flow},
                           {"l_trace", l_trace},
                           {"total", total},
                           {"per_class", per}};
  return doc.dump(2) + "\n";
}

LossGradients LossGradientsOf(
    const Prediction& pred,
    const std::array<LabelSet, kNumAgentClasses>& labels,
    const LossOptions& options) {
  pred.Validate();
  const GridSpec& spec = pred.spec;
  const int h = spec.height_cells, w = spec.width_cells;
  const int t_count = spec.num_waypoints;
  const double norm =
      static_cast<double>(spec.CellCount()) * static_cast<double>(t_count);
  const double scale_o = options.weights.lambda_occupancy / norm;
  const double scale_f = options.weights.lambda_flow / norm;
  const double scale_w = options.weights.lambda_trace / norm;

  LossGradients out;
  std::array<LossReport::Components, kNumAgentClasses> per_class;

  for (int cls = 0; cls < kNumAgentClasses; ++cls) {
    const AgentClass agent_cls = static_cast<AgentClass>(cls);
    const LabelSet& lab = labels[cls];
    CheckPair(pred, lab);
    out.d_logits[cls].assign(t_count, ValueGrid(spec));
    out.d_flows[cls].assign(t_count, FlowField(spec));

    // Forward pass, keeping every warped grid for the reverse sweep.
    const std::vector<WarpedOccupancy> trace =
        TraceFlow(lab.current.occupancy, lab.current.ids, pred.flows[cls],
                  options.threads);
    std::vector<OccupancyGrid> probs;
    probs.reserve(t_count);
    for (int i = 0; i < t_count; ++i) {
      probs.push_back(pred.Probabilities(agent_cls, i));
    }

    // Occupancy and flow terms, plus the direct (per-waypoint) part of the
    // trace term; adjoints[i] collects dTotal/dW_{i+1}.
    std::vector<ValueGrid> adjoints(t_count, ValueGrid(spec));
    for (int i = 0; i < t_count; ++i) {
      const LabeledFrame& frame = lab.waypoints[i];
      const std::vector<double>& z = pred.logits[cls][i].values();
      const std::vector<double>& p = probs[i].values();
      const std::vector<double>& q = frame.occupancy.values();
      const std::vector<double>& wv = trace[i].values.values();
      std::vector<double>& dz = out.d_logits[cls][i].values();
      std::vector<double>& adj = adjoints[i].values();
      for (size_t k = 0; k < z.size(); ++k) {
        per_class[cls].occupancy += CrossEntropyFromLogit(z[k], q[k]);
        dz[k] += scale_o * (p[k] - q[k]);
        const double u = Clip(wv[k] * p[k]);
        per_class[cls].trace += CrossEntropy(u, q[k]);
        const double slope = scale_w * CrossEntropySlope(u, q[k]);
        dz[k] += slope * wv[k] * p[k] * (1.0 - p[k]);
        adj[k] = slope * p[k];
      }
      FlowField& df = out.d_flows[cls][i];
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double occ = frame.occupancy.at(x, y);
          if (occ == 0.0) continue;
          const Vec2 d = pred.flows[cls][i].at(x, y) - frame.flow.at(x, y);
          per_class[cls].flow += (std::abs(d.x) + std::abs(d.y)) * occ;
          const auto sign = [](double v) {
            return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
          };
          df.set(x, y, {scale_f * sign(d.x) * occ, scale_f * sign(d.y) * occ});
        }
      }
    }

    // Reverse sweep through the warp chain.  Each destination cell of warp
    // step i feeds its four source corners (the adjoint of the bilinear
    // gather) and its own flow vector; with the detach option the trace term
    // stops influencing flows entirely.
    if (!options.detach_trace_from_flow) {
      for (int i = t_count - 1; i >= 0; --i) {
        const OccupancyGrid& prev_values =
            i == 0 ? lab.current.occupancy : trace[i - 1].values;
        const std::span<const double> prev_span(prev_values.values());
        ValueGrid* prev_adj = i == 0 ? nullptr : &adjoints[i - 1];
        FlowField& df = out.d_flows[cls][i];
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            const double g = adjoints[i].at(x, y);
            if (g == 0.0) continue;
            const Vec2 f = pred.flows[cls][i].at(x, y);
            const Vec2 p{x + f.x, y + f.y};
            const Vec2 dpos = BilinearPositionGradient(prev_span, h, w, p);
            const Vec2 cur = df.at(x, y);
            df.set(x, y, {cur.x + g * dpos.x, cur.y + g * dpos.y});
            if (prev_adj == nullptr) continue;
            const BilinearCorners corners = CornersAt(h, w, p);
            if (!corners.valid) continue;
            for (int k = 0; k < 4; ++k) {
              const int cx = corners.x0 + (k & 1);
              const int cy = corners.y0 + (k >> 1);
              if (cx < 0 || cx >= w || cy < 0 || cy >= h) continue;
              prev_adj->at(cx, cy) += g * corners.weight[k];
            }
          }
        }
      }
    }

  }

  out.report = BuildReport(per_class, spec, options.weights);
  return out;
}

}  // namespace occflow
