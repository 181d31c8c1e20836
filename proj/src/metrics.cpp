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
#include "occflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace occflow {
namespace {

void CheckSpecs(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw std::invalid_argument("spec mismatch between metric inputs");
}

std::optional<double> GetMetric(const WaypointMetrics& m, int index) {
  switch (index) {
    case 0: return m.auc;
    case 1: return m.soft_iou;
    case 2: return m.epe;
    case 3: return m.id_recall;
    case 4: return m.ft_auc;
    default: return m.ft_iou;
  }
}

void SetMetric(WaypointMetrics& m, int index, std::optional<double> v) {
  switch (index) {
    case 0: m.auc = v; break;
    case 1: m.soft_iou = v; break;
    case 2: m.epe = v; break;
    case 3: m.id_recall = v; break;
    case 4: m.ft_auc = v; break;
    default: m.ft_iou = v; break;
  }
}

}  // namespace

std::optional<double> Auc(const OccupancyGrid& pred,
                          const OccupancyGrid& label, int thresholds) {
  CheckSpecs(pred.spec(), label.spec());
  if (thresholds < 2) throw std::invalid_argument("need >= 2 thresholds");
  const std::vector<double>& p = pred.values();
  const std::vector<double>& q = label.values();
  long positives = 0;
  for (double v : q) positives += v != 0.0;
  if (positives == 0) return std::nullopt;

  // PR point per threshold; thresholds that predict nothing have undefined
  // precision and are skipped.
  std::vector<std::pair<double, double>> points;  // (recall, precision)
  points.reserve(thresholds + 1);
  double anchor_precision = 0.0;
  bool any = false;
  for (int i = 0; i < thresholds; ++i) {
    const double tau =
        static_cast<double>(i) / static_cast<double>(thresholds - 1);
    long predicted = 0, true_positive = 0;
    for (size_t k = 0; k < p.size(); ++k) {
      if (p[k] >= tau) {
        ++predicted;
        true_positive += q[k] != 0.0;
      }
    }
    if (predicted == 0) continue;
    const double precision =
        static_cast<double>(true_positive) / static_cast<double>(predicted);
    const double recall =
        static_cast<double>(true_positive) / static_cast<double>(positives);
    points.emplace_back(recall, precision);
    anchor_precision = precision;  // last defined = highest threshold
    any = true;
  }
  if (!any) return 0.0;  // pred below every threshold including 0: no curve
  points.emplace_back(0.0, anchor_precision);

  std::sort(points.begin(), points.end());
  // Recalls share the denominator `positives`, so equal recalls compare
  // exactly; keep the best precision per recall.
  std::vector<std::pair<double, double>> curve;
  for (const auto& pt : points) {
    if (!curve.empty() && curve.back().first == pt.first) {
      curve.back().second = std::max(curve.back().second, pt.second);
    } else {
      curve.push_back(pt);
    }
  }
  double area = 0.0;
  for (size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].first - curve[i - 1].first) *
            (curve[i].second + curve[i - 1].second) * 0.5;
  }
  return area;
}

double SoftIou(const OccupancyGrid& pred, const OccupancyGrid& label) {
  CheckSpecs(pred.spec(), label.spec());
  double inter = 0.0, uni = 0.0;
  for (size_t k = 0; k < pred.values().size(); ++k) {
    const double a = pred.values()[k], b = label.values()[k];
    inter += a * b;
    uni += a + b - a * b;
  }
  return uni == 0.0 ? 0.0 : inter / uni;
}

std::optional<double> Epe(const FlowField& pred, const FlowField& label,
                          const OccupancyGrid& label_occupancy) {
  CheckSpecs(pred.spec(), label.spec());
  CheckSpecs(pred.spec(), label_occupancy.spec());
  const GridSpec& spec = pred.spec();
  double sum = 0.0;
  long count = 0;
  for (int y = 0; y < spec.height_cells; ++y) {
    for (int x = 0; x < spec.width_cells; ++x) {
      if (label_occupancy.at(x, y) == 0.0) continue;
      sum += (pred.at(x, y) - label.at(x, y)).Norm();
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

std::optional<double> IdRecall(const IdGrid& trace_ids,
                               const IdGrid& label_ids) {
  CheckSpecs(trace_ids.spec(), label_ids.spec());
  long labeled = 0, matched = 0;
  for (size_t k = 0; k < label_ids.ids().size(); ++k) {
    const uint32_t want = label_ids.ids()[k];
    if (want == 0) continue;
    ++labeled;
    matched += trace_ids.ids()[k] == want;
  }
  if (labeled == 0) return std::nullopt;
  return static_cast<double>(matched) / static_cast<double>(labeled);
}

FlowTracedPair FlowTracedMetrics(const OccupancyGrid& warped,
                                 const OccupancyGrid& predicted,
                                 const OccupancyGrid& label, int thresholds) {
  CheckSpecs(warped.spec(), predicted.spec());
  OccupancyGrid product(warped.spec());
  for (size_t k = 0; k < product.values().size(); ++k) {
    product.values()[k] = warped.values()[k] * predicted.values()[k];
  }
  return {Auc(product, label, thresholds), SoftIou(product, label)};
}

MetricReport Evaluate(const Prediction& pred,
                      const std::array<LabelSet, kNumAgentClasses>& labels,
                      int threads, int thresholds) {
  pred.Validate();
  MetricReport report;
  for (int cls = 0; cls < kNumAgentClasses; ++cls) {
    const LabelSet& lab = labels[cls];
    CheckSpecs(pred.spec, lab.spec);
    if (lab.waypoints.size() != static_cast<size_t>(pred.spec.num_waypoints)) {
      throw std::invalid_argument("label waypoint count mismatch");
    }
    const std::vector<WarpedOccupancy> trace = TraceFlow(
        lab.current.occupancy, lab.current.ids, pred.flows[cls], threads);
    ClassMetrics& out = report.per_class[cls];
    for (size_t i = 0; i < lab.waypoints.size(); ++i) {
      const LabeledFrame& frame = lab.waypoints[i];
      const OccupancyGrid probs =
          pred.Probabilities(static_cast<AgentClass>(cls), i);
      WaypointMetrics m;
      m.auc = Auc(probs, frame.occupancy, thresholds);
      m.soft_iou = SoftIou(probs, frame.occupancy);
      m.epe = Epe(pred.flows[cls][i], frame.flow, frame.occupancy);
      m.id_recall = IdRecall(trace[i].ids, frame.ids);
      const FlowTracedPair ft =
          FlowTracedMetrics(trace[i].values, probs, frame.occupancy,
                            thresholds);
      m.ft_auc = ft.auc;
      m.ft_iou = ft.iou;
      out.waypoints.push_back(m);
    }
    for (int metric = 0; metric < 6; ++metric) {
      double sum = 0.0;
      int present = 0;
      for (const WaypointMetrics& m : out.waypoints) {
        if (const auto v = GetMetric(m, metric)) {
          sum += *v;
          ++present;
        }
      }
      out.skipped[metric] =
          static_cast<int>(out.waypoints.size()) - present;
      SetMetric(out.mean, metric,
                present > 0 ? std::optional<double>(sum / present)
                            : std::nullopt);
    }
  }
  return report;
}

namespace {

nlohmann::json MetricsJson(const WaypointMetrics& m) {
  nlohmann::json j;
  for (int i = 0; i < 6; ++i) {
    const auto v = GetMetric(m, i);
    j[kMetricNames[i]] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  }
  return j;
}

std::string NumberText(double v) { return nlohmann::json(v).dump(); }

}  // namespace

std::string MetricReport::ToJson() const {
  nlohmann::json doc;
  for (int cls = 0; cls < kNumAgentClasses; ++cls) {
    const ClassMetrics& c = per_class[cls];
    nlohmann::json node;
    for (size_t i = 0; i < c.waypoints.size(); ++i) {
      node[std::to_string(i + 1)] = MetricsJson(c.waypoints[i]);
    }
    node["mean"] = MetricsJson(c.mean);
    nlohmann::json skipped;
    for (int i = 0; i < 6; ++i) skipped[kMetricNames[i]] = c.skipped[i];
    node["skipped"] = skipped;
    doc[AgentClassName(static_cast<AgentClass>(cls))] = node;
  }
  return doc.dump(2) + "\n";
}

std::string MetricReport::ToCsv() const {
  std::ostringstream out;
  out << "class,t,auc,soft_iou,epe,id_recall,ft_auc,ft_iou\n";
  const auto row = [&out](const std::string& cls, const std::string& t,
                          const WaypointMetrics& m) {
    out << cls << ',' << t;
    for (int i = 0; i < 6; ++i) {
      out << ',';
      if (const auto v = GetMetric(m, i)) out << NumberText(*v);
    }
    out << '\n';
  };
  for (int cls = 0; cls < kNumAgentClasses; ++cls) {
    const std::string name = AgentClassName(static_cast<AgentClass>(cls));
    const ClassMetrics& c = per_class[cls];
    for (size_t i = 0; i < c.waypoints.size(); ++i) {
      row(name, std::to_string(i + 1), c.waypoints[i]);
    }
    row(name, "mean", c.mean);
  }
  return out.str();
}

}  // namespace occflow
