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
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace occflow {
namespace {

// ---------------------------------------------------------------------------
// Brute-force re-implementations used as oracles.  They follow the documented
// semantics (threshold sweep, undefined-precision skipping, recall-0 anchor,
// max-precision deduplication, trapezoid over recall) with a different code
// structure: a recall-keyed map instead of sort-and-scan.
// ---------------------------------------------------------------------------

std::optional<double> OracleAuc(const std::vector<double>& pred,
                                const std::vector<double>& label, int n) {
  long positives = 0;
  for (double q : label) positives += q != 0.0;
  if (positives == 0) return std::nullopt;

  std::map<double, double> best;  // recall -> best precision
  double anchor = 0.0;
  bool any = false;
  for (int i = 0; i < n; ++i) {
    const double tau = double(i) / double(n - 1);
    long predicted = 0, hits = 0;
    for (size_t k = 0; k < pred.size(); ++k) {
      if (pred[k] >= tau) {
        ++predicted;
        hits += label[k] != 0.0;
      }
    }
    if (predicted == 0) continue;
    any = true;
    const double precision = double(hits) / double(predicted);
    const double recall = double(hits) / double(positives);
    auto [it, fresh] = best.emplace(recall, precision);
    if (!fresh) it->second = std::max(it->second, precision);
    anchor = precision;
  }
  if (!any) return 0.0;
  auto [it, fresh] = best.emplace(0.0, anchor);
  if (!fresh) it->second = std::max(it->second, anchor);

  double area = 0.0;
  auto prev = best.begin();
  for (auto cur = std::next(best.begin()); cur != best.end(); ++cur) {
    area += (cur->first - prev->first) * (cur->second + prev->second) * 0.5;
    prev = cur;
  }
  return area;
}

double OracleSoftIou(const std::vector<double>& pred,
                     const std::vector<double>& label) {
  double inter = 0.0, uni = 0.0;
  for (size_t k = 0; k < pred.size(); ++k) {
    inter += pred[k] * label[k];
    uni += pred[k] + label[k] - pred[k] * label[k];
  }
  return uni == 0.0 ? 0.0 : inter / uni;
}

GridSpec TestSpec(int h = 8, int w = 8, int waypoints = 1) {
  GridSpec spec;
  spec.height_cells = h;
  spec.width_cells = w;
  spec.cell_size = 0.5;
  spec.origin = {0.0, 0.0};
  spec.num_waypoints = waypoints;
  spec.input_steps = 1;
  spec.aggregation_factor = 1;
  return spec;
}

OccupancyGrid GridOf(const GridSpec& spec, const std::vector<double>& v) {
  OccupancyGrid g(spec);
  g.values() = v;
  return g;
}

// A vehicle translating one whole cell per step: the flow trace is an exact
// shift, so every trace-dependent metric has a closed-form perfect value.
Scenario CellSpeedScenario(const GridSpec& spec) {
  AgentTrack track;
  track.agent_id = 7;
  track.agent_class = AgentClass::kVehicle;
  track.first_step = spec.FirstStep();
  for (int t = spec.FirstStep(); t <= spec.FutureSteps(); ++t) {
    AgentState s;
    s.center = Vec2{2.0, 2.0} + Vec2{0.5, 0.0} * double(t);
    s.heading = 0.0;
    s.width = 0.6;
    s.length = 1.0;
    s.valid = true;
    track.states.push_back(s);
  }
  Scenario scenario;
  scenario.spec = spec;
  scenario.step_duration = 0.1;
  scenario.tracks = {track};
  return scenario;
}

std::array<LabelSet, kNumAgentClasses> ScenarioLabels(
    const Scenario& scenario) {
  return {BuildLabels(scenario, AgentClass::kVehicle, LabelMode::kAll),
          BuildLabels(scenario, AgentClass::kPedestrian, LabelMode::kAll)};
}

Prediction PerfectPrediction(
    const GridSpec& spec,
    const std::array<LabelSet, kNumAgentClasses>& labels) {
  std::array<std::vector<OccupancyGrid>, kNumAgentClasses> probs;
  std::array<std::vector<FlowField>, kNumAgentClasses> flows;
  for (int cls = 0; cls < kNumAgentClasses; ++cls) {
    for (const LabeledFrame& frame : labels[cls].waypoints) {
      probs[cls].push_back(frame.occupancy);
      flows[cls].push_back(frame.flow);
    }
  }
  return Prediction::FromProbabilities(spec, probs, flows);
}

TEST_CASE("auc examples with closed-form areas") {
  const GridSpec spec = TestSpec();
  Rng rng(101);
  OccupancyGrid label(spec);
  for (double& q : label.values()) q = rng.Uniform() < 0.4 ? 1.0 : 0.0;
  label.at(0, 0) = 1.0;  // guarantee a positive
  long positives = 0;
  for (double q : label.values()) positives += q != 0.0;
  const double rate = double(positives) / double(spec.CellCount());

  // A perfect predictor scores 1.
  CHECK(*Auc(label, label) == 1.0);
  // An inverted predictor degenerates to the anchored triangle of height
  // equal to the base rate.
  OccupancyGrid inverted(spec);
  for (size_t k = 0; k < label.values().size(); ++k) {
    inverted.values()[k] = 1.0 - label.values()[k];
  }
  CHECK(*Auc(inverted, label) == doctest::Approx(rate / 2.0).epsilon(1e-12));
  CHECK(*Auc(inverted, label) ==
        doctest::Approx(*OracleAuc(inverted.values(), label.values(), 100))
            .epsilon(1e-12));

  // A constant 0.5 yields a single effective point at the base rate.
  OccupancyGrid flat(spec, 0.5);
  OccupancyGrid half(spec);
  for (int i = 0; i < spec.CellCount() / 2; ++i) half.values()[i] = 1.0;
  CHECK(*Auc(flat, half) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(*Auc(flat, half) ==
        doctest::Approx(*OracleAuc(flat.values(), half.values(), 100))
            .epsilon(1e-12));

  // No positives anywhere: the metric is absent, not zero or NaN.
  CHECK(!Auc(label, OccupancyGrid(spec)).has_value());
  CHECK(!OracleAuc(label.values(), OccupancyGrid(spec).values(), 100)
             .has_value());

  CHECK_THROWS_WITH_AS(Auc(label, label, 1), "need >= 2 thresholds",
                       std::invalid_argument);
}

TEST_CASE("auc matches the brute-force sweep on random grids") {
  const GridSpec spec = TestSpec();
  Rng rng(202);
  int defined = 0;
  for (int instance = 0; instance < 50; ++instance) {
    OccupancyGrid pred(spec);
    OccupancyGrid label(spec);
    const bool lattice = instance % 2 == 0;
    for (size_t k = 0; k < pred.values().size(); ++k) {
      const double u = rng.Uniform();
      pred.values()[k] = lattice ? std::round(u * 99.0) / 99.0 : u;
      label.values()[k] = rng.Uniform() < 0.3 ? 1.0 : 0.0;
    }
    const auto got = Auc(pred, label);
    const auto want = OracleAuc(pred.values(), label.values(), 100);
    REQUIRE(got.has_value() == want.has_value());
    if (got) {
      CHECK(*got == doctest::Approx(*want).epsilon(1e-9));
      CHECK(*got >= 0.0);
      CHECK(*got <= 1.0);
      ++defined;
    }
  }
  CHECK(defined > 40);
}

TEST_CASE("auc is invariant under an affine squeeze of ranked values") {
  // Values on the coarse lattice {0, 1/2, 1} are separated by the same
  // threshold groups before and after p -> p/2 + 1/4, so the areas agree
  // exactly.
  const GridSpec spec = TestSpec();
  Rng rng(303);
  for (int instance = 0; instance < 20; ++instance) {
    OccupancyGrid pred(spec);
    OccupancyGrid mapped(spec);
    OccupancyGrid label(spec);
    for (size_t k = 0; k < pred.values().size(); ++k) {
      pred.values()[k] = 0.5 * rng.UniformInt(0, 2);
      mapped.values()[k] = 0.5 * pred.values()[k] + 0.25;
      label.values()[k] = rng.Uniform() < 0.35 ? 1.0 : 0.0;
    }
    label.at(3, 3) = 1.0;
    CHECK(*Auc(pred, label) == *Auc(mapped, label));
  }
}

TEST_CASE("soft iou closed forms") {
  const GridSpec spec = TestSpec(2, 2, 1);
  // Identical binary grids score 1.
  const OccupancyGrid a = GridOf(spec, {1.0, 0.0, 1.0, 0.0});
  CHECK(SoftIou(a, a) == 1.0);
  // Disjoint supports score 0.
  const OccupancyGrid b = GridOf(spec, {0.0, 1.0, 0.0, 1.0});
  CHECK(SoftIou(a, b) == 0.0);
  // Single cell, half confidence: 0.5 / (0.5 + 1 - 0.5).
  CHECK(SoftIou(GridOf(spec, {0.5, 0.0, 0.0, 0.0}),
                GridOf(spec, {1.0, 0.0, 0.0, 0.0})) == 0.5);
  // Empty against empty: defined as 0.
  CHECK(SoftIou(OccupancyGrid(spec), OccupancyGrid(spec)) == 0.0);
  // Self-similarity reaches 1 only for binary grids.
  CHECK(SoftIou(GridOf(spec, {0.5, 0.5, 0.0, 0.0}),
                GridOf(spec, {0.5, 0.5, 0.0, 0.0})) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("soft iou is symmetric and matches the oracle") {
  const GridSpec spec = TestSpec();
  Rng rng(404);
  for (int instance = 0; instance < 30; ++instance) {
    OccupancyGrid a(spec), b(spec);
    for (size_t k = 0; k < a.values().size(); ++k) {
      a.values()[k] = rng.Uniform();
      b.values()[k] = rng.Uniform() < 0.5 ? 0.0 : rng.Uniform();
    }
    CHECK(SoftIou(a, b) == SoftIou(b, a));
    CHECK(SoftIou(a, b) ==
          doctest::Approx(OracleSoftIou(a.values(), b.values()))
              .epsilon(1e-12));
  }
}

TEST_CASE("end-point error masks by label occupancy") {
  const GridSpec spec = TestSpec(3, 3, 1);
  FlowField pred(spec), label(spec);
  OccupancyGrid occ(spec);

  // No occupied cell: absent.
  CHECK(!Epe(pred, label, occ).has_value());

  // One occupied cell with a 3-4-5 error.
  occ.at(1, 1) = 1.0;
  pred.set(1, 1, {3.0, -4.0});
  CHECK(*Epe(pred, label, occ) == doctest::Approx(5.0).epsilon(1e-12));

  // Errors on unoccupied cells are invisible.
  pred.set(0, 0, {100.0, 100.0});
  CHECK(*Epe(pred, label, occ) == doctest::Approx(5.0).epsilon(1e-12));
  pred.set(1, 1, {0.0, 0.0});
  CHECK(*Epe(pred, label, occ) == 0.0);

  // Two occupied cells average their L2 errors.
  occ.at(2, 2) = 1.0;
  pred.set(1, 1, {1.0, 0.0});
  pred.set(2, 2, {0.0, 2.0});
  CHECK(*Epe(pred, label, occ) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("end-point error is translation invariant") {
  const GridSpec spec = TestSpec();
  Rng rng(505);
  FlowField pred(spec), label(spec);
  OccupancyGrid occ(spec);
  for (int y = 0; y < spec.height_cells; ++y) {
    for (int x = 0; x < spec.width_cells; ++x) {
      pred.set(x, y, {rng.Uniform(-2, 2), rng.Uniform(-2, 2)});
      label.set(x, y, {rng.Uniform(-2, 2), rng.Uniform(-2, 2)});
      occ.at(x, y) = rng.Uniform() < 0.5 ? 1.0 : 0.0;
    }
  }
  occ.at(0, 0) = 1.0;
  const double base = *Epe(pred, label, occ);
  const Vec2 shift{1.75, -0.6};
  FlowField pred2 = pred, label2 = label;
  for (int y = 0; y < spec.height_cells; ++y) {
    for (int x = 0; x < spec.width_cells; ++x) {
      pred2.set(x, y, pred.at(x, y) + shift);
      label2.set(x, y, label.at(x, y) + shift);
    }
  }
  CHECK(*Epe(pred2, label2, occ) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("id recall counts matches over labeled cells") {
  const GridSpec spec = TestSpec(2, 2, 1);
  IdGrid label(spec), trace(spec);

  CHECK(!IdRecall(trace, label).has_value());  // nothing labeled

  label.ids() = {1, 1, 2, 2};
  trace.ids() = {1, 1, 2, 2};
  CHECK(*IdRecall(trace, label) == 1.0);

  trace.ids() = {0, 0, 0, 0};
  CHECK(*IdRecall(trace, label) == 0.0);

  // Half right by hand: one correct per agent, one wrong, one missing.
  trace.ids() = {1, 3, 0, 2};
  CHECK(*IdRecall(trace, label) == 0.5);

  // Spurious trace ids on unlabeled cells are not penalized.
  label.ids() = {1, 0, 0, 0};
  trace.ids() = {1, 9, 9, 9};
  CHECK(*IdRecall(trace, label) == 1.0);
}

TEST_CASE("flow-traced metrics multiply the trace into the prediction") {
  const GridSpec spec = TestSpec();
  Rng rng(606);
  OccupancyGrid pred(spec), label(spec);
  for (size_t k = 0; k < pred.values().size(); ++k) {
    pred.values()[k] = rng.Uniform();
    label.values()[k] = rng.Uniform() < 0.4 ? 1.0 : 0.0;
  }
  label.at(2, 2) = 1.0;

  // An all-ones trace changes nothing.
  const FlowTracedPair same =
      FlowTracedMetrics(OccupancyGrid(spec, 1.0), pred, label);
  CHECK(*same.auc == *Auc(pred, label));
  CHECK(same.iou == SoftIou(pred, label));

  // An all-zero trace erases the prediction: the intersection is empty and
  // the PR sweep collapses to the base-rate point.
  long positives = 0;
  for (double q : label.values()) positives += q != 0.0;
  const double rate = double(positives) / double(spec.CellCount());
  const FlowTracedPair none =
      FlowTracedMetrics(OccupancyGrid(spec), pred, label);
  CHECK(none.iou == 0.0);
  CHECK(*none.auc == doctest::Approx(rate).epsilon(1e-12));
}

TEST_CASE("the traced product never exceeds the predicted occupancy") {
  const GridSpec spec = TestSpec(16, 16, 3);
  const Scenario scenario = CellSpeedScenario(spec);
  const auto labels = ScenarioLabels(scenario);
  const Prediction pred = PerfectPrediction(spec, labels);
  const std::vector<WarpedOccupancy> trace =
      TraceFlow(labels[0].current.occupancy, labels[0].current.ids,
                pred.flows[0]);
  for (int i = 0; i < spec.num_waypoints; ++i) {
    const OccupancyGrid probs = pred.Probabilities(AgentClass::kVehicle, i);
    for (size_t k = 0; k < probs.values().size(); ++k) {
      const double w = trace[i].values.values()[k];
      CHECK(w >= 0.0);
      CHECK(w <= 1.0);
      CHECK(w * probs.values()[k] <= probs.values()[k]);
    }
  }
}

TEST_CASE("evaluating a perfect prediction is perfect everywhere") {
  const GridSpec spec = TestSpec(16, 16, 3);
  const Scenario scenario = CellSpeedScenario(spec);
  const auto labels = ScenarioLabels(scenario);
  const Prediction pred = PerfectPrediction(spec, labels);
  const MetricReport report = Evaluate(pred, labels);

  const ClassMetrics& vehicle = report.per_class[0];
  REQUIRE(vehicle.waypoints.size() == 3);
  double plain_iou = 0.0, traced_iou = 0.0;
  for (const WaypointMetrics& m : vehicle.waypoints) {
    CHECK(*m.auc == 1.0);
    CHECK(*m.soft_iou == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(*m.epe == 0.0);
    CHECK(*m.id_recall == 1.0);
    CHECK(*m.ft_auc == 1.0);
    CHECK(*m.ft_iou == doctest::Approx(1.0).epsilon(1e-5));
    // With the trace covering every labeled cell, tracing can only shave
    // clipped background confidence off the union.
    CHECK(*m.ft_iou >= *m.soft_iou - 1e-12);
    plain_iou = *m.soft_iou;
    traced_iou = *m.ft_iou;
  }
  CHECK(traced_iou >= plain_iou - 1e-12);
  CHECK(*vehicle.mean.auc == 1.0);
  CHECK(*vehicle.mean.epe == 0.0);
  for (int metric = 0; metric < 6; ++metric) {
    CHECK(vehicle.skipped[metric] == 0);
  }

  // The pedestrian class is empty: label-dependent metrics are absent and
  // counted as skipped; the overlap ratios are defined (and zero) because
  // the clipped prediction still has mass.
  const ClassMetrics& pedestrian = report.per_class[1];
  for (const WaypointMetrics& m : pedestrian.waypoints) {
    CHECK(!m.auc.has_value());
    CHECK(!m.epe.has_value());
    CHECK(!m.id_recall.has_value());
    CHECK(!m.ft_auc.has_value());
    CHECK(*m.soft_iou == 0.0);
    CHECK(*m.ft_iou == 0.0);
  }
  CHECK(pedestrian.skipped[0] == 3);
  CHECK(pedestrian.skipped[1] == 0);
  CHECK(pedestrian.skipped[2] == 3);
  CHECK(pedestrian.skipped[3] == 3);
  CHECK(pedestrian.skipped[4] == 3);
  CHECK(pedestrian.skipped[5] == 0);
  CHECK(!pedestrian.mean.auc.has_value());
  CHECK(*pedestrian.mean.soft_iou == 0.0);
}

TEST_CASE("evaluation is independent of the thread count") {
  const GridSpec spec = TestSpec(16, 16, 3);
  const Scenario scenario = CellSpeedScenario(spec);
  const auto labels = ScenarioLabels(scenario);
  const Prediction pred = PerfectPrediction(spec, labels);
  const std::string one = Evaluate(pred, labels, /*threads=*/1).ToCsv();
  const std::string four = Evaluate(pred, labels, /*threads=*/4).ToCsv();
  CHECK(one == four);
}

TEST_CASE("report serialization carries every cell of the table") {
  const GridSpec spec = TestSpec(16, 16, 3);
  const Scenario scenario = CellSpeedScenario(spec);
  const auto labels = ScenarioLabels(scenario);
  const MetricReport report =
      Evaluate(PerfectPrediction(spec, labels), labels);

  const nlohmann::json doc = nlohmann::json::parse(report.ToJson());
  for (const char* cls : {"vehicle", "pedestrian"}) {
    REQUIRE(doc.contains(cls));
    for (const char* key : {"1", "2", "3", "mean", "skipped"}) {
      CHECK(doc[cls].contains(key));
    }
    for (const char* name : kMetricNames) {
      CHECK(doc[cls]["1"].contains(name));
    }
  }
  CHECK(doc["vehicle"]["1"]["auc"].get<double>() == 1.0);
  CHECK(doc["pedestrian"]["1"]["auc"].is_null());
  CHECK(doc["pedestrian"]["skipped"]["auc"].get<int>() == 3);

  const std::string csv = report.ToCsv();
  std::istringstream lines(csv);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "class,t,auc,soft_iou,epe,id_recall,ft_auc,ft_iou");
  int rows = 0;
  std::map<std::string, int> values_per_step;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 7);
    std::istringstream fields(line);
    std::string cls, t;
    std::getline(fields, cls, ',');
    std::getline(fields, t, ',');
    std::string field;
    while (std::getline(fields, field, ',')) {
      if (!field.empty()) values_per_step[t] += 1;
    }
  }
  // One row per class and waypoint plus one mean row per class.
  CHECK(rows == 2 * (3 + 1));
  // Each waypoint line carries 6 metric slots per class: 12 table cells per
  // step across the two classes; the empty pedestrian class leaves its
  // absent entries blank (4 of 6 per row here).
  for (const char* t : {"1", "2", "3"}) {
    CHECK(values_per_step[t] == 6 + 2);
  }
}

TEST_CASE("metric inputs must share one grid") {
  const GridSpec spec = TestSpec();
  GridSpec other = spec;
  other.cell_size = 0.25;
  CHECK_THROWS_WITH_AS(Auc(OccupancyGrid(spec), OccupancyGrid(other)),
                       "spec mismatch between metric inputs",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(SoftIou(OccupancyGrid(spec), OccupancyGrid(other)),
                       "spec mismatch between metric inputs",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      Epe(FlowField(spec), FlowField(other), OccupancyGrid(spec)),
      "spec mismatch between metric inputs", std::invalid_argument);
  CHECK_THROWS_WITH_AS(IdRecall(IdGrid(spec), IdGrid(other)),
                       "spec mismatch between metric inputs",
                       std::invalid_argument);
}

TEST_CASE("evaluate validates the label shape") {
  const GridSpec spec = TestSpec(16, 16, 3);
  const Scenario scenario = CellSpeedScenario(spec);
  auto labels = ScenarioLabels(scenario);
  const Prediction pred = PerfectPrediction(spec, labels);
  labels[1].waypoints.pop_back();
  CHECK_THROWS_WITH_AS(Evaluate(pred, labels),
                       "label waypoint count mismatch",
                       std::invalid_argument);
}

}  // namespace
}  // namespace occflow
