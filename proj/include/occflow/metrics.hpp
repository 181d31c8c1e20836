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
// Evaluation metrics: PR-curve area and soft IoU on occupancy, end-point
// error on flow, id recall on traces, and the flow-traced combinations.
// Metrics that have no defined value (for example AUC against an empty
// label) are reported as absent, never as NaN.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "occflow/losses.hpp"
#include "occflow/warp.hpp"

namespace occflow {

inline constexpr int kDefaultAucThresholds = 100;

// Area under the precision/recall curve swept over `thresholds` linearly
// spaced cut-offs in [0, 1] (inclusive).  Cells with label != 0 count as
// positive.  Thresholds that select no cell yield no PR point; the curve is
// anchored at (recall 0, precision of the highest defined threshold), sorted
// by recall, deduplicated keeping the best precision per recall, and
// integrated by trapezoids.  Absent when the label has no positive cells.
std::optional<double> Auc(const OccupancyGrid& pred,
                          const OccupancyGrid& label,
                          int thresholds = kDefaultAucThresholds);

// Sum(p*q) / Sum(p + q - p*q); 0 when the denominator is 0.
double SoftIou(const OccupancyGrid& pred, const OccupancyGrid& label);

// Mean L2 flow error over cells where the label occupancy is nonzero;
// absent when no cell qualifies.
std::optional<double> Epe(const FlowField& pred, const FlowField& label,
                          const OccupancyGrid& label_occupancy);

// Fraction of cells with a label id whose trace id matches it; absent when
// the label has no id anywhere.
std::optional<double> IdRecall(const IdGrid& trace_ids,
                               const IdGrid& label_ids);

struct FlowTracedPair {
  std::optional<double> auc;
  double iou = 0.0;
};

// Metrics of the element-wise product warped * predicted against the label.
FlowTracedPair FlowTracedMetrics(const OccupancyGrid& warped,
                                 const OccupancyGrid& predicted,
                                 const OccupancyGrid& label,
                                 int thresholds = kDefaultAucThresholds);

struct WaypointMetrics {
  std::optional<double> auc;
  std::optional<double> soft_iou;
  std::optional<double> epe;
  std::optional<double> id_recall;
  std::optional<double> ft_auc;
  std::optional<double> ft_iou;
};

inline constexpr std::array<const char*, 6> kMetricNames = {
    "auc", "soft_iou", "epe", "id_recall", "ft_auc", "ft_iou"};

struct ClassMetrics {
  std::vector<WaypointMetrics> waypoints;  // index i = waypoint i + 1
  WaypointMetrics mean;                    // absent entries skipped
  std::array<int, 6> skipped = {};         // per metric, in kMetricNames order
};

struct MetricReport {
  std::array<ClassMetrics, kNumAgentClasses> per_class;

  // {"vehicle": {"1": {...}, ..., "mean": {...}, "skipped": {...}}, ...};
  // absent metrics serialize as null.
  std::string ToJson() const;
  // One row per (class, waypoint) in Table-style metric order:
  // class,t,auc,soft_iou,epe,id_recall,ft_auc,ft_iou; a "mean" row per
  // class; absent values stay empty.
  std::string ToCsv() const;
};

// Runs the flow trace on the predicted flows, then every metric per class
// and waypoint plus the mean row.
MetricReport Evaluate(const Prediction& pred,
                      const std::array<LabelSet, kNumAgentClasses>& labels,
                      int threads = 1,
                      int thresholds = kDefaultAucThresholds);

}  // namespace occflow
