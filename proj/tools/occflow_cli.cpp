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
// Command-line front end.  Subcommands: generate, labels, predict (cv |
// trajset), trace, evaluate, render, pipeline.  All outputs are functions of
// the inputs and --seed alone (no timestamps), so reruns are byte-identical.
// Errors print one line to stderr with a stable prefix: error[usage],
// error[io], error[format], or error[runtime].

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "occflow/baseline.hpp"
#include "occflow/io.hpp"
#include "occflow/labels.hpp"
#include "occflow/metrics.hpp"
#include "occflow/render.hpp"
#include "occflow/scene.hpp"
#include "occflow/warp.hpp"

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  uint64_t seed = 1;
  int jobs = 1;
  std::string config_path;
};

std::string JoinPath(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

occflow::GeneratorConfig LoadGeneratorConfig(const std::string& path) {
  if (path.empty()) return {};
  return occflow::GeneratorConfigFromJson(occflow::ReadTextFile(path));
}

std::array<std::vector<occflow::FlowField>, occflow::kNumAgentClasses>
LabelFlows(const std::array<occflow::LabelSet, occflow::kNumAgentClasses>&
               labels) {
  std::array<std::vector<occflow::FlowField>, occflow::kNumAgentClasses> out;
  for (int cls = 0; cls < occflow::kNumAgentClasses; ++cls) {
    for (const occflow::LabeledFrame& frame : labels[cls].waypoints) {
      out[cls].push_back(frame.flow);
    }
  }
  return out;
}

void RunTraceToDir(
    const std::array<occflow::LabelSet, occflow::kNumAgentClasses>& labels,
    const std::array<std::vector<occflow::FlowField>,
                     occflow::kNumAgentClasses>& flows,
    const std::string& out_dir, int jobs) {
  for (int cls = 0; cls < occflow::kNumAgentClasses; ++cls) {
    const std::vector<occflow::WarpedOccupancy> trace = occflow::TraceFlow(
        labels[cls].current.occupancy, labels[cls].current.ids, flows[cls],
        jobs);
    occflow::SaveTrace(out_dir, static_cast<occflow::AgentClass>(cls),
                       labels[cls].spec, trace);
  }
}

void WarnSkipped(const occflow::CvPrediction& cv) {
  for (int cls = 0; cls < occflow::kNumAgentClasses; ++cls) {
    for (uint32_t id : cv.skipped[cls]) {
      std::cerr << "warning: skipped agent " << id << " ("
                << occflow::AgentClassName(
                       static_cast<occflow::AgentClass>(cls))
                << "): not valid at step 0\n";
    }
  }
}

void CmdLabels(const std::string& scenario_path, const std::string& mode_name,
               const std::string& out_dir) {
  const occflow::Scenario scenario = occflow::LoadScenario(scenario_path);
  const occflow::LabelMode mode = occflow::ParseLabelMode(mode_name);
  occflow::SaveLabels(out_dir, occflow::BuildAllLabels(scenario, mode));
}

void CmdPredictCv(const std::string& scenario_path,
                  const std::string& out_dir) {
  const occflow::Scenario scenario = occflow::LoadScenario(scenario_path);
  const occflow::CvPrediction cv = occflow::ConstantVelocityPredict(scenario);
  WarnSkipped(cv);
  occflow::SavePrediction(out_dir, cv.prediction);
}

void CmdPredictTrajset(const std::string& hypotheses_path,
                       const std::string& out_dir) {
  const occflow::HypothesisSet set =
      occflow::LoadHypothesisSet(hypotheses_path);
  occflow::SavePrediction(out_dir, occflow::HypothesesToPrediction(set));
}

void CmdTrace(const GlobalOptions& global, const std::string& labels_dir,
              const std::string& prediction_dir, const std::string& out_dir) {
  const auto labels = occflow::LoadLabels(labels_dir);
  auto flows = LabelFlows(labels);
  if (!prediction_dir.empty()) {
    const occflow::Prediction pred = occflow::LoadPrediction(prediction_dir);
    if (!(pred.spec == labels[0].spec)) {
      throw occflow::FormatError("spec mismatch between prediction and labels");
    }
    flows = pred.flows;
  }
  RunTraceToDir(labels, flows, out_dir, global.jobs);
}

void CmdEvaluate(const GlobalOptions& global, const std::string& labels_dir,
                 const std::string& prediction_dir, const std::string& out_path,
                 const std::string& csv_path) {
  const auto labels = occflow::LoadLabels(labels_dir);
  const occflow::Prediction pred = occflow::LoadPrediction(prediction_dir);
  const occflow::MetricReport report =
      occflow::Evaluate(pred, labels, global.jobs);
  occflow::WriteTextAtomic(out_path, report.ToJson());
  if (!csv_path.empty()) {
    occflow::WriteTextAtomic(csv_path, report.ToCsv());
  }
}

void CmdRender(const std::string& input_path, const std::string& style_flag,
               const std::string& occupancy_path, double max_magnitude,
               const std::string& out_path) {
  std::string style = style_flag;
  const bool id_input = input_path.size() >= 5 &&
                        input_path.substr(input_path.size() - 5) == ".ofi1";
  if (style == "auto") {
    if (id_input) {
      style = "ids";
    } else {
      const occflow::RasterFile probe = occflow::ReadValueRaster(input_path);
      style = probe.channels == 2 ? "flow" : "occupancy";
    }
  }

  const auto value_grid = [&](const std::string& path) {
    const occflow::RasterFile raw = occflow::ReadValueRaster(path);
    if (raw.channels != 1) {
      throw occflow::FormatError(path + ": expected a 1-channel raster");
    }
    occflow::GridSpec spec;
    spec.height_cells = static_cast<int>(raw.height);
    spec.width_cells = static_cast<int>(raw.width);
    occflow::ValueGrid grid(spec);
    for (size_t i = 0; i < raw.values.size(); ++i) {
      grid.values()[i] = raw.values[i];
    }
    return grid;
  };
  const auto flow_grid = [&](const std::string& path) {
    const occflow::RasterFile raw = occflow::ReadValueRaster(path);
    if (raw.channels != 2) {
      throw occflow::FormatError(path + ": expected a 2-channel raster");
    }
    occflow::GridSpec spec;
    spec.height_cells = static_cast<int>(raw.height);
    spec.width_cells = static_cast<int>(raw.width);
    occflow::FlowField flow(spec);
    for (size_t i = 0; i < raw.values.size(); ++i) {
      flow.data()[i] = raw.values[i];
    }
    return flow;
  };

  occflow::Image image;
  if (style == "occupancy") {
    image = occflow::RenderValueImage(value_grid(input_path));
  } else if (style == "flow") {
    image = occflow::RenderFlowImage(flow_grid(input_path), max_magnitude);
  } else if (style == "combined") {
    if (occupancy_path.empty()) {
      throw std::invalid_argument(
          "--occupancy is required for the combined style");
    }
    image = occflow::RenderCombinedImage(flow_grid(input_path),
                                         value_grid(occupancy_path),
                                         max_magnitude);
  } else {  // ids
    const occflow::IdRasterFile raw = occflow::ReadIdRaster(input_path);
    occflow::GridSpec spec;
    spec.height_cells = static_cast<int>(raw.height);
    spec.width_cells = static_cast<int>(raw.width);
    occflow::IdGrid ids(spec);
    ids.ids() = raw.ids;
    image = occflow::RenderIdImage(ids);
  }
  occflow::SaveImage(out_path, image);
}

void CmdPipeline(const GlobalOptions& global, const std::string& out_dir) {
  occflow::GeneratorConfig config = LoadGeneratorConfig(global.config_path);
  config.Validate();

  const occflow::Scenario scenario =
      occflow::GenerateSyntheticScenario(global.seed, config);
  occflow::WriteTextAtomic(JoinPath(out_dir, "scenario.json"),
                           occflow::ScenarioToJson(scenario));

  const auto labels =
      occflow::BuildAllLabels(scenario, occflow::LabelMode::kRegular);
  occflow::SaveLabels(JoinPath(out_dir, "labels"), labels);

  const occflow::CvPrediction cv = occflow::ConstantVelocityPredict(scenario);
  WarnSkipped(cv);
  occflow::SavePrediction(JoinPath(out_dir, "prediction"), cv.prediction);

  const occflow::MetricReport report =
      occflow::Evaluate(cv.prediction, labels, global.jobs);
  occflow::WriteTextAtomic(JoinPath(out_dir, "report.json"), report.ToJson());
  occflow::WriteTextAtomic(JoinPath(out_dir, "report.csv"), report.ToCsv());

  RunTraceToDir(labels, cv.prediction.flows, JoinPath(out_dir, "trace"),
                global.jobs);

  // A small gallery of the first waypoint per class.
  const std::string render_dir = JoinPath(out_dir, "render");
  const double max_magnitude = 10.0;
  for (int cls = 0; cls < occflow::kNumAgentClasses; ++cls) {
    const std::string name =
        occflow::AgentClassName(static_cast<occflow::AgentClass>(cls));
    const occflow::LabeledFrame& frame = labels[cls].waypoints.front();
    occflow::SaveImage(JoinPath(render_dir, name + "_occupancy_01.pgm"),
                       occflow::RenderValueImage(frame.occupancy));
    occflow::SaveImage(JoinPath(render_dir, name + "_flow_01.ppm"),
                       occflow::RenderFlowImage(frame.flow, max_magnitude));
    occflow::SaveImage(
        JoinPath(render_dir, name + "_combined_01.ppm"),
        occflow::RenderCombinedImage(frame.flow, frame.occupancy,
                                     max_magnitude));
    occflow::SaveImage(JoinPath(render_dir, name + "_ids_01.ppm"),
                       occflow::RenderIdImage(frame.ids));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Occupancy flow fields toolkit"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Seed for every stochastic step");
  app.add_option("--jobs", global.jobs, "Worker threads for grid passes")
      ->check(CLI::Range(1, 256));
  app.add_option("--config", global.config_path,
                 "JSON config file for generation");

  // generate
  auto* generate = app.add_subcommand("generate", "Write synthetic scenarios");
  int gen_count = 1;
  std::string gen_out;
  int gen_vehicles = -1, gen_pedestrians = -1, gen_agents = -1;
  bool gen_integer_speeds = false;
  double gen_speculative = -1.0;
  generate->add_option("--count", gen_count, "Number of scenarios")
      ->check(CLI::Range(1, 1000));
  generate->add_option("--out", gen_out, "Output directory")->required();
  generate->add_option("--agents", gen_agents,
                       "Total agent count (60/40 vehicle/pedestrian split)");
  generate->add_option("--vehicles", gen_vehicles, "Vehicle count");
  generate->add_option("--pedestrians", gen_pedestrians, "Pedestrian count");
  generate->add_option("--speculative", gen_speculative,
                       "Fraction of agents that appear only in the future");
  generate->add_flag("--integer-speeds", gen_integer_speeds,
                     "Snap speeds to whole cells per step");

  // labels
  auto* labels_cmd = app.add_subcommand("labels", "Build ground-truth labels");
  std::string labels_scenario, labels_out, labels_mode = "regular";
  labels_cmd->add_option("--scenario", labels_scenario, "Scenario JSON")
      ->required();
  labels_cmd->add_option("--out", labels_out, "Output directory")->required();
  labels_cmd->add_option("--mode", labels_mode, "regular | speculative")
      ->check(CLI::IsMember({"regular", "speculative"}));

  // predict
  auto* predict = app.add_subcommand("predict", "Run a baseline predictor");
  predict->require_subcommand(1);
  auto* predict_cv =
      predict->add_subcommand("cv", "Constant-velocity extrapolation");
  std::string cv_scenario, cv_out;
  predict_cv->add_option("--scenario", cv_scenario, "Scenario JSON")
      ->required();
  predict_cv->add_option("--out", cv_out, "Output directory")->required();
  auto* predict_trajset =
      predict->add_subcommand("trajset", "Trajectory-set conversion");
  std::string trajset_hypotheses, trajset_out;
  predict_trajset
      ->add_option("--hypotheses", trajset_hypotheses, "Hypothesis JSON")
      ->required();
  predict_trajset->add_option("--out", trajset_out, "Output directory")
      ->required();

  // trace
  auto* trace_cmd =
      app.add_subcommand("trace", "Warp current occupancy along flows");
  std::string trace_labels, trace_prediction, trace_out;
  trace_cmd->add_option("--labels", trace_labels, "Label directory")
      ->required();
  trace_cmd->add_option("--prediction", trace_prediction,
                        "Prediction directory (defaults to label flows)");
  trace_cmd->add_option("--out", trace_out, "Output directory")->required();

  // evaluate
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Score a prediction against labels");
  std::string eval_labels, eval_prediction, eval_out, eval_csv;
  evaluate_cmd->add_option("--labels", eval_labels, "Label directory")
      ->required();
  evaluate_cmd
      ->add_option("--prediction", eval_prediction, "Prediction directory")
      ->required();
  evaluate_cmd->add_option("--out", eval_out, "Report JSON path")->required();
  evaluate_cmd->add_option("--csv", eval_csv, "Also write a CSV table here");

  // render
  auto* render_cmd = app.add_subcommand("render", "Rasterize grids to images");
  std::string render_input, render_out, render_occupancy;
  std::string render_style = "auto";
  double render_max_magnitude = 10.0;
  render_cmd->add_option("--input", render_input, "Grid raster file")
      ->required();
  render_cmd->add_option("--out", render_out, "Image path")->required();
  render_cmd
      ->add_option("--style", render_style,
                   "auto | occupancy | flow | combined | ids")
      ->check(CLI::IsMember({"auto", "occupancy", "flow", "combined", "ids"}));
  render_cmd->add_option("--occupancy", render_occupancy,
                         "Occupancy raster for the combined style");
  render_cmd->add_option("--max-magnitude", render_max_magnitude,
                         "Flow magnitude (cells) of full saturation");

  // pipeline
  auto* pipeline =
      app.add_subcommand("pipeline", "generate -> labels -> predict -> "
                                     "evaluate -> render in one directory");
  std::string pipeline_out;
  pipeline->add_option("--out", pipeline_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error[usage]: " << e.what() << "\n";
    return 2;
  }

  try {
    if (generate->parsed()) {
      occflow::GeneratorConfig config =
          LoadGeneratorConfig(global.config_path);
      if (gen_agents >= 0) {
        config.num_vehicles = (gen_agents * 3 + 2) / 5;
        config.num_pedestrians = gen_agents - config.num_vehicles;
      }
      if (gen_vehicles >= 0) config.num_vehicles = gen_vehicles;
      if (gen_pedestrians >= 0) config.num_pedestrians = gen_pedestrians;
      if (gen_speculative >= 0.0) config.speculative_fraction = gen_speculative;
      if (gen_integer_speeds) config.integer_cell_speeds = true;
      config.Validate();
      std::error_code ec;
      fs::create_directories(gen_out, ec);
      if (ec) {
        throw occflow::IoError(gen_out + ": cannot create directory: " +
                               ec.message());
      }
      for (int i = 0; i < gen_count; ++i) {
        const occflow::Scenario scenario =
            occflow::GenerateSyntheticScenario(global.seed + i, config);
        char name[32];
        std::snprintf(name, sizeof(name), "scenario_%03d.json", i);
        occflow::WriteTextAtomic(JoinPath(gen_out, name),
                                 occflow::ScenarioToJson(scenario));
      }
    } else if (labels_cmd->parsed()) {
      CmdLabels(labels_scenario, labels_mode, labels_out);
    } else if (predict->parsed()) {
      if (predict_cv->parsed()) {
        CmdPredictCv(cv_scenario, cv_out);
      } else {
        CmdPredictTrajset(trajset_hypotheses, trajset_out);
      }
    } else if (trace_cmd->parsed()) {
      CmdTrace(global, trace_labels, trace_prediction, trace_out);
    } else if (evaluate_cmd->parsed()) {
      CmdEvaluate(global, eval_labels, eval_prediction, eval_out, eval_csv);
    } else if (render_cmd->parsed()) {
      CmdRender(render_input, render_style, render_occupancy,
                render_max_magnitude, render_out);
    } else if (pipeline->parsed()) {
      CmdPipeline(global, pipeline_out);
    }
  } catch (const occflow::FormatError& e) {
    std::cerr << "error[format]: " << e.what() << "\n";
    return 4;
  } catch (const occflow::IoError& e) {
    std::cerr << "error[io]: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error[usage]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error[runtime]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
