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
// File formats.  Grids travel as small binary rasters:
//   "OFF1"  u32le height, width, channels; height*width*channels float32le,
//           row-major, channel-minor (flow stores dx then dy per cell).
//   "OFI1"  same header; payload is u32le agent ids instead of floats.
// Label sets, predictions, and traces are directories of such rasters plus a
// JSON manifest.  Writes go through a temp file and rename so readers never
// observe a partial file.  Malformed inputs raise FormatError naming the
// byte offset; filesystem trouble raises IoError.

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "occflow/grid.hpp"
#include "occflow/labels.hpp"
#include "occflow/losses.hpp"
#include "occflow/warp.hpp"

namespace occflow {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Whole-file helpers; writes create parent directories and go through a
// temp file plus rename.
std::string ReadTextFile(const std::string& path);
void WriteBytesAtomic(const std::string& path,
                      const std::vector<unsigned char>& bytes);
void WriteTextAtomic(const std::string& path, const std::string& text);

// Raw raster payloads, before any grid typing.
struct RasterFile {
  uint32_t height = 0;
  uint32_t width = 0;
  uint32_t channels = 0;
  std::vector<float> values;  // size height*width*channels
};

struct IdRasterFile {
  uint32_t height = 0;
  uint32_t width = 0;
  std::vector<uint32_t> ids;  // size height*width
};

void WriteValueRaster(const std::string& path, uint32_t height, uint32_t width,
                      uint32_t channels, const std::vector<float>& values);
RasterFile ReadValueRaster(const std::string& path);

void WriteIdRaster(const std::string& path, uint32_t height, uint32_t width,
                   const std::vector<uint32_t>& ids);
IdRasterFile ReadIdRaster(const std::string& path);

// Typed wrappers.  Loads check the raster shape against `spec` and throw
// FormatError("spec mismatch ...") on disagreement.  Values are float32 in
// the file and double in memory.
void SaveValues(const std::string& path, const ValueGrid& grid);
ValueGrid LoadValues(const std::string& path, const GridSpec& spec);
void SaveOccupancy(const std::string& path, const OccupancyGrid& grid);
OccupancyGrid LoadOccupancy(const std::string& path, const GridSpec& spec);
void SaveFlow(const std::string& path, const FlowField& flow);
FlowField LoadFlow(const std::string& path, const GridSpec& spec);
void SaveIds(const std::string& path, const IdGrid& ids);
IdGrid LoadIds(const std::string& path, const GridSpec& spec);

// One class worth of labels under `dir`: current_* rasters, waypoint_NN_*
// rasters, and manifest.json recording spec, class, and mode.
void SaveLabelSet(const std::string& dir, const LabelSet& labels);
LabelSet LoadLabelSet(const std::string& dir);

// Both classes under `dir`/<class name>/ plus a labels.json index.
void SaveLabels(const std::string& dir,
                const std::array<LabelSet, kNumAgentClasses>& labels);
std::array<LabelSet, kNumAgentClasses> LoadLabels(const std::string& dir);

// Prediction under `dir`: <class>_waypoint_NN_{logits,flow} rasters plus
// prediction.json recording the spec.
void SavePrediction(const std::string& dir, const Prediction& pred);
Prediction LoadPrediction(const std::string& dir);

// Flow trace for one class under `dir`: <class>_warped_NN value and id
// rasters plus trace.json.  Save extends any manifest already present so
// both classes can share a directory.
void SaveTrace(const std::string& dir, AgentClass agent_class,
               const GridSpec& spec, const std::vector<WarpedOccupancy>& trace);
std::vector<WarpedOccupancy> LoadTrace(const std::string& dir,
                                       AgentClass agent_class);

}  // namespace occflow
