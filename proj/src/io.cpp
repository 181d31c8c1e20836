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
#include "occflow/io.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace occflow {
namespace {

namespace fs = std::filesystem;

constexpr uint32_t kMaxSideCells = 1u << 20;
constexpr uint32_t kMaxChannels = 16;

void AppendU32(std::vector<unsigned char>& out, uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

uint32_t ReadU32(const std::vector<unsigned char>& in, size_t offset) {
  return static_cast<uint32_t>(in[offset]) |
         static_cast<uint32_t>(in[offset + 1]) << 8 |
         static_cast<uint32_t>(in[offset + 2]) << 16 |
         static_cast<uint32_t>(in[offset + 3]) << 24;
}

}  // namespace

// Temp-and-rename so no reader ever sees a half-written file.
void WriteBytesAtomic(const std::string& path,
                      const std::vector<unsigned char>& bytes) {
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError(path + ": cannot create directory: " + ec.message());
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(tmp + ": write failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError(path + ": rename failed: " + ec.message());
}

void WriteTextAtomic(const std::string& path, const std::string& text) {
  WriteBytesAtomic(path,
                   std::vector<unsigned char>(text.begin(), text.end()));
}

namespace {

std::vector<unsigned char> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(path + ": read failed");
  return bytes;
}

struct RawHeader {
  uint32_t height, width, channels;
};

// Header layout: magic at byte 0, height at 4, width at 8, channels at 12,
// payload at 16.
RawHeader ParseHeader(const std::string& path,
                      const std::vector<unsigned char>& bytes,
                      const char* magic, size_t payload_unit) {
  if (bytes.size() < 4) {
    throw FormatError(path + ": truncated header at byte " +
                      std::to_string(bytes.size()));
  }
  if (!std::equal(magic, magic + 4, bytes.begin())) {
    throw FormatError(path + ": bad magic at byte 0");
  }
  if (bytes.size() < 16) {
    throw FormatError(path + ": truncated header at byte " +
                      std::to_string(bytes.size()));
  }
  RawHeader h{ReadU32(bytes, 4), ReadU32(bytes, 8), ReadU32(bytes, 12)};
  if (h.height == 0 || h.height > kMaxSideCells) {
    throw FormatError(path + ": implausible height at byte 4");
  }
  if (h.width == 0 || h.width > kMaxSideCells) {
    throw FormatError(path + ": implausible width at byte 8");
  }
  if (h.channels == 0 || h.channels > kMaxChannels) {
    throw FormatError(path + ": implausible channel count at byte 12");
  }
  const uint64_t count = static_cast<uint64_t>(h.height) * h.width * h.channels;
  const uint64_t expected = 16 + count * payload_unit;
  if (bytes.size() < expected) {
    throw FormatError(path + ": truncated payload at byte " +
                      std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw FormatError(path + ": trailing bytes at byte " +
                      std::to_string(expected));
  }
  return h;
}

void CheckShape(const std::string& path, uint32_t height, uint32_t width,
                uint32_t channels, const GridSpec& spec,
                uint32_t want_channels) {
  if (height != static_cast<uint32_t>(spec.height_cells) ||
      width != static_cast<uint32_t>(spec.width_cells) ||
      channels != want_channels) {
    throw FormatError(path + ": spec mismatch (file " + std::to_string(height) +
                      "x" + std::to_string(width) + "x" +
                      std::to_string(channels) + ", grid " +
                      std::to_string(spec.height_cells) + "x" +
                      std::to_string(spec.width_cells) + "x" +
                      std::to_string(want_channels) + ")");
  }
}

std::string WaypointName(const char* prefix, size_t index_1based,
                         const char* field, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%02zu_%s.%s", prefix, index_1based,
                field, ext);
  return buf;
}

std::string JoinPath(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

nlohmann::json ParseManifest(const std::string& path) {
  try {
    return nlohmann::json::parse(ReadTextFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": invalid JSON: " + e.what());
  }
}

GridSpec SpecFromManifest(const std::string& path, const nlohmann::json& doc) {
  try {
    return SpecFromJsonText(doc.at("spec").dump());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": bad spec entry: " + e.what());
  }
}

}  // namespace

std::string ReadTextFile(const std::string& path) {
  const std::vector<unsigned char> bytes = ReadFileBytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void WriteValueRaster(const std::string& path, uint32_t height, uint32_t width,
                      uint32_t channels, const std::vector<float>& values) {
  const uint64_t count = static_cast<uint64_t>(height) * width * channels;
  if (values.size() != count) {
    throw std::invalid_argument(path + ": value count does not match shape");
  }
  std::vector<unsigned char> bytes;
  bytes.reserve(16 + values.size() * 4);
  bytes.insert(bytes.end(), {'O', 'F', 'F', '1'});
  AppendU32(bytes, height);
  AppendU32(bytes, width);
  AppendU32(bytes, channels);
  for (float v : values) AppendU32(bytes, std::bit_cast<uint32_t>(v));
  WriteBytesAtomic(path, bytes);
}

RasterFile ReadValueRaster(const std::string& path) {
  const std::vector<unsigned char> bytes = ReadFileBytes(path);
  const RawHeader h = ParseHeader(path, bytes, "OFF1", 4);
  RasterFile out{h.height, h.width, h.channels, {}};
  const size_t count = static_cast<size_t>(h.height) * h.width * h.channels;
  out.values.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    out.values.push_back(std::bit_cast<float>(ReadU32(bytes, 16 + i * 4)));
  }
  return out;
}

void WriteIdRaster(const std::string& path, uint32_t height, uint32_t width,
                   const std::vector<uint32_t>& ids) {
  if (ids.size() != static_cast<uint64_t>(height) * width) {
    throw std::invalid_argument(path + ": id count does not match shape");
  }
  std::vector<unsigned char> bytes;
  bytes.reserve(16 + ids.size() * 4);
  bytes.insert(bytes.end(), {'O', 'F', 'I', '1'});
  AppendU32(bytes, height);
  AppendU32(bytes, width);
  AppendU32(bytes, 1);
  for (uint32_t v : ids) AppendU32(bytes, v);
  WriteBytesAtomic(path, bytes);
}

IdRasterFile ReadIdRaster(const std::string& path) {
  const std::vector<unsigned char> bytes = ReadFileBytes(path);
  const RawHeader h = ParseHeader(path, bytes, "OFI1", 4);
  if (h.channels != 1) {
    throw FormatError(path + ": id raster must have 1 channel at byte 12");
  }
  IdRasterFile out{h.height, h.width, {}};
  const size_t count = static_cast<size_t>(h.height) * h.width;
  out.ids.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    out.ids.push_back(ReadU32(bytes, 16 + i * 4));
  }
  return out;
}

void SaveValues(const std::string& path, const ValueGrid& grid) {
  std::vector<float> values;
  values.reserve(grid.values().size());
  for (double v : grid.values()) values.push_back(static_cast<float>(v));
  WriteValueRaster(path, static_cast<uint32_t>(grid.spec().height_cells),
                   static_cast<uint32_t>(grid.spec().width_cells), 1, values);
}

ValueGrid LoadValues(const std::string& path, const GridSpec& spec) {
  const RasterFile raw = ReadValueRaster(path);
  CheckShape(path, raw.height, raw.width, raw.channels, spec, 1);
  ValueGrid grid(spec);
  for (size_t i = 0; i < raw.values.size(); ++i) {
    grid.values()[i] = raw.values[i];
  }
  return grid;
}

void SaveOccupancy(const std::string& path, const OccupancyGrid& grid) {
  SaveValues(path, grid);
}

OccupancyGrid LoadOccupancy(const std::string& path, const GridSpec& spec) {
  const RasterFile raw = ReadValueRaster(path);
  CheckShape(path, raw.height, raw.width, raw.channels, spec, 1);
  OccupancyGrid grid(spec);
  for (size_t i = 0; i < raw.values.size(); ++i) {
    grid.values()[i] = raw.values[i];
  }
  try {
    grid.ValidateRange();
  } catch (const std::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return grid;
}

void SaveFlow(const std::string& path, const FlowField& flow) {
  std::vector<float> values;
  values.reserve(flow.data().size());
  for (double v : flow.data()) values.push_back(static_cast<float>(v));
  WriteValueRaster(path, static_cast<uint32_t>(flow.spec().height_cells),
                   static_cast<uint32_t>(flow.spec().width_cells), 2, values);
}

FlowField LoadFlow(const std::string& path, const GridSpec& spec) {
  const RasterFile raw = ReadValueRaster(path);
  CheckShape(path, raw.height, raw.width, raw.channels, spec, 2);
  FlowField flow(spec);
  for (size_t i = 0; i < raw.values.size(); ++i) {
    flow.data()[i] = raw.values[i];
  }
  try {
    flow.ValidateFinite();
  } catch (const std::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return flow;
}

void SaveIds(const std::string& path, const IdGrid& ids) {
  WriteIdRaster(path, static_cast<uint32_t>(ids.spec().height_cells),
                static_cast<uint32_t>(ids.spec().width_cells), ids.ids());
}

IdGrid LoadIds(const std::string& path, const GridSpec& spec) {
  const IdRasterFile raw = ReadIdRaster(path);
  CheckShape(path, raw.height, raw.width, 1, spec, 1);
  IdGrid grid(spec);
  grid.ids() = raw.ids;
  return grid;
}

void SaveLabelSet(const std::string& dir, const LabelSet& labels) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir + ": cannot create directory: " + ec.message());
  SaveOccupancy(JoinPath(dir, "current_occupancy.off1"),
                labels.current.occupancy);
  SaveFlow(JoinPath(dir, "current_flow.off1"), labels.current.flow);
  SaveIds(JoinPath(dir, "current_ids.ofi1"), labels.current.ids);
  for (size_t i = 0; i < labels.waypoints.size(); ++i) {
    const LabeledFrame& frame = labels.waypoints[i];
    SaveOccupancy(JoinPath(dir, WaypointName("waypoint", i + 1, "occupancy",
                                             "off1")),
                  frame.occupancy);
    SaveFlow(JoinPath(dir, WaypointName("waypoint", i + 1, "flow", "off1")),
             frame.flow);
    SaveIds(JoinPath(dir, WaypointName("waypoint", i + 1, "ids", "ofi1")),
            frame.ids);
  }
  nlohmann::json manifest{
      {"format", "occflow-labels"},
      {"class", AgentClassName(labels.agent_class)},
      {"mode", LabelModeName(labels.mode)},
      {"spec", nlohmann::json::parse(SpecToJsonText(labels.spec))}};
  WriteTextAtomic(JoinPath(dir, "manifest.json"), manifest.dump(2) + "\n");
}

LabelSet LoadLabelSet(const std::string& dir) {
  const std::string manifest_path = JoinPath(dir, "manifest.json");
  const nlohmann::json manifest = ParseManifest(manifest_path);
  LabelSet out;
  out.spec = SpecFromManifest(manifest_path, manifest);
  try {
    out.agent_class = ParseAgentClass(manifest.at("class").get<std::string>());
    out.mode = ParseLabelMode(manifest.at("mode").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(manifest_path + ": " + e.what());
  }
  out.current.occupancy =
      LoadOccupancy(JoinPath(dir, "current_occupancy.off1"), out.spec);
  out.current.flow = LoadFlow(JoinPath(dir, "current_flow.off1"), out.spec);
  out.current.ids = LoadIds(JoinPath(dir, "current_ids.ofi1"), out.spec);
  out.waypoints.clear();
  for (int i = 1; i <= out.spec.num_waypoints; ++i) {
    LabeledFrame frame{OccupancyGrid(out.spec), FlowField(out.spec),
                       IdGrid(out.spec)};
    frame.occupancy = LoadOccupancy(
        JoinPath(dir, WaypointName("waypoint", i, "occupancy", "off1")),
        out.spec);
    frame.flow = LoadFlow(
        JoinPath(dir, WaypointName("waypoint", i, "flow", "off1")), out.spec);
    frame.ids = LoadIds(
        JoinPath(dir, WaypointName("waypoint", i, "ids", "ofi1")), out.spec);
    out.waypoints.push_back(std::move(frame));
  }
  return out;
}

void SaveLabels(const std::string& dir,
                const std::array<LabelSet, kNumAgentClasses>& labels) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir + ": cannot create directory: " + ec.message());
  nlohmann::json classes = nlohmann::json::array();
  for (const LabelSet& set : labels) {
    const std::string name = AgentClassName(set.agent_class);
    SaveLabelSet(JoinPath(dir, name), set);
    classes.push_back(name);
  }
  nlohmann::json index{
      {"format", "occflow-labels-index"},
      {"classes", classes},
      {"mode", LabelModeName(labels[0].mode)},
      {"spec", nlohmann::json::parse(SpecToJsonText(labels[0].spec))}};
  WriteTextAtomic(JoinPath(dir, "labels.json"), index.dump(2) + "\n");
}

std::array<LabelSet, kNumAgentClasses> LoadLabels(const std::string& dir) {
  std::array<LabelSet, kNumAgentClasses> out;
  for (int cls = 0; cls < kNumAgentClasses; ++cls) {
    out[cls] = LoadLabelSet(
        JoinPath(dir, AgentClassName(static_cast<AgentClass>(cls))));
    if (out[cls].agent_class != static_cast<AgentClass>(cls)) {
      throw FormatError(dir + ": label directory class does not match name");
    }
  }
  if (!(out[0].spec == out[1].spec)) {
    throw FormatError(dir + ": spec mismatch between class label sets");
  }
  return out;
}

void SavePrediction(const std::string& dir, const Prediction& pred) {
  pred.Validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir + ": cannot create directory: " + ec.message());
  for (int cls = 0; cls < kNumAgentClasses; ++cls) {
    const std::string name = AgentClassName(static_cast<AgentClass>(cls));
    for (size_t i = 0; i < pred.logits[cls].size(); ++i) {
      SaveValues(JoinPath(dir, name + "_" +
                                   WaypointName("waypoint", i + 1, "logits",
                                                "off1")),
                 pred.logits[cls][i]);
      SaveFlow(JoinPath(dir, name + "_" +
                                 WaypointName("waypoint", i + 1, "flow",
                                              "off1")),
               pred.flows[cls][i]);
    }
  }
  nlohmann::json manifest{
      {"format", "occflow-prediction"},
      {"spec", nlohmann::json::parse(SpecToJsonText(pred.spec))}};
  WriteTextAtomic(JoinPath(dir, "prediction.json"), manifest.dump(2) + "\n");
}

Prediction LoadPrediction(const std::string& dir) {
  const std::string manifest_path = JoinPath(dir, "prediction.json");
  const nlohmann::json manifest = ParseManifest(manifest_path);
  Prediction pred;
  pred.spec = SpecFromManifest(manifest_path, manifest);
  for (int cls = 0; cls < kNumAgentClasses; ++cls) {
    const std::string name = AgentClassName(static_cast<AgentClass>(cls));
    pred.logits[cls].clear();
    pred.flows[cls].clear();
    for (int i = 1; i <= pred.spec.num_waypoints; ++i) {
      pred.logits[cls].push_back(LoadValues(
          JoinPath(dir, name + "_" + WaypointName("waypoint", i, "logits",
                                                  "off1")),
          pred.spec));
      pred.flows[cls].push_back(LoadFlow(
          JoinPath(dir, name + "_" + WaypointName("waypoint", i, "flow",
                                                  "off1")),
          pred.spec));
    }
  }
  pred.Validate();
  return pred;
}

void SaveTrace(const std::string& dir, AgentClass agent_class,
               const GridSpec& spec,
               const std::vector<WarpedOccupancy>& trace) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir + ": cannot create directory: " + ec.message());
  const std::string name = AgentClassName(agent_class);
  for (size_t i = 0; i < trace.size(); ++i) {
    SaveValues(JoinPath(dir, name + "_" +
                                 WaypointName("warped", i + 1, "values",
                                              "off1")),
               trace[i].values);
    SaveIds(JoinPath(dir, name + "_" +
                              WaypointName("warped", i + 1, "ids", "ofi1")),
            trace[i].ids);
  }
  const std::string manifest_path = JoinPath(dir, "trace.json");
  nlohmann::json manifest;
  if (fs::exists(manifest_path)) manifest = ParseManifest(manifest_path);
  manifest["format"] = "occflow-trace";
  manifest["spec"] = nlohmann::json::parse(SpecToJsonText(spec));
  if (!manifest.contains("classes")) {
    manifest["classes"] = nlohmann::json::array();
  }
  bool listed = false;
  for (const auto& entry : manifest["classes"]) listed |= entry == name;
  if (!listed) manifest["classes"].push_back(name);
  WriteTextAtomic(manifest_path, manifest.dump(2) + "\n");
}

std::vector<WarpedOccupancy> LoadTrace(const std::string& dir,
                                       AgentClass agent_class) {
  const std::string manifest_path = JoinPath(dir, "trace.json");
  const nlohmann::json manifest = ParseManifest(manifest_path);
  const GridSpec spec = SpecFromManifest(manifest_path, manifest);
  const std::string name = AgentClassName(agent_class);
  std::vector<WarpedOccupancy> trace;
  for (int i = 1; i <= spec.num_waypoints; ++i) {
    WarpedOccupancy frame{OccupancyGrid(spec), IdGrid(spec)};
    frame.values = LoadOccupancy(
        JoinPath(dir, name + "_" + WaypointName("warped", i, "values",
                                                "off1")),
        spec);
    frame.ids = LoadIds(
        JoinPath(dir, name + "_" + WaypointName("warped", i, "ids", "ofi1")),
        spec);
    trace.push_back(std::move(frame));
  }
  return trace;
}

}  // namespace occflow
