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
#include "occflow/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "occflow/io.hpp"
#include "occflow/scene.hpp"

namespace occflow {
namespace {

unsigned char ToByte(double unit) {
  return static_cast<unsigned char>(
      std::lround(255.0 * std::clamp(unit, 0.0, 1.0)));
}

struct Rgb {
  double r, g, b;
};

// Standard hue/saturation/value to RGB; hue in degrees [0, 360).
Rgb HsvToRgb(double hue, double sat, double val) {
  const double c = val * sat;
  const double hp = hue / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0.0, g = 0.0, b = 0.0;
  if (hp < 1.0) {
    r = c, g = x;
  } else if (hp < 2.0) {
    r = x, g = c;
  } else if (hp < 3.0) {
    g = c, b = x;
  } else if (hp < 4.0) {
    g = x, b = c;
  } else if (hp < 5.0) {
    r = x, b = c;
  } else {
    r = c, b = x;
  }
  const double m = val - c;
  return {r + m, g + m, b + m};
}

Rgb FlowColor(Vec2 f, double max_magnitude) {
  const double mag = f.Norm();
  if (mag == 0.0) return {0.0, 0.0, 0.0};
  double hue = std::atan2(f.y, f.x) * 180.0 / std::numbers::pi;
  if (hue < 0.0) hue += 360.0;
  if (hue >= 360.0) hue = 0.0;
  const double strength = std::min(1.0, mag / max_magnitude);
  return HsvToRgb(hue, strength, strength);
}

}  // namespace

Image RenderValueImage(const ValueGrid& grid) {
  const GridSpec& spec = grid.spec();
  Image image{spec.width_cells, spec.height_cells, 1, {}};
  image.pixels.reserve(grid.values().size());
  for (double v : grid.values()) image.pixels.push_back(ToByte(v));
  return image;
}

Image RenderFlowImage(const FlowField& flow, double max_magnitude) {
  if (!(max_magnitude > 0.0)) {
    throw std::invalid_argument("max_magnitude must be positive");
  }
  const GridSpec& spec = flow.spec();
  Image image{spec.width_cells, spec.height_cells, 3, {}};
  image.pixels.reserve(static_cast<size_t>(spec.CellCount()) * 3);
  for (int y = 0; y < spec.height_cells; ++y) {
    for (int x = 0; x < spec.width_cells; ++x) {
      const Rgb rgb = FlowColor(flow.at(x, y), max_magnitude);
      image.pixels.push_back(ToByte(rgb.r));
      image.pixels.push_back(ToByte(rgb.g));
      image.pixels.push_back(ToByte(rgb.b));
    }
  }
  return image;
}

Image RenderCombinedImage(const FlowField& flow, const ValueGrid& occupancy,
                          double max_magnitude) {
  if (!(flow.spec() == occupancy.spec())) {
    throw std::invalid_argument("spec mismatch between flow and occupancy");
  }
  if (!(max_magnitude > 0.0)) {
    throw std::invalid_argument("max_magnitude must be positive");
  }
  const GridSpec& spec = flow.spec();
  Image image{spec.width_cells, spec.height_cells, 3, {}};
  image.pixels.reserve(static_cast<size_t>(spec.CellCount()) * 3);
  for (int y = 0; y < spec.height_cells; ++y) {
    for (int x = 0; x < spec.width_cells; ++x) {
      const double p = std::clamp(occupancy.at(x, y), 0.0, 1.0);
      const Rgb rgb = FlowColor(flow.at(x, y), max_magnitude);
      image.pixels.push_back(ToByte(rgb.r * p));
      image.pixels.push_back(ToByte(rgb.g * p));
      image.pixels.push_back(ToByte(rgb.b * p));
    }
  }
  return image;
}

Image RenderIdImage(const IdGrid& ids) {
  const GridSpec& spec = ids.spec();
  Image image{spec.width_cells, spec.height_cells, 3, {}};
  image.pixels.reserve(static_cast<size_t>(spec.CellCount()) * 3);
  for (uint32_t id : ids.ids()) {
    if (id == 0) {
      image.pixels.insert(image.pixels.end(), {0, 0, 0});
      continue;
    }
    Rng rng(id);
    const uint64_t h = rng.NextU64();
    // Keep each channel off the very dark end so ids stay visible.
    image.pixels.push_back(
        static_cast<unsigned char>(64 + ((h >> 0) & 0xff) % 192));
    image.pixels.push_back(
        static_cast<unsigned char>(64 + ((h >> 8) & 0xff) % 192));
    image.pixels.push_back(
        static_cast<unsigned char>(64 + ((h >> 16) & 0xff) % 192));
  }
  return image;
}

std::vector<unsigned char> EncodeNetpbm(const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw std::invalid_argument("image must have 1 or 3 channels");
  }
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<size_t>(image.width) * image.height *
                                 image.channels) {
    throw std::invalid_argument("image shape does not match pixel count");
  }
  const std::string header = std::string(image.channels == 1 ? "P5" : "P6") +
                             "\n" + std::to_string(image.width) + " " +
                             std::to_string(image.height) + "\n255\n";
  std::vector<unsigned char> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), image.pixels.begin(), image.pixels.end());
  return bytes;
}

void SaveImage(const std::string& path, const Image& image) {
  WriteBytesAtomic(path, EncodeNetpbm(image));
}

}  // namespace occflow
