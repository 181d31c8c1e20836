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
// Raster visualization: occupancy as 8-bit grayscale, flow as a color wheel
// (hue = direction, saturation and value = magnitude), and id grids via a
// deterministic id-to-color hash.  Output formats are binary PGM (P5) and
// PPM (P6); grid row y becomes image row y.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "occflow/grid.hpp"

namespace occflow {

struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 = grayscale, 3 = RGB
  std::vector<unsigned char> pixels;  // row-major, channel-minor
};

// Grayscale: pixel = round(255 * clamp(value, 0, 1)).
Image RenderValueImage(const ValueGrid& grid);

// Color wheel: hue = atan2(dy, dx), saturation = value =
// min(1, |flow| / max_magnitude).  Zero flow renders black.
// Throws std::invalid_argument when max_magnitude <= 0.
Image RenderFlowImage(const FlowField& flow, double max_magnitude);

// Flow image with every channel scaled by clamp(occupancy, 0, 1).
Image RenderCombinedImage(const FlowField& flow, const ValueGrid& occupancy,
                          double max_magnitude);

// Deterministic id hash to RGB; id 0 renders black.
Image RenderIdImage(const IdGrid& ids);

// P5 (grayscale) or P6 (RGB) encoding of the image.
std::vector<unsigned char> EncodeNetpbm(const Image& image);

// Encodes and writes atomically; extension is up to the caller
// (conventionally .pgm for grayscale, .ppm for RGB).
void SaveImage(const std::string& path, const Image& image);

}  // namespace occflow
