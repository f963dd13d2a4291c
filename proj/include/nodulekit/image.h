// Copyright 2026 The Nodulekit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef NODULEKIT_IMAGE_H_
#define NODULEKIT_IMAGE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace nodulekit {

// 8-bit raster, row-major, channels interleaved. channels is 1 or 3.
struct RasterImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<uint8_t> samples;

  bool operator==(const RasterImage&) const = default;
};

// Throws kUnsupportedPixelFormat / kDimensionMismatch on a malformed raster.
void ValidateImage(const RasterImage& image);

struct NormalizedImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> values;  // sample / 255, in [0, 1]
};

NormalizedImage Normalize(const RasterImage& image);

// Lossless 8-bit grayscale or truecolor PNG. `fast` trades file size for
// encode speed.
std::vector<uint8_t> EncodePng(const RasterImage& image, bool fast = true);
RasterImage DecodePng(std::span<const uint8_t> bytes);

void WritePng(const RasterImage& image, const std::filesystem::path& path,
              bool fast = true);
RasterImage ReadPng(const std::filesystem::path& path);

struct ImageDims {
  int width = 0;
  int height = 0;
  int channels = 1;

  bool operator==(const ImageDims&) const = default;
};

// Reads only the PNG header.
ImageDims ReadPngDims(const std::filesystem::path& path);

}  // namespace nodulekit

#endif  // NODULEKIT_IMAGE_H_
