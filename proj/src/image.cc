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
#include "nodulekit/image.h"

#include <png.h>

#include <cstring>
#include <fstream>

#include "nodulekit/error.h"
#include "nodulekit/fsutil.h"

namespace nodulekit {

namespace {

// Frees the libpng simplified-API control structure on every exit path.
struct PngImageGuard {
  png_image image;
  PngImageGuard() {
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImageGuard() { png_image_free(&image); }
};

}  // namespace

void ValidateImage(const RasterImage& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw Error(ErrorCode::kUnsupportedPixelFormat,
                "channels must be 1 or 3, got " +
                    std::to_string(image.channels));
  }
  if (image.width <= 0 || image.height <= 0 ||
      image.samples.size() != static_cast<size_t>(image.width) *
                                  image.height * image.channels) {
    throw Error(ErrorCode::kDimensionMismatch,
                "sample count does not match " + std::to_string(image.width) +
                    "x" + std::to_string(image.height) + "x" +
                    std::to_string(image.channels));
  }
}

NormalizedImage Normalize(const RasterImage& image) {
  ValidateImage(image);
  NormalizedImage out{image.width, image.height, image.channels, {}};
  out.values.reserve(image.samples.size());
  for (uint8_t s : image.samples) out.values.push_back(s / 255.0);
  return out;
}

std::vector<uint8_t> EncodePng(const RasterImage& image, bool fast) {
  ValidateImage(image);
  PngImageGuard guard;
  png_image& png = guard.image;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (fast) png.flags |= PNG_IMAGE_FLAG_FAST;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0,
                                 image.samples.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIoFailure,
                std::string("PNG encode failed: ") + png.message);
  }
  std::vector<uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0,
                                 image.samples.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIoFailure,
                std::string("PNG encode failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

RasterImage DecodePng(std::span<const uint8_t> bytes) {
  PngImageGuard guard;
  png_image& png = guard.image;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kMalformedPng, png.message);
  }
  RasterImage out;
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  out.width = static_cast<int>(png.width);
  out.height = static_cast<int>(png.height);
  out.channels = color ? 3 : 1;
  out.samples.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, out.samples.data(), 0, nullptr)) {
    throw Error(ErrorCode::kMalformedPng, png.message);
  }
  return out;
}

void WritePng(const RasterImage& image, const std::filesystem::path& path,
              bool fast) {
  WriteFileAtomic(path, EncodePng(image, fast));
}

RasterImage ReadPng(const std::filesystem::path& path) {
  try {
    return DecodePng(ReadFileBytes(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIoFailure) throw;
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

ImageDims ReadPngDims(const std::filesystem::path& path) {
  // Signature (8) + IHDR length/type (8) + width, height, depth, color type.
  std::ifstream in(path, std::ios::binary);
  unsigned char header[26];
  if (!in.read(reinterpret_cast<char*>(header), sizeof(header))) {
    throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  }
  if (png_sig_cmp(header, 0, 8) != 0 ||
      std::memcmp(header + 12, "IHDR", 4) != 0) {
    throw Error(ErrorCode::kMalformedPng, path.string());
  }
  auto be32 = [&](int offset) {
    return static_cast<int>((uint32_t{header[offset]} << 24) |
                            (uint32_t{header[offset + 1]} << 16) |
                            (uint32_t{header[offset + 2]} << 8) |
                            uint32_t{header[offset + 3]});
  };
  const int color_type = header[25];
  const bool color = (color_type & 2) != 0;
  return {be32(16), be32(20), color ? 3 : 1};
}

}  // namespace nodulekit
