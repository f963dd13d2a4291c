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

// Polygon and mask primitives shared by annotation conversion and every
// IoU-based metric.
//
// Coordinates are continuous pixel coordinates with the origin at the
// top-left corner of the image and y pointing down. Pixel (i, j) covers
// [i, i+1) x [j, j+1) and is sampled at its center (i + 0.5, j + 0.5).
#ifndef NODULEKIT_GEOMETRY_H_
#define NODULEKIT_GEOMETRY_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nodulekit {

struct Point2D {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2D&) const = default;
};

enum class Tirads { kTR1 = 1, kTR2, kTR3, kTR4, kTR5 };

// "TR1".."TR5" <-> enum. Returns nullopt for anything else.
std::optional<Tirads> ParseTirads(const std::string& text);
std::string TiradsName(Tirads t);

// One labeled nodule. Vertices are closed implicitly (last -> first).
struct NodulePolygon {
  std::vector<Point2D> vertices;
  int class_id = 0;
  std::optional<Tirads> tirads;
  std::map<std::string, std::string> shape_attrs;

  bool operator==(const NodulePolygon&) const = default;
};

struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  bool operator==(const BoundingBox&) const = default;
};

// Binary per-instance mask, bit-packed row-major. Never empty: constructing
// from an all-zero bitmap throws kEmptyMask.
class InstanceMask {
 public:
  // `words` holds width*height bits, pixel (x, y) at bit index y*width + x.
  // Bits past width*height must be zero.
  InstanceMask(int width, int height, std::vector<uint64_t> words);

  int width() const { return width_; }
  int height() const { return height_; }
  int64_t area() const { return area_; }
  // Tight hull of set pixels in pixel-edge coordinates: a single set pixel
  // (i, j) has bbox (i, j, i+1, j+1).
  const BoundingBox& bbox() const { return bbox_; }
  std::span<const uint64_t> words() const { return words_; }

  bool Test(int x, int y) const;

  bool operator==(const InstanceMask& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           words_ == other.words_;
  }

 private:
  int width_;
  int height_;
  std::vector<uint64_t> words_;
  int64_t area_ = 0;
  BoundingBox bbox_;
};

// Bit-packed scratch bitmap used to build masks and unions.
class Bitmap {
 public:
  Bitmap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  void Set(int x, int y);
  // Sets pixels [x_begin, x_end) of row y.
  void SetRun(int y, int x_begin, int x_end);
  bool Test(int x, int y) const;
  void OrWith(std::span<const uint64_t> words);
  int64_t Count() const;
  std::span<const uint64_t> words() const { return words_; }
  std::vector<uint64_t> Release() && { return std::move(words_); }

 private:
  int width_;
  int height_;
  std::vector<uint64_t> words_;
};

// Tie-break offset applied to a pixel-center test point that coincides
// exactly with a polygon vertex.
inline constexpr double kVertexNudge = 1.0 / (1 << 20);

// Throws kDegeneratePolygon unless the polygon has >= 3 finite vertices and a
// nonzero signed area.
void ValidatePolygon(const NodulePolygon& polygon);

// Absolute shoelace area in px^2.
double ShoelaceArea(const NodulePolygon& polygon);
double SignedShoelaceArea(std::span<const Point2D> vertices);

// Even-odd fill sampled at pixel centers, clipped to the frame.
InstanceMask Rasterize(const NodulePolygon& polygon, int width, int height);
// As Rasterize, but returns nullopt instead of throwing kEmptyMask.
std::optional<InstanceMask> TryRasterize(const NodulePolygon& polygon,
                                         int width, int height);
// Rasterizes into an existing bitmap (OR). Returns the number of pixels the
// polygon covers, counting overlaps with pixels already set.
int64_t RasterizeInto(const NodulePolygon& polygon, Bitmap& bitmap);

BoundingBox PolygonBbox(const NodulePolygon& polygon);

// Intersection over union. Zero-area boxes have IoU 0 against anything.
double BoxIou(const BoundingBox& a, const BoundingBox& b);
double MaskIou(const InstanceMask& a, const InstanceMask& b);

// Intersection popcount of two equally sized bit-packed bitmaps.
int64_t IntersectionCount(std::span<const uint64_t> a,
                          std::span<const uint64_t> b);

}  // namespace nodulekit

#endif  // NODULEKIT_GEOMETRY_H_
