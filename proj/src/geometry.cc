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
#include "nodulekit/geometry.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "nodulekit/error.h"

namespace nodulekit {

namespace {

size_t WordCount(int width, int height) {
  const uint64_t bits = static_cast<uint64_t>(width) * height;
  return static_cast<size_t>((bits + 63) / 64);
}

// Smallest pixel index i in [0, limit] whose center i + 0.5 is >= a. Returns
// limit when no center in the row qualifies.
int FirstCenterAtOrAfter(double a, int limit) {
  if (!(a > 0.5)) return 0;
  if (a > limit - 0.5) return limit;
  int i = static_cast<int>(std::floor(a - 0.5));
  while (i < limit && i + 0.5 < a) ++i;
  while (i > 0 && (i - 1) + 0.5 >= a) --i;
  return i;
}

// Crossing abscissae of the horizontal line y = py with the polygon edges,
// using the half-open rule (yi > py) != (yj > py). The count is always even.
void RowCrossings(std::span<const Point2D> v, double py,
                  std::vector<double>& xs) {
  xs.clear();
  const size_t n = v.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2D& a = v[i];
    const Point2D& b = v[j];
    if ((a.y > py) != (b.y > py)) {
      xs.push_back((b.x - a.x) * (py - a.y) / (b.y - a.y) + a.x);
    }
  }
  std::sort(xs.begin(), xs.end());
}

// Even-odd membership of px given sorted crossings: inside iff an odd number
// of crossings lie strictly right of px.
bool InsideRow(const std::vector<double>& xs, double px) {
  const auto right = xs.end() - std::upper_bound(xs.begin(), xs.end(), px);
  return (right & 1) != 0;
}

// Calls emit(y, x_begin, x_end) for each run of set pixels.
template <typename Emit>
void ScanPolygon(const NodulePolygon& polygon, int width, int height,
                 Emit&& emit) {
  ValidatePolygon(polygon);
  const auto& v = polygon.vertices;
  double y_lo = v[0].y;
  double y_hi = v[0].y;
  for (const Point2D& p : v) {
    y_lo = std::min(y_lo, p.y);
    y_hi = std::max(y_hi, p.y);
  }
  const int row_begin = FirstCenterAtOrAfter(y_lo, height);
  const int row_end = std::min(height, FirstCenterAtOrAfter(y_hi, height) + 1);

  std::vector<double> xs;
  std::vector<int> nudged;
  std::vector<char> row;
  for (int y = row_begin; y < row_end; ++y) {
    const double py = y + 0.5;
    RowCrossings(v, py, xs);
    if (xs.empty()) continue;

    nudged.clear();
    for (const Point2D& p : v) {
      if (p.y != py) continue;
      const double i = p.x - 0.5;
      if (i >= 0 && i < width && i == std::floor(i)) {
        nudged.push_back(static_cast<int>(i));
      }
    }

    if (nudged.empty()) {
      for (size_t k = 0; k + 1 < xs.size(); k += 2) {
        const int begin = FirstCenterAtOrAfter(xs[k], width);
        const int end = FirstCenterAtOrAfter(xs[k + 1], width);
        if (begin < end) emit(y, begin, end);
      }
      continue;
    }

    // Rare: a vertex sits exactly on a pixel center in this row.
    row.assign(width, 0);
    for (size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int begin = FirstCenterAtOrAfter(xs[k], width);
      const int end = FirstCenterAtOrAfter(xs[k + 1], width);
      for (int x = begin; x < end; ++x) row[x] = 1;
    }
    for (int x : nudged) row[x] = InsideRow(xs, x + 0.5 + kVertexNudge);
    int x = 0;
    while (x < width) {
      if (!row[x]) {
        ++x;
        continue;
      }
      int end = x;
      while (end < width && row[end]) ++end;
      emit(y, x, end);
      x = end;
    }
  }
}

}  // namespace

std::optional<Tirads> ParseTirads(const std::string& text) {
  if (text.size() == 3 && text[0] == 'T' && text[1] == 'R' && text[2] >= '1' &&
      text[2] <= '5') {
    return static_cast<Tirads>(text[2] - '0');
  }
  return std::nullopt;
}

std::string TiradsName(Tirads t) {
  return "TR" + std::to_string(static_cast<int>(t));
}

InstanceMask::InstanceMask(int width, int height, std::vector<uint64_t> words)
    : width_(width), height_(height), words_(std::move(words)) {
  if (width <= 0 || height <= 0 || words_.size() != WordCount(width, height)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mask storage does not match " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  int x_min = width, y_min = height, x_max = -1, y_max = -1;
  for (size_t w = 0; w < words_.size(); ++w) {
    uint64_t bits = words_[w];
    if (bits == 0) continue;
    area_ += std::popcount(bits);
    while (bits != 0) {
      const int64_t index = static_cast<int64_t>(w) * 64 + std::countr_zero(bits);
      bits &= bits - 1;
      const int y = static_cast<int>(index / width);
      const int x = static_cast<int>(index % width);
      if (y >= height) {
        throw Error(ErrorCode::kDimensionMismatch, "mask has bits past frame");
      }
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (area_ == 0) throw Error(ErrorCode::kEmptyMask, "mask has no set pixels");
  bbox_ = {static_cast<double>(x_min), static_cast<double>(y_min),
           static_cast<double>(x_max + 1), static_cast<double>(y_max + 1)};
}

bool InstanceMask::Test(int x, int y) const {
  const int64_t index = static_cast<int64_t>(y) * width_ + x;
  return (words_[index >> 6] >> (index & 63)) & 1;
}

Bitmap::Bitmap(int width, int height)
    : width_(width), height_(height), words_(WordCount(width, height), 0) {}

void Bitmap::Set(int x, int y) {
  const int64_t index = static_cast<int64_t>(y) * width_ + x;
  words_[index >> 6] |= uint64_t{1} << (index & 63);
}

void Bitmap::SetRun(int y, int x_begin, int x_end) {
  int64_t begin = static_cast<int64_t>(y) * width_ + x_begin;
  const int64_t end = static_cast<int64_t>(y) * width_ + x_end;
  while (begin < end) {
    const int64_t word = begin >> 6;
    const int offset = static_cast<int>(begin & 63);
    const int64_t span = std::min<int64_t>(64 - offset, end - begin);
    const uint64_t mask =
        (span == 64 ? ~uint64_t{0} : ((uint64_t{1} << span) - 1)) << offset;
    words_[word] |= mask;
    begin += span;
  }
}

bool Bitmap::Test(int x, int y) const {
  const int64_t index = static_cast<int64_t>(y) * width_ + x;
  return (words_[index >> 6] >> (index & 63)) & 1;
}

void Bitmap::OrWith(std::span<const uint64_t> words) {
  if (words.size() != words_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "bitmap size mismatch");
  }
  for (size_t i = 0; i < words_.size(); ++i) words_[i] |= words[i];
}

int64_t Bitmap::Count() const {
  int64_t count = 0;
  for (uint64_t w : words_) count += std::popcount(w);
  return count;
}

void ValidatePolygon(const NodulePolygon& polygon) {
  if (polygon.vertices.size() < 3) {
    throw Error(ErrorCode::kDegeneratePolygon,
                "polygon has " + std::to_string(polygon.vertices.size()) +
                    " vertices; at least 3 required");
  }
  for (const Point2D& p : polygon.vertices) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::kDegeneratePolygon, "non-finite vertex");
    }
  }
  const double area = SignedShoelaceArea(polygon.vertices);
  if (area == 0.0 || !std::isfinite(area)) {
    throw Error(ErrorCode::kDegeneratePolygon, "polygon has zero area");
  }
}

double SignedShoelaceArea(std::span<const Point2D> vertices) {
  const size_t n = vertices.size();
  if (n < 3) return 0.0;
  double sum = 0.0;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    sum += vertices[j].x * vertices[i].y - vertices[i].x * vertices[j].y;
  }
  return sum / 2.0;
}

double ShoelaceArea(const NodulePolygon& polygon) {
  ValidatePolygon(polygon);
  return std::abs(SignedShoelaceArea(polygon.vertices));
}

std::optional<InstanceMask> TryRasterize(const NodulePolygon& polygon,
                                         int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kDimensionMismatch, "frame must be non-empty");
  }
  Bitmap bitmap(width, height);
  if (RasterizeInto(polygon, bitmap) == 0) return std::nullopt;
  return InstanceMask(width, height, std::move(bitmap).Release());
}

InstanceMask Rasterize(const NodulePolygon& polygon, int width, int height) {
  auto mask = TryRasterize(polygon, width, height);
  if (!mask) {
    throw Error(ErrorCode::kEmptyMask,
                "no pixel center falls inside the polygon");
  }
  return *std::move(mask);
}

int64_t RasterizeInto(const NodulePolygon& polygon, Bitmap& bitmap) {
  int64_t covered = 0;
  ScanPolygon(polygon, bitmap.width(), bitmap.height(),
              [&](int y, int begin, int end) {
                bitmap.SetRun(y, begin, end);
                covered += end - begin;
              });
  return covered;
}

BoundingBox PolygonBbox(const NodulePolygon& polygon) {
  ValidatePolygon(polygon);
  BoundingBox box{std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
  for (const Point2D& p : polygon.vertices) {
    box.x_min = std::min(box.x_min, p.x);
    box.y_min = std::min(box.y_min, p.y);
    box.x_max = std::max(box.x_max, p.x);
    box.y_max = std::max(box.y_max, p.y);
  }
  return box;
}

double BoxIou(const BoundingBox& a, const BoundingBox& b) {
  const double area_a = a.area();
  const double area_b = b.area();
  if (!(area_a > 0.0) || !(area_b > 0.0)) return 0.0;
  const double iw =
      std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih =
      std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = area_a + area_b - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

int64_t IntersectionCount(std::span<const uint64_t> a,
                          std::span<const uint64_t> b) {
  int64_t count = 0;
  const size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) count += std::popcount(a[i] & b[i]);
  return count;
}

double MaskIou(const InstanceMask& a, const InstanceMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                    " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
  const BoundingBox& ba = a.bbox();
  const BoundingBox& bb = b.bbox();
  if (ba.x_max <= bb.x_min || bb.x_max <= ba.x_min || ba.y_max <= bb.y_min ||
      bb.y_max <= ba.y_min) {
    return 0.0;
  }
  const int64_t inter = IntersectionCount(a.words(), b.words());
  const int64_t uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace nodulekit
