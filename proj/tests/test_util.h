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

// Shared fixtures, generators and brute-force oracles for the tests. The
// oracles deliberately avoid the library's scanline and bit-packed code.
#ifndef NODULEKIT_TESTS_TEST_UTIL_H_
#define NODULEKIT_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "nodulekit/annotations.h"
#include "nodulekit/geometry.h"
#include "nodulekit/manifest.h"
#include "nodulekit/random.h"

namespace nodulekit::testing {

inline NodulePolygon Poly(std::vector<Point2D> v, int class_id = 0) {
  NodulePolygon p;
  p.vertices = std::move(v);
  p.class_id = class_id;
  return p;
}

inline NodulePolygon Rect(double x0, double y0, double x1, double y1) {
  return Poly({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

// Classic crossing-number test with the library's documented conventions:
// half-open edge rule, crossings strictly right of the point, and the x nudge
// for a point that coincides with a vertex.
inline bool PnpolyInside(const std::vector<Point2D>& v, double px, double py) {
  for (const Point2D& p : v) {
    if (p.x == px && p.y == py) {
      px += kVertexNudge;
      break;
    }
  }
  bool inside = false;
  const size_t n = v.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2D& a = v[i];
    const Point2D& b = v[j];
    if ((a.y > py) != (b.y > py) &&
        px < (b.x - a.x) * (py - a.y) / (b.y - a.y) + a.x) {
      inside = !inside;
    }
  }
  return inside;
}

// Plain row-major 0/1 grid, one byte per pixel.
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> cells;

  Grid(int w, int h) : width(w), height(h), cells(static_cast<size_t>(w) * h) {}
  uint8_t& at(int x, int y) { return cells[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int x, int y) const {
    return cells[static_cast<size_t>(y) * width + x];
  }
  int64_t Count() const {
    return std::count(cells.begin(), cells.end(), uint8_t{1});
  }
};

inline Grid OracleRaster(const NodulePolygon& p, int w, int h) {
  Grid g(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      g.at(x, y) = PnpolyInside(p.vertices, x + 0.5, y + 0.5) ? 1 : 0;
    }
  }
  return g;
}

inline Grid ToGrid(const InstanceMask& m) {
  Grid g(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) g.at(x, y) = m.Test(x, y) ? 1 : 0;
  }
  return g;
}

inline InstanceMask FromGrid(const Grid& g) {
  Bitmap b(g.width, g.height);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      if (g.at(x, y)) b.Set(x, y);
    }
  }
  return InstanceMask(g.width, g.height, std::move(b).Release());
}

// Pixel-loop IoU; 0 when the union is empty.
inline double OracleIou(const Grid& a, const Grid& b) {
  int64_t inter = 0, uni = 0;
  for (size_t i = 0; i < a.cells.size(); ++i) {
    inter += a.cells[i] & b.cells[i];
    uni += a.cells[i] | b.cells[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Random convex polygon: sorted angles around a center, fixed radius jitter
// kept small enough to stay convex-ish (star-shaped in any case).
inline NodulePolygon RandomStarPolygon(Rng& rng, double cx, double cy,
                                       double r_lo, double r_hi, int n) {
  std::vector<double> angles(static_cast<size_t>(n));
  for (double& a : angles) a = rng.Uniform(0.0, 2.0 * std::numbers::pi);
  std::sort(angles.begin(), angles.end());
  NodulePolygon p;
  for (double a : angles) {
    const double r = rng.Uniform(r_lo, r_hi);
    p.vertices.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  }
  return p;
}

// Convex hull (monotone chain) of random points: a genuinely convex polygon.
inline NodulePolygon RandomConvexPolygon(Rng& rng, double x0, double y0,
                                         double x1, double y1, int n_points) {
  std::vector<Point2D> pts;
  for (int i = 0; i < n_points; ++i) {
    pts.push_back({rng.Uniform(x0, x1), rng.Uniform(y0, y1)});
  }
  std::sort(pts.begin(), pts.end(), [](const Point2D& a, const Point2D& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  auto cross = [](const Point2D& o, const Point2D& a, const Point2D& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<Point2D> hull(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return Poly(hull);
}

// Arbitrary (possibly self-intersecting) polygon whose vertices sit on the
// half-pixel lattice, so many of them coincide with pixel centers.
inline NodulePolygon RandomLatticePolygon(Rng& rng, int w, int h, int n) {
  while (true) {
    NodulePolygon p;
    for (int i = 0; i < n; ++i) {
      p.vertices.push_back({rng.IntIn(-2, 2 * w + 2) * 0.5,
                            rng.IntIn(-2, 2 * h + 2) * 0.5});
    }
    if (SignedShoelaceArea(p.vertices) != 0.0) return p;
  }
}

inline double Perimeter(const NodulePolygon& p) {
  double s = 0.0;
  const size_t n = p.vertices.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    s += std::hypot(p.vertices[i].x - p.vertices[j].x,
                    p.vertices[i].y - p.vertices[j].y);
  }
  return s;
}

inline AnnotationRecord Record(const std::string& image,
                               const std::string& patient, int w, int h,
                               std::vector<NodulePolygon> nodules) {
  AnnotationRecord r;
  r.image_ref = image;
  r.patient_id = patient;
  r.image_width = w;
  r.image_height = h;
  r.nodules = std::move(nodules);
  r.no_finding = r.nodules.empty();
  return r;
}

// Manifest with the published V1 shape (2,075 patients, 4,129 images, 4,407
// nodules) of which 106 patients, 197 images and 215 nodules are doppler-only,
// plus a few excluded entries that must not count anywhere.
inline DatasetManifest PublishedShapeManifest() {
  DatasetManifest m;
  auto add = [&](const std::string& patient, int images, int& two_nodule,
                 bool doppler) {
    for (int k = 0; k < images; ++k) {
      ManifestEntry e;
      e.patient_id = patient;
      e.image_ref = patient + "_" + std::to_string(k) + ".png";
      e.doppler = doppler;
      e.n_nodules = two_nodule > 0 ? 2 : 1;
      if (two_nodule > 0) --two_nodule;
      m.entries.push_back(std::move(e));
    }
  };
  char id[16];
  // Non-doppler: 1,969 patients, 3,932 images, 4,192 nodules.
  int extra = 4192 - 3932;
  for (int p = 0; p < 1969; ++p) {
    std::snprintf(id, sizeof(id), "N%05d", p);
    add(id, p < 1963 ? 2 : 1, extra, false);
  }
  // Doppler-only: 106 patients, 197 images, 215 nodules.
  extra = 215 - 197;
  for (int p = 0; p < 106; ++p) {
    std::snprintf(id, sizeof(id), "D%05d", p);
    add(id, p < 91 ? 2 : 1, extra, true);
  }
  for (int p = 0; p < 5; ++p) {
    ManifestEntry e;
    e.patient_id = "X" + std::to_string(p);
    e.image_ref = e.patient_id + "_0.png";
    e.n_nodules = 3;
    e.doppler = p % 2 == 0;
    e.excluded = "artifact";
    m.entries.push_back(std::move(e));
  }
  std::sort(m.entries.begin(), m.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) {
              return a.image_ref < b.image_ref;
            });
  m.stats = ComputeStats(m.entries);
  return m;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(std::hash<std::string>{}(tag) ^
            static_cast<uint64_t>(reinterpret_cast<uintptr_t>(this)));
    path_ = std::filesystem::temp_directory_path() /
            ("nodulekit_" + tag + "_" + std::to_string(rng.Next() % 1000000007));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace nodulekit::testing

#endif  // NODULEKIT_TESTS_TEST_UTIL_H_
