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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nodulekit/error.h"
#include "nodulekit/random.h"
#include "test_util.h"

namespace nodulekit {
namespace {

using testing::FromGrid;
using testing::OracleIou;
using testing::OracleRaster;
using testing::Poly;
using testing::Rect;
using testing::ToGrid;

template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIoFailure;
}

TEST(ShoelaceTest, UnitSquareAndTriangle) {
  EXPECT_EQ(ShoelaceArea(Rect(0, 0, 1, 1)), 1.0);
  EXPECT_EQ(ShoelaceArea(Poly({{0, 0}, {4, 0}, {0, 3}})), 6.0);
}

TEST(ShoelaceTest, DegenerateInputs) {
  EXPECT_EQ(CodeOf([] { ShoelaceArea(Poly({{0, 0}, {1, 1}})); }),
            ErrorCode::kDegeneratePolygon);
  EXPECT_EQ(CodeOf([] { ShoelaceArea(Poly({{1, 1}, {1, 1}, {1, 1}})); }),
            ErrorCode::kDegeneratePolygon);
  EXPECT_EQ(CodeOf([] { ShoelaceArea(Poly({{0, 0}, {1, 1}, {2, 2}})); }),
            ErrorCode::kDegeneratePolygon);
  EXPECT_EQ(CodeOf([] { ShoelaceArea(Poly({{0, 0}, {NAN, 1}, {2, 0}})); }),
            ErrorCode::kDegeneratePolygon);
  EXPECT_EQ(CodeOf([] {
              ShoelaceArea(Poly({{0, 0}, {INFINITY, 1}, {2, 0}}));
            }),
            ErrorCode::kDegeneratePolygon);
}

TEST(ShoelaceTest, WithinPerimeterBandOfRasterCount) {
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const NodulePolygon p =
        testing::RandomConvexPolygon(rng, 20, 20, 236, 236, 12);
    const InstanceMask m = Rasterize(p, 256, 256);
    EXPECT_LE(std::abs(ShoelaceArea(p) - static_cast<double>(m.area())),
              1.5 * testing::Perimeter(p))
        << "polygon " << t;
  }
}

TEST(RasterizeTest, TwoByTwoSquare) {
  const InstanceMask m = Rasterize(Rect(0, 0, 2, 2), 4, 4);
  EXPECT_EQ(m.area(), 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      EXPECT_EQ(m.Test(x, y), x < 2 && y < 2) << x << "," << y;
    }
  }
  EXPECT_EQ(m.bbox(), (BoundingBox{0, 0, 2, 2}));
}

TEST(RasterizeTest, OutsideFrameIsEmptyMask) {
  EXPECT_EQ(CodeOf([] { Rasterize(Rect(10, 10, 20, 20), 4, 4); }),
            ErrorCode::kEmptyMask);
  EXPECT_FALSE(TryRasterize(Rect(10, 10, 20, 20), 4, 4).has_value());
  EXPECT_EQ(CodeOf([] { Rasterize(Rect(0.6, 0.6, 1.4, 1.4), 4, 4); }),
            ErrorCode::kEmptyMask);
}

TEST(RasterizeTest, BadFrame) {
  EXPECT_EQ(CodeOf([] { Rasterize(Rect(0, 0, 2, 2), 0, 4); }),
            ErrorCode::kDimensionMismatch);
}

TEST(RasterizeTest, MatchesOracleOnConvexPolygons) {
  Rng rng(101);
  for (int t = 0; t < 100; ++t) {
    const NodulePolygon p =
        testing::RandomConvexPolygon(rng, -20, -20, 276, 276, 10);
    const auto m = TryRasterize(p, 256, 256);
    const testing::Grid oracle = OracleRaster(p, 256, 256);
    if (!m) {
      EXPECT_EQ(oracle.Count(), 0);
      continue;
    }
    EXPECT_EQ(ToGrid(*m).cells, oracle.cells) << "polygon " << t;
    EXPECT_EQ(m->area(), oracle.Count());
  }
}

TEST(RasterizeTest, MatchesOracleOnLatticeAndSelfIntersecting) {
  Rng rng(202);
  for (int t = 0; t < 300; ++t) {
    const int w = rng.IntIn(1, 24);
    const int h = rng.IntIn(1, 24);
    const NodulePolygon p =
        testing::RandomLatticePolygon(rng, w, h, rng.IntIn(3, 9));
    const testing::Grid oracle = OracleRaster(p, w, h);
    Bitmap b(w, h);
    const int64_t n = RasterizeInto(p, b);
    EXPECT_EQ(n, oracle.Count());
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        ASSERT_EQ(b.Test(x, y), oracle.at(x, y) == 1)
            << "case " << t << " pixel " << x << "," << y;
      }
    }
  }
}

TEST(RasterizeTest, StarPolygonsMatchOracle) {
  Rng rng(303);
  for (int t = 0; t < 100; ++t) {
    const NodulePolygon p =
        testing::RandomStarPolygon(rng, 64, 48, 5, 40, rng.IntIn(3, 30));
    const auto m = TryRasterize(p, 128, 96);
    const testing::Grid oracle = OracleRaster(p, 128, 96);
    ASSERT_EQ(m.has_value(), oracle.Count() > 0);
    if (m) {
      EXPECT_EQ(ToGrid(*m).cells, oracle.cells) << "polygon " << t;
    }
  }
}

TEST(RasterizeTest, BowtieFillsEvenOdd) {
  // Lopsided bowtie (a symmetric one has zero signed area): both lobes are
  // filled, nothing else.
  const NodulePolygon p = Poly({{0, 0}, {8, 8}, {8, 0}, {0, 6}});
  const InstanceMask m = Rasterize(p, 8, 8);
  EXPECT_EQ(ToGrid(m).cells, OracleRaster(p, 8, 8).cells);
  EXPECT_TRUE(m.Test(0, 4));
  EXPECT_TRUE(m.Test(7, 4));
  EXPECT_FALSE(m.Test(4, 0));
  EXPECT_FALSE(m.Test(4, 7));
  EXPECT_EQ(CodeOf([] {
              ShoelaceArea(Poly({{0, 0}, {8, 8}, {8, 0}, {0, 8}}));
            }),
            ErrorCode::kDegeneratePolygon);

  // Doubly wound square: even-odd leaves the overlap empty.
  const NodulePolygon twice = Poly({{0, 0}, {4, 0}, {4, 4}, {0, 4},
                                    {0, 0}, {4, 0}, {4, 4}, {0, 4}});
  EXPECT_FALSE(TryRasterize(twice, 4, 4).has_value());
}

TEST(RasterizeTest, VertexOnPixelCenterUsesNudge) {
  // Apex exactly on the center of pixel (2, 0).
  const NodulePolygon p = Poly({{2.5, 0.5}, {4.5, 3.5}, {0.5, 3.5}});
  const InstanceMask m = Rasterize(p, 5, 4);
  EXPECT_EQ(ToGrid(m).cells, OracleRaster(p, 5, 4).cells);
}

TEST(RasterizeTest, AreaBoundedByExpandedBbox) {
  Rng rng(404);
  for (int t = 0; t < 200; ++t) {
    const NodulePolygon p = testing::RandomLatticePolygon(rng, 30, 30, 6);
    const auto m = TryRasterize(p, 30, 30);
    if (!m) continue;
    const BoundingBox b = PolygonBbox(p);
    const double expanded = (b.width() + 2) * (b.height() + 2);
    EXPECT_LE(static_cast<double>(m->area()), expanded);
    // bbox contains the raster hull expanded by at most one pixel.
    EXPECT_GE(m->bbox().x_min, b.x_min - 1);
    EXPECT_GE(m->bbox().y_min, b.y_min - 1);
    EXPECT_LE(m->bbox().x_max, b.x_max + 1);
    EXPECT_LE(m->bbox().y_max, b.y_max + 1);
  }
}

TEST(RasterizeTest, TranslationInvariance) {
  Rng rng(505);
  for (int t = 0; t < 50; ++t) {
    const NodulePolygon p =
        testing::RandomStarPolygon(rng, 20, 20, 3, 15, rng.IntIn(3, 12));
    const int dx = rng.IntIn(0, 40);
    const int dy = rng.IntIn(0, 40);
    NodulePolygon q = p;
    for (Point2D& v : q.vertices) {
      v.x += dx;
      v.y += dy;
    }
    const auto a = TryRasterize(p, 40, 40);
    const auto b = TryRasterize(q, 40 + dx, 40 + dy);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (!a) continue;
    ASSERT_EQ(a->area(), b->area());
    for (int y = 0; y < 40; ++y) {
      for (int x = 0; x < 40; ++x) {
        ASSERT_EQ(a->Test(x, y), b->Test(x + dx, y + dy));
      }
    }
  }
}

TEST(RasterizeTest, ConvergesWithScale) {
  const NodulePolygon base =
      Poly({{1.3, 0.7}, {5.9, 1.1}, {7.2, 4.8}, {3.1, 6.6}, {0.4, 3.9}});
  double prev = INFINITY;
  for (int s : {1, 4, 16}) {
    NodulePolygon p = base;
    for (Point2D& v : p.vertices) {
      v.x *= s;
      v.y *= s;
    }
    const double area = ShoelaceArea(p);
    const InstanceMask m = Rasterize(p, 8 * s, 8 * s);
    const double rel = std::abs(area - static_cast<double>(m.area())) / area;
    EXPECT_LE(rel, prev) << "scale " << s;
    prev = rel;
  }
  EXPECT_LT(prev, 0.01);
}

TEST(PolygonBboxTest, Examples) {
  EXPECT_EQ(PolygonBbox(Poly({{0, 0}, {4, 0}, {0, 3}})),
            (BoundingBox{0, 0, 4, 3}));
  EXPECT_EQ(CodeOf([] { PolygonBbox(Poly({{2, 2}, {2, 2}, {2, 2}})); }),
            ErrorCode::kDegeneratePolygon);
}

TEST(BoxIouTest, Examples) {
  const BoundingBox a{0, 0, 1, 1};
  EXPECT_EQ(BoxIou(a, a), 1.0);
  EXPECT_EQ(BoxIou(a, {5, 5, 6, 6}), 0.0);
  EXPECT_EQ(BoxIou({0, 0, 2, 2}, {1, 1, 3, 3}), 1.0 / 7.0);
  EXPECT_NEAR(BoxIou({0, 0, 2, 2}, {1, 1, 3, 3}), 0.142857, 1e-6);
  const BoundingBox flat{1, 1, 1, 5};
  EXPECT_EQ(BoxIou(flat, flat), 0.0);
  EXPECT_EQ(BoxIou(flat, {0, 0, 4, 4}), 0.0);
}

TEST(BoxIouTest, MatchesDirectArithmeticAndIsSymmetric) {
  Rng rng(606);
  for (int t = 0; t < 1000; ++t) {
    auto box = [&] {
      const double x0 = rng.IntIn(0, 40) * 0.25, y0 = rng.IntIn(0, 40) * 0.25;
      return BoundingBox{x0, y0, x0 + rng.IntIn(1, 40) * 0.25,
                         y0 + rng.IntIn(1, 40) * 0.25};
    };
    const BoundingBox a = box(), b = box();
    const double iw = std::max(0.0, std::min(a.x_max, b.x_max) -
                                        std::max(a.x_min, b.x_min));
    const double ih = std::max(0.0, std::min(a.y_max, b.y_max) -
                                        std::max(a.y_min, b.y_min));
    const double inter = iw * ih;
    const double expect = inter / (a.area() + b.area() - inter);
    EXPECT_EQ(BoxIou(a, b), expect);
    EXPECT_EQ(BoxIou(a, b), BoxIou(b, a));
    EXPECT_GE(BoxIou(a, b), 0.0);
    EXPECT_LE(BoxIou(a, b), 1.0);
    EXPECT_EQ(BoxIou(a, b) == 1.0, a == b);
  }
}

TEST(MaskIouTest, Examples) {
  const InstanceMask a = Rasterize(Rect(0, 0, 4, 4), 16, 16);
  const InstanceMask b = Rasterize(Rect(8, 8, 12, 12), 16, 16);
  EXPECT_EQ(MaskIou(a, a), 1.0);
  EXPECT_EQ(MaskIou(a, b), 0.0);
  const InstanceMask c = Rasterize(Rect(2, 0, 6, 4), 16, 16);
  EXPECT_EQ(MaskIou(a, c), 8.0 / 24.0);
  const InstanceMask other = Rasterize(Rect(0, 0, 4, 4), 16, 8);
  EXPECT_EQ(CodeOf([&] { MaskIou(a, other); }), ErrorCode::kDimensionMismatch);
}

TEST(MaskIouTest, MatchesPixelLoopOnRandomPairs) {
  Rng rng(707);
  int checked = 0;
  while (checked < 100) {
    const int w = rng.IntIn(1, 90), h = rng.IntIn(1, 90);
    testing::Grid ga(w, h), gb(w, h);
    const double pa = rng.Uniform01(), pb = rng.Uniform01();
    for (auto& c : ga.cells) c = rng.Bernoulli(pa) ? 1 : 0;
    for (auto& c : gb.cells) c = rng.Bernoulli(pb) ? 1 : 0;
    if (ga.Count() == 0 || gb.Count() == 0) continue;
    const InstanceMask a = FromGrid(ga), b = FromGrid(gb);
    EXPECT_EQ(MaskIou(a, b), OracleIou(ga, gb));
    EXPECT_EQ(MaskIou(a, b), MaskIou(b, a));
    EXPECT_EQ(MaskIou(a, b) == 1.0, a == b);
    EXPECT_EQ(a.area(), ga.Count());
    ++checked;
  }
}

TEST(MaskIouTest, MatchesPixelLoopOnRasterizedPolygons) {
  Rng rng(808);
  for (int t = 0; t < 100; ++t) {
    const NodulePolygon p = testing::RandomStarPolygon(
        rng, rng.Uniform(20, 80), rng.Uniform(20, 60), 4, 25, 8);
    const NodulePolygon q = testing::RandomStarPolygon(
        rng, rng.Uniform(20, 80), rng.Uniform(20, 60), 4, 25, 8);
    const auto a = TryRasterize(p, 100, 80);
    const auto b = TryRasterize(q, 100, 80);
    if (!a || !b) continue;
    EXPECT_EQ(MaskIou(*a, *b),
              OracleIou(OracleRaster(p, 100, 80), OracleRaster(q, 100, 80)));
  }
}

TEST(InstanceMaskTest, BboxIsTightHull) {
  testing::Grid g(10, 7);
  g.at(3, 2) = 1;
  g.at(6, 5) = 1;
  const InstanceMask m = FromGrid(g);
  EXPECT_EQ(m.bbox(), (BoundingBox{3, 2, 7, 6}));
  EXPECT_EQ(m.area(), 2);
}

TEST(InstanceMaskTest, RejectsEmptyAndStrayBits) {
  EXPECT_EQ(CodeOf([] { InstanceMask(4, 4, std::vector<uint64_t>(1, 0)); }),
            ErrorCode::kEmptyMask);
  EXPECT_EQ(CodeOf([] {
              InstanceMask(4, 4, std::vector<uint64_t>(1, uint64_t{1} << 20));
            }),
            ErrorCode::kDimensionMismatch);
}

TEST(TiradsTest, ParseAndName) {
  EXPECT_EQ(ParseTirads("TR3"), Tirads::kTR3);
  EXPECT_EQ(TiradsName(Tirads::kTR5), "TR5");
  EXPECT_FALSE(ParseTirads("TR6").has_value());
}

}  // namespace
}  // namespace nodulekit
