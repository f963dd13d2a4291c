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

#include "nodulekit/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>

#include "nodulekit/error.h"
#include "nodulekit/random.h"

namespace nodulekit {

namespace {

constexpr double kEdgeMarginPx = 4.0;
constexpr double kNoduleGapPx = 4.0;
constexpr int kPlacementAttempts = 1000;
constexpr int kSpuriousAttempts = 200;
constexpr int kJitterHalvings = 8;
constexpr int kSpuriousVertices = 12;
constexpr DoubleRange kSpuriousSemiAxis = {3.0, 8.0};

[[noreturn]] void BadConfig(const std::string& what) {
  throw Error(ErrorCode::kInvalidConfig, what);
}

void CheckRange(const IntRange& r, int min_lo, const char* name) {
  if (r.lo < min_lo || r.hi < r.lo) {
    BadConfig(std::string(name) + " range [" + std::to_string(r.lo) + ", " +
              std::to_string(r.hi) + "] is empty or below " +
              std::to_string(min_lo));
  }
}

void CheckFraction(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    BadConfig(std::string(name) + " " + std::to_string(v) +
              " must lie in [0, 1]");
  }
}

void CheckScoreRange(const DoubleRange& r, const char* name) {
  if (!(r.lo >= 0.0 && r.hi <= 1.0 && r.lo <= r.hi)) {
    BadConfig(std::string(name) + " must be a non-empty range inside [0, 1]");
  }
}

BoundingBox EllipseBox(const Ellipse& e) {
  const double c = std::cos(e.angle);
  const double s = std::sin(e.angle);
  const double hx = std::hypot(e.rx * c, e.ry * s);
  const double hy = std::hypot(e.rx * s, e.ry * c);
  return {e.cx - hx, e.cy - hy, e.cx + hx, e.cy + hy};
}

// Closed boxes separated by at least `gap` along some axis.
bool Separated(const BoundingBox& a, const BoundingBox& b, double gap) {
  return a.x_max + gap <= b.x_min || b.x_max + gap <= a.x_min ||
         a.y_max + gap <= b.y_min || b.y_max + gap <= a.y_min;
}

// Places an ellipse with semi-axes from `axes` fully inside the frame, at
// least `gap` away from every box in `avoid`.
std::optional<Ellipse> PlaceEllipse(Rng& rng, int width, int height,
                                    const DoubleRange& axes,
                                    const std::vector<BoundingBox>& avoid,
                                    double gap, int attempts) {
  for (int a = 0; a < attempts; ++a) {
    Ellipse e;
    e.rx = rng.Uniform(axes.lo, axes.hi);
    e.ry = rng.Uniform(axes.lo, axes.hi);
    e.angle = rng.Uniform(0.0, std::numbers::pi);
    const BoundingBox half = EllipseBox({0.0, 0.0, e.rx, e.ry, e.angle});
    const double x_lo = kEdgeMarginPx + half.x_max;
    const double x_hi = width - kEdgeMarginPx - half.x_max;
    const double y_lo = kEdgeMarginPx + half.y_max;
    const double y_hi = height - kEdgeMarginPx - half.y_max;
    if (x_lo > x_hi || y_lo > y_hi) continue;
    e.cx = rng.Uniform(x_lo, x_hi);
    e.cy = rng.Uniform(y_lo, y_hi);
    const BoundingBox box = EllipseBox(e);
    if (std::all_of(avoid.begin(), avoid.end(), [&](const BoundingBox& b) {
          return Separated(box, b, gap);
        })) {
      return e;
    }
  }
  return std::nullopt;
}

std::string PatientId(const std::string& prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "-%06d", index);
  return prefix + buf;
}

// Uniform point in the disk of radius r.
Point2D DiskSample(Rng& rng, double r) {
  const double rho = r * std::sqrt(rng.Uniform01());
  const double theta = rng.Uniform(0.0, 2.0 * std::numbers::pi);
  return {rho * std::cos(theta), rho * std::sin(theta)};
}

struct GtInstance {
  std::optional<InstanceMask> mask;
  BoundingBox box;
};

// A jittered copy of gts[g] satisfying the IoU guard, or nullopt.
std::optional<NodulePolygon> TryJitter(Rng& rng, const AnnotationRecord& rec,
                                       const std::vector<GtInstance>& gts,
                                       size_t g, double radius,
                                       double guard) {
  const NodulePolygon& src = rec.nodules[g];
  NodulePolygon cand;
  cand.class_id = src.class_id;
  for (const Point2D& p : src.vertices) {
    const Point2D d = DiskSample(rng, radius);
    cand.vertices.push_back(
        {std::clamp(p.x + d.x, 0.0, static_cast<double>(rec.image_width)),
         std::clamp(p.y + d.y, 0.0, static_cast<double>(rec.image_height))});
  }
  try {
    ValidatePolygon(cand);
  } catch (const Error&) {
    return std::nullopt;
  }
  const auto mask = TryRasterize(cand, rec.image_width, rec.image_height);
  if (!mask || !gts[g].mask) return std::nullopt;
  const BoundingBox box = PolygonBbox(cand);
  const double mask_iou = MaskIou(*mask, *gts[g].mask);
  const double box_iou = BoxIou(box, gts[g].box);
  if (mask_iou < guard || box_iou < guard) return std::nullopt;
  for (size_t h = 0; h < gts.size(); ++h) {
    if (h == g) continue;
    if (gts[h].mask && MaskIou(*mask, *gts[h].mask) >= mask_iou) {
      return std::nullopt;
    }
    if (BoxIou(box, gts[h].box) >= box_iou) return std::nullopt;
  }
  return cand;
}

}  // namespace

void ValidateSynthConfig(const SynthConfig& cfg) {
  if (cfg.n_patients < 1) BadConfig("n_patients must be >= 1");
  CheckRange(cfg.images_per_patient, 1, "images_per_patient");
  CheckRange(cfg.width, 32, "width");
  CheckRange(cfg.height, 32, "height");
  CheckRange(cfg.nodules_per_image, 1, "nodules_per_image");
  CheckFraction(cfg.no_finding_rate, "no_finding_rate");
  CheckFraction(cfg.doppler_fraction, "doppler_fraction");
  if (!(cfg.semi_axis_px.lo >= 2.0 && cfg.semi_axis_px.hi >= cfg.semi_axis_px.lo)) {
    BadConfig("semi_axis_px range must be non-empty with lo >= 2");
  }
  const double span = 2.0 * (cfg.semi_axis_px.hi + kEdgeMarginPx);
  if (span > std::min(cfg.width.lo, cfg.height.lo)) {
    BadConfig("semi_axis_px.hi " + std::to_string(cfg.semi_axis_px.hi) +
              " does not fit the smallest frame");
  }
  if (!(cfg.background_mean > 0.0 && cfg.background_mean <= 255.0)) {
    BadConfig("background_mean must lie in (0, 255]");
  }
  if (!(cfg.contrast > 0.0 && cfg.contrast < cfg.background_mean)) {
    BadConfig("contrast must lie in (0, background_mean)");
  }
  if (!(cfg.speckle_sigma >= 0.0 && cfg.speckle_sigma <= 2.0)) {
    BadConfig("speckle_sigma must lie in [0, 2]");
  }
  if (cfg.polygon_vertices < 3) BadConfig("polygon_vertices must be >= 3");
  if (cfg.patient_prefix.empty()) BadConfig("patient_prefix is empty");
}

NodulePolygon EllipsePolygon(const Ellipse& e, int n) {
  NodulePolygon p;
  const double c = std::cos(e.angle);
  const double s = std::sin(e.angle);
  p.vertices.reserve(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * k / n;
    const double u = e.rx * std::cos(t);
    const double v = e.ry * std::sin(t);
    p.vertices.push_back({e.cx + u * c - v * s, e.cy + u * s + v * c});
  }
  return p;
}

SynthDataset Generate(const SynthConfig& cfg) {
  ValidateSynthConfig(cfg);
  SynthDataset ds;
  ds.config = cfg;
  Rng master(cfg.seed);

  for (int p = 1; p <= cfg.n_patients; ++p) {
    const std::string pid = PatientId(cfg.patient_prefix, p);
    const int n = master.IntIn(cfg.images_per_patient.lo,
                               cfg.images_per_patient.hi);
    for (int k = 0; k < n; ++k) {
      ImagePlan plan;
      plan.patient_id = pid;
      plan.image_ref = pid + "_" + std::to_string(k) + ".png";
      ds.plans.push_back(std::move(plan));
    }
  }

  const size_t n_images = ds.plans.size();
  std::vector<size_t> order(n_images);
  for (size_t i = 0; i < n_images; ++i) order[i] = i;
  master.Shuffle(order);
  const auto n_doppler = static_cast<size_t>(
      std::llround(cfg.doppler_fraction * static_cast<double>(n_images)));
  for (size_t i = 0; i < n_doppler; ++i) ds.plans[order[i]].doppler = true;

  for (size_t i = 0; i < n_images; ++i) {
    ImagePlan& plan = ds.plans[i];
    plan.seed = MixSeed(cfg.seed, i);
    Rng rng(plan.seed);
    plan.width = rng.IntIn(cfg.width.lo, cfg.width.hi);
    plan.height = rng.IntIn(cfg.height.lo, cfg.height.hi);
    const bool no_finding = rng.Bernoulli(cfg.no_finding_rate);
    const int n_nodules =
        no_finding ? 0
                   : rng.IntIn(cfg.nodules_per_image.lo, cfg.nodules_per_image.hi);
    std::vector<BoundingBox> boxes;
    for (int k = 0; k < n_nodules; ++k) {
      const auto e = PlaceEllipse(rng, plan.width, plan.height,
                                  cfg.semi_axis_px, boxes, kNoduleGapPx,
                                  kPlacementAttempts);
      if (!e) {
        BadConfig("cannot place " + std::to_string(n_nodules) +
                  " disjoint nodules in " + plan.image_ref);
      }
      plan.nodules.push_back(*e);
      boxes.push_back(EllipseBox(*e));
    }

    AnnotationRecord rec;
    rec.image_ref = plan.image_ref;
    rec.patient_id = plan.patient_id;
    rec.image_width = plan.width;
    rec.image_height = plan.height;
    rec.no_finding = no_finding;
    rec.doppler = plan.doppler;
    for (const Ellipse& e : plan.nodules) {
      NodulePolygon poly = EllipsePolygon(e, cfg.polygon_vertices);
      poly.tirads = static_cast<Tirads>(rng.IntIn(1, 5));
      rec.nodules.push_back(std::move(poly));
    }
    ds.annotations.records.push_back(std::move(rec));
  }

  auto by_ref = [](const auto& a, const auto& b) {
    return a.image_ref < b.image_ref;
  };
  std::sort(ds.plans.begin(), ds.plans.end(), by_ref);
  std::sort(ds.annotations.records.begin(), ds.annotations.records.end(),
            by_ref);
  ds.manifest = BuildManifest(ds.annotations, {});
  ds.manifest.seed = cfg.seed;
  return ds;
}

RasterImage RenderImage(const ImagePlan& plan, const SynthConfig& cfg) {
  const int w = plan.width;
  const int h = plan.height;
  const size_t n = static_cast<size_t>(w) * h;
  std::vector<float> mean(n);
  for (int y = 0; y < h; ++y) {
    // Mild depth attenuation.
    const float row = static_cast<float>(
        cfg.background_mean * (1.1 - 0.2 * (y + 0.5) / h));
    std::fill_n(mean.begin() + static_cast<ptrdiff_t>(y) * w, w, row);
  }
  const float nodule_mean =
      static_cast<float>(cfg.background_mean - cfg.contrast);
  for (const Ellipse& e : plan.nodules) {
    const BoundingBox b = EllipseBox(e);
    const double c = std::cos(e.angle);
    const double s = std::sin(e.angle);
    const int x0 = std::max(0, static_cast<int>(std::floor(b.x_min)));
    const int x1 = std::min(w, static_cast<int>(std::ceil(b.x_max)));
    const int y0 = std::max(0, static_cast<int>(std::floor(b.y_min)));
    const int y1 = std::min(h, static_cast<int>(std::ceil(b.y_max)));
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        const double dx = x + 0.5 - e.cx;
        const double dy = y + 0.5 - e.cy;
        const double u = (dx * c + dy * s) / e.rx;
        const double v = (-dx * s + dy * c) / e.ry;
        if (u * u + v * v <= 1.0) mean[static_cast<size_t>(y) * w + x] = nodule_mean;
      }
    }
  }

  Rng rng(MixSeed(plan.seed, 0x5eed));
  const double sigma = cfg.speckle_sigma;
  const double bias = -0.5 * sigma * sigma;
  std::vector<uint8_t> gray(n);
  for (size_t i = 0; i < n; ++i) {
    const double v = mean[i] * std::exp(sigma * rng.Normal() + bias);
    gray[i] = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }

  RasterImage img;
  img.width = w;
  img.height = h;
  if (!plan.doppler) {
    img.channels = 1;
    img.samples = std::move(gray);
    return img;
  }
  img.channels = 3;
  img.samples.resize(3 * n);
  for (size_t i = 0; i < n; ++i) {
    img.samples[3 * i] = img.samples[3 * i + 1] = img.samples[3 * i + 2] = gray[i];
  }
  // Color-flow box covering about 1/36 of the frame.
  const int pw = std::max(8, w / 6);
  const int ph = std::max(8, h / 6);
  const int px = rng.IntIn(0, w - pw);
  const int py = rng.IntIn(0, h - ph);
  for (int y = py; y < py + ph; ++y) {
    for (int x = px; x < px + pw; ++x) {
      uint8_t* s = &img.samples[3 * (static_cast<size_t>(y) * w + x)];
      const auto hot = static_cast<uint8_t>(rng.IntIn(170, 250));
      const auto cold = static_cast<uint8_t>(rng.IntIn(10, 50));
      const bool red = (x - px) < pw / 2;
      s[0] = red ? hot : cold;
      s[1] = cold;
      s[2] = red ? cold : hot;
    }
  }
  return img;
}

void ValidatePerturbConfig(const PerturbConfig& cfg) {
  CheckFraction(cfg.drop_rate, "drop_rate");
  CheckFraction(cfg.spurious_rate, "spurious_rate");
  if (!(cfg.jitter_px >= 0.0 && std::isfinite(cfg.jitter_px))) {
    BadConfig("jitter_px must be a finite value >= 0");
  }
  CheckScoreRange(cfg.matched_scores, "matched_scores");
  CheckScoreRange(cfg.spurious_scores, "spurious_scores");
  if (cfg.separate_scores && !(cfg.matched_scores.lo > cfg.spurious_scores.hi)) {
    BadConfig("matched_scores must lie strictly above spurious_scores");
  }
  if (!(cfg.iou_guard > 0.0 && cfg.iou_guard < 1.0)) {
    BadConfig("iou_guard must lie in (0, 1)");
  }
}

PerturbResult Perturb(const AnnotationSet& ground_truth,
                      const PerturbConfig& cfg) {
  ValidatePerturbConfig(cfg);
  PerturbResult result;
  for (size_t i = 0; i < ground_truth.records.size(); ++i) {
    const AnnotationRecord& rec = ground_truth.records[i];
    if (rec.excluded) continue;
    Rng rng(MixSeed(cfg.seed, i));
    std::vector<GtInstance> gts;
    std::vector<BoundingBox> gt_boxes;
    for (const NodulePolygon& p : rec.nodules) {
      gts.push_back({TryRasterize(p, rec.image_width, rec.image_height),
                     PolygonBbox(p)});
      gt_boxes.push_back(gts.back().box);
    }

    ImagePredictions ip;
    ip.image_ref = rec.image_ref;
    for (size_t g = 0; g < rec.nodules.size(); ++g) {
      if (rng.Bernoulli(cfg.drop_rate)) {
        ++result.planted.dropped;
        continue;
      }
      Detection d;
      d.image_ref = rec.image_ref;
      d.class_id = rec.nodules[g].class_id;
      std::optional<NodulePolygon> poly;
      double radius = cfg.jitter_px;
      for (int t = 0; t < kJitterHalvings && radius > 0.0 && !poly; ++t) {
        poly = TryJitter(rng, rec, gts, g, radius, cfg.iou_guard);
        radius *= 0.5;
      }
      if (!poly) {
        poly = NodulePolygon{};
        poly->vertices = rec.nodules[g].vertices;
        poly->class_id = rec.nodules[g].class_id;
      }
      d.polygon = std::move(*poly);
      d.score = rng.Uniform(cfg.matched_scores.lo, cfg.matched_scores.hi);
      ip.detections.push_back(std::move(d));
      ++result.planted.kept;
    }
    for (size_t g = 0; g < rec.nodules.size(); ++g) {
      if (!rng.Bernoulli(cfg.spurious_rate)) continue;
      const auto e = PlaceEllipse(rng, rec.image_width, rec.image_height,
                                  kSpuriousSemiAxis, gt_boxes, 1.0,
                                  kSpuriousAttempts);
      if (!e) {
        throw Error(ErrorCode::kNoRoomForSpurious,
                    "no free spot for a false detection in " + rec.image_ref);
      }
      Detection d;
      d.image_ref = rec.image_ref;
      d.polygon = EllipsePolygon(*e, kSpuriousVertices);
      d.score = rng.Uniform(cfg.spurious_scores.lo, cfg.spurious_scores.hi);
      ip.detections.push_back(std::move(d));
      ++result.planted.spurious;
    }
    result.predictions.images.push_back(std::move(ip));
  }
  return result;
}

PredictionSet GroundTruthAsPredictions(const AnnotationSet& ground_truth,
                                       double score) {
  PredictionSet set;
  for (const AnnotationRecord& rec : ground_truth.records) {
    if (rec.excluded) continue;
    ImagePredictions ip;
    ip.image_ref = rec.image_ref;
    for (const NodulePolygon& p : rec.nodules) {
      Detection d;
      d.image_ref = rec.image_ref;
      d.class_id = p.class_id;
      d.score = score;
      d.polygon.vertices = p.vertices;
      d.polygon.class_id = p.class_id;
      ip.detections.push_back(std::move(d));
    }
    set.images.push_back(std::move(ip));
  }
  return set;
}

}  // namespace nodulekit
