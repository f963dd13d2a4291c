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

// Synthetic speckle frames with elliptical nodules, and prediction sets with
// planted, countable errors.
//
// Generation is split into a cheap plan (geometry, flags, seeds) and a
// per-image render, so large datasets never hold every frame in memory.
#ifndef NODULEKIT_SYNTH_H_
#define NODULEKIT_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "nodulekit/annotations.h"
#include "nodulekit/eval.h"
#include "nodulekit/image.h"
#include "nodulekit/manifest.h"

namespace nodulekit {

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct DoubleRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct SynthConfig {
  int n_patients = 10;
  IntRange images_per_patient = {1, 3};
  IntRange width = {256, 320};
  IntRange height = {192, 240};
  IntRange nodules_per_image = {1, 2};
  double no_finding_rate = 0.0;
  DoubleRange semi_axis_px = {10.0, 36.0};
  double background_mean = 150.0;
  double contrast = 70.0;  // nodule mean = background_mean - contrast
  double speckle_sigma = 0.25;
  double doppler_fraction = 0.0;
  int polygon_vertices = 24;
  uint64_t seed = 0;
  std::string patient_prefix = "SYN";
};

// Throws kInvalidConfig naming the offending field.
void ValidateSynthConfig(const SynthConfig& cfg);

struct Ellipse {
  double cx = 0.0;
  double cy = 0.0;
  double rx = 0.0;
  double ry = 0.0;
  double angle = 0.0;  // radians

  bool operator==(const Ellipse&) const = default;
};

// Polygon with `n` vertices at equal parameter steps on the boundary.
NodulePolygon EllipsePolygon(const Ellipse& e, int n);

struct ImagePlan {
  std::string image_ref;
  std::string patient_id;
  int width = 0;
  int height = 0;
  uint64_t seed = 0;
  bool doppler = false;
  std::vector<Ellipse> nodules;
};

struct SynthDataset {
  SynthConfig config;
  std::vector<ImagePlan> plans;  // sorted by image_ref
  AnnotationSet annotations;
  DatasetManifest manifest;
};

SynthDataset Generate(const SynthConfig& cfg);

// Deterministic in (plan, cfg). Doppler frames are RGB with a chromatic
// patch; all others are single-channel.
RasterImage RenderImage(const ImagePlan& plan, const SynthConfig& cfg);

struct PerturbConfig {
  double drop_rate = 0.0;
  double spurious_rate = 0.0;  // expected false detections per GT instance
  double jitter_px = 0.0;      // max Euclidean displacement per vertex
  DoubleRange matched_scores = {0.5, 1.0};
  DoubleRange spurious_scores = {0.05, 0.45};
  bool separate_scores = true;  // matched scores strictly above spurious
  double iou_guard = 0.5;       // minimum IoU of a jittered copy
  uint64_t seed = 0;
};

void ValidatePerturbConfig(const PerturbConfig& cfg);

struct PlantedCounts {
  int64_t kept = 0;
  int64_t dropped = 0;
  int64_t spurious = 0;

  bool operator==(const PlantedCounts&) const = default;
};

struct PerturbResult {
  PredictionSet predictions;
  PlantedCounts planted;
};

// Kept instances are jittered copies whose mask and box IoU with their source
// is >= iou_guard and strictly above their IoU with any other instance of
// the image (the jitter is halved until this holds, then dropped). Spurious
// detections are bbox-disjoint from every ground-truth instance. Throws
// kNoRoomForSpurious when no such spot is found.
PerturbResult Perturb(const AnnotationSet& ground_truth,
                      const PerturbConfig& cfg);

// Ground truth as predictions with the given score.
PredictionSet GroundTruthAsPredictions(const AnnotationSet& ground_truth,
                                       double score = 1.0);

}  // namespace nodulekit

#endif  // NODULEKIT_SYNTH_H_
