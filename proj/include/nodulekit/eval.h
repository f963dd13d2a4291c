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

// Instance segmentation scoring: greedy IoU matching, precision, recall,
// instance- and pixel-level Dice, and interpolated average precision, each
// for masks and for boxes.
//
// Conventions:
//  * A detection is a true positive when its best still-unmatched ground
//    truth (same class, highest IoU, lowest index on ties) has
//    IoU >= iou_threshold. Detections are visited by descending score; equal
//    scores keep input order.
//  * 0/0 precision, recall and Dice evaluate to 1.
//  * AP averages the precision envelope max_{r' >= r} p(r') over the recall
//    grid {0, 0.01, ..., 1}; the all-point variant integrates the envelope.
//  * Pixel Dice is micro-averaged: pixel counts are summed over all images
//    before the ratio is taken.
#ifndef NODULEKIT_EVAL_H_
#define NODULEKIT_EVAL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nodulekit/annotations.h"
#include "nodulekit/export.h"
#include "nodulekit/geometry.h"
#include "nodulekit/manifest.h"

namespace nodulekit {

inline constexpr char kPredictionSchema[] = "nodule-predictions/1";

struct Detection {
  std::string image_ref;
  int class_id = 0;
  double score = 1.0;
  NodulePolygon polygon;

  bool operator==(const Detection&) const = default;
};

struct ImagePredictions {
  std::string image_ref;
  std::vector<Detection> detections;

  bool operator==(const ImagePredictions&) const = default;
};

struct PredictionSet {
  std::vector<ImagePredictions> images;

  int64_t DetectionCount() const;
  bool operator==(const PredictionSet&) const = default;
};

PredictionSet ParsePredictions(std::string_view json_text);
std::string PredictionsToJson(const PredictionSet& predictions);

// Reads YOLO segmentation label text ("class x1 y1 x2 y2 ..."). With
// `with_confidence`, the last value on each line is a confidence score.
// Throws kMalformedLabel naming the line.
std::vector<YoloSegLabel> ParseYoloLabels(std::string_view text,
                                          bool with_confidence = false);

enum class MatchKind { kMask, kBox };
const char* MatchKindName(MatchKind kind);

enum class ApInterpolation { k101Point, kAllPoint };
const char* ApInterpolationName(ApInterpolation interpolation);
std::optional<ApInterpolation> ParseApInterpolation(std::string_view name);

struct EvalConfig {
  double iou_threshold = 0.5;
  double score_floor = 0.0;
  ApInterpolation interpolation = ApInterpolation::k101Point;
  int threads = 1;
};

// Throws kInvalidConfig unless iou_threshold is in (0, 1) and score_floor in
// [0, 1].
void ValidateEvalConfig(const EvalConfig& cfg);

struct MatchPair {
  int64_t detection = 0;
  int64_t ground_truth = 0;
  double iou = 0.0;

  bool operator==(const MatchPair&) const = default;
};

struct MatchResult {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  std::vector<MatchPair> pairs;
  MatchKind kind = MatchKind::kMask;
  double threshold = 0.5;

  bool operator==(const MatchResult&) const = default;
};

// Greedy matching over a precomputed IoU matrix (iou[d][g]). Detections
// below cfg.score_floor are ignored. Returns per-detection TP flags in
// `is_tp` when non-null (false for ignored detections).
MatchResult GreedyMatch(std::span<const double> scores,
                        std::span<const int> detection_classes,
                        std::span<const int> gt_classes,
                        const std::vector<std::vector<double>>& iou,
                        const EvalConfig& cfg, MatchKind kind,
                        std::vector<bool>* is_tp = nullptr);

// IoU matrix between detections and ground truth in one width x height
// frame. A detection whose polygon covers no pixel center has mask IoU 0.
std::vector<std::vector<double>> IouMatrix(
    std::span<const Detection> detections,
    std::span<const NodulePolygon> ground_truth, int width, int height,
    MatchKind kind);

MatchResult MatchDetections(std::span<const Detection> detections,
                            std::span<const NodulePolygon> ground_truth,
                            int width, int height, const EvalConfig& cfg,
                            MatchKind kind);

double Precision(const MatchResult& m);
double Recall(const MatchResult& m);
double DiceInstance(const MatchResult& m);

// One image of an evaluation: ground truth, detections and the frame.
struct EvalImage {
  std::string image_ref;
  int width = 0;
  int height = 0;
  std::vector<NodulePolygon> ground_truth;
  std::vector<Detection> detections;
};

struct PixelCounts {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;

  bool operator==(const PixelCounts&) const = default;
};

// Union of predicted masks vs union of ground-truth masks, counted over all
// images.
PixelCounts PixelOverlap(std::span<const EvalImage> images,
                         const EvalConfig& cfg);
double DicePixel(std::span<const EvalImage> images, const EvalConfig& cfg);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;

  bool operator==(const PrPoint&) const = default;
};

// One ranked detection outcome for the AP sweep.
struct RankedOutcome {
  double score = 0.0;
  std::string image_ref;
  int64_t index = 0;  // input order within the image
  bool true_positive = false;
};

struct ApResult {
  double ap = 0.0;
  std::vector<PrPoint> curve;  // one point per ranked detection
};

// Sorts outcomes (descending score, then image_ref, then index) and
// integrates the interpolated PR curve. Throws kNoGroundTruth when
// n_ground_truth is 0.
ApResult AveragePrecision(std::vector<RankedOutcome> outcomes,
                          int64_t n_ground_truth,
                          ApInterpolation interpolation);

ApResult AveragePrecision(std::span<const EvalImage> images,
                          const EvalConfig& cfg, MatchKind kind);

struct ReportMeta {
  std::string model_tag = "model";
  std::string dataset_version = "custom";
  std::string bucket = "all";
  uint64_t seed = 0;
  double iou_threshold = 0.5;
  double score_floor = 0.0;
  std::string interpolation = "101-point";
  std::string dice_averaging = "micro";
  std::string dice_instance_kind = "mask";
  std::string operating_point = "all detections with score >= score_floor";
  int64_t n_images = 0;
  int64_t n_ground_truth = 0;
  int64_t n_detections = 0;
  // Empty-denominator conventions that fired, e.g. "precision_mask=0/0".
  std::vector<std::string> conventions;

  bool operator==(const ReportMeta&) const = default;
};

struct EvalReport {
  double dice_pixel = 0.0;
  double dice_instance = 0.0;
  double map50_mask = 0.0;
  double map50_box = 0.0;
  double precision_mask = 0.0;
  double precision_box = 0.0;
  double recall_mask = 0.0;
  double recall_box = 0.0;
  std::vector<PrPoint> pr_curve_mask;
  std::vector<PrPoint> pr_curve_box;
  MatchResult counts_mask;
  MatchResult counts_box;
  PixelCounts pixel_counts;
  ReportMeta meta;

  bool operator==(const EvalReport&) const = default;
};

struct EvalScope {
  // When set, only entries of `bucket` in `manifest` are evaluated.
  const DatasetManifest* manifest = nullptr;
  std::optional<Bucket> bucket;
  std::string model_tag = "model";
};

// Scores `predictions` against the ground truth in scope. Throws
// kUnknownImageRef for predictions on images without ground truth and
// kSplitMismatch for predictions on images outside the evaluated bucket.
EvalReport Evaluate(const PredictionSet& predictions,
                    const AnnotationSet& ground_truth, const EvalScope& scope,
                    const EvalConfig& cfg);

// Builds the per-image evaluation inputs used by Evaluate.
std::vector<EvalImage> CollectEvalImages(const PredictionSet& predictions,
                                         const AnnotationSet& ground_truth,
                                         const EvalScope& scope);

}  // namespace nodulekit

#endif  // NODULEKIT_EVAL_H_
