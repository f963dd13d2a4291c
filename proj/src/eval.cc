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

#include "nodulekit/eval.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "json_util.h"
#include "nodulekit/error.h"
#include "nodulekit/parallel.h"

namespace nodulekit {

namespace {

using json_util::Json;
using json_util::OrderedJson;

double Ratio(int64_t num, int64_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

void CheckFrame(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                "frame " + std::to_string(width) + "x" +
                    std::to_string(height) + " is empty");
  }
}

Detection ParseDetection(const Json& obj, const std::string& path,
                         const std::string& image_ref) {
  if (!obj.is_object()) json_util::Violation(path, "expected object");
  Detection d;
  d.image_ref = image_ref;
  d.class_id = static_cast<int>(json_util::AsInteger(
      json_util::Field(obj, path, "class_id"), path + "/class_id", 0, 1 << 20));
  d.polygon.class_id = d.class_id;
  d.score = json_util::AsNumber(json_util::Field(obj, path, "score"),
                                path + "/score");
  if (d.score < 0.0 || d.score > 1.0) {
    json_util::Violation(path + "/score", "score outside [0, 1]");
  }
  const std::string poly_path = path + "/polygon";
  const Json& poly =
      json_util::AsArray(json_util::Field(obj, path, "polygon"), poly_path);
  for (size_t i = 0; i < poly.size(); ++i) {
    const std::string vpath = poly_path + "/" + std::to_string(i);
    const Json& pt = poly[i];
    if (!pt.is_array() || pt.size() != 2) {
      json_util::Violation(vpath, "expected [x, y]");
    }
    d.polygon.vertices.push_back({json_util::AsNumber(pt[0], vpath + "/0"),
                                  json_util::AsNumber(pt[1], vpath + "/1")});
  }
  try {
    ValidatePolygon(d.polygon);
  } catch (const Error& e) {
    json_util::Violation(poly_path, e.what());
  }
  return d;
}

// Rasterized instances of one image; nullopt where no pixel center is
// covered.
std::vector<std::optional<InstanceMask>> RasterizeAll(
    std::span<const NodulePolygon> polygons, int width, int height) {
  std::vector<std::optional<InstanceMask>> masks;
  masks.reserve(polygons.size());
  for (const NodulePolygon& p : polygons) {
    masks.push_back(TryRasterize(p, width, height));
  }
  return masks;
}

std::vector<std::vector<double>> MaskIouMatrix(
    const std::vector<std::optional<InstanceMask>>& dets,
    const std::vector<std::optional<InstanceMask>>& gts) {
  std::vector<std::vector<double>> iou(dets.size(),
                                       std::vector<double>(gts.size(), 0.0));
  for (size_t d = 0; d < dets.size(); ++d) {
    if (!dets[d]) continue;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (gts[g]) iou[d][g] = MaskIou(*dets[d], *gts[g]);
    }
  }
  return iou;
}

std::vector<std::vector<double>> BoxIouMatrix(
    std::span<const Detection> dets, std::span<const NodulePolygon> gts) {
  std::vector<BoundingBox> gt_boxes;
  gt_boxes.reserve(gts.size());
  for (const NodulePolygon& g : gts) gt_boxes.push_back(PolygonBbox(g));
  std::vector<std::vector<double>> iou(dets.size(),
                                       std::vector<double>(gts.size(), 0.0));
  for (size_t d = 0; d < dets.size(); ++d) {
    const BoundingBox box = PolygonBbox(dets[d].polygon);
    for (size_t g = 0; g < gts.size(); ++g) iou[d][g] = BoxIou(box, gt_boxes[g]);
  }
  return iou;
}

struct Classes {
  std::vector<double> scores;
  std::vector<int> det;
  std::vector<int> gt;
};

Classes ClassesOf(std::span<const Detection> dets,
                  std::span<const NodulePolygon> gts) {
  Classes c;
  for (const Detection& d : dets) {
    c.scores.push_back(d.score);
    c.det.push_back(d.class_id);
  }
  for (const NodulePolygon& g : gts) c.gt.push_back(g.class_id);
  return c;
}

// Everything Evaluate needs from one image.
struct ImageOutcome {
  MatchResult mask;
  MatchResult box;
  std::vector<bool> mask_tp;
  std::vector<bool> box_tp;
  PixelCounts pixels;
};

PixelCounts CountPixels(const std::vector<std::optional<InstanceMask>>& dets,
                        const std::vector<std::optional<InstanceMask>>& gts,
                        std::span<const Detection> detections, int width,
                        int height, double score_floor) {
  Bitmap pred(width, height);
  Bitmap truth(width, height);
  for (size_t d = 0; d < dets.size(); ++d) {
    if (dets[d] && detections[d].score >= score_floor) {
      pred.OrWith(dets[d]->words());
    }
  }
  for (const auto& g : gts) {
    if (g) truth.OrWith(g->words());
  }
  const int64_t both = IntersectionCount(pred.words(), truth.words());
  return {both, pred.Count() - both, truth.Count() - both};
}

ImageOutcome ScoreImage(const EvalImage& image, const EvalConfig& cfg) {
  CheckFrame(image.width, image.height);
  const auto gt_masks =
      RasterizeAll(image.ground_truth, image.width, image.height);
  std::vector<NodulePolygon> det_polys;
  det_polys.reserve(image.detections.size());
  for (const Detection& d : image.detections) det_polys.push_back(d.polygon);
  const auto det_masks = RasterizeAll(det_polys, image.width, image.height);

  const Classes c = ClassesOf(image.detections, image.ground_truth);
  ImageOutcome out;
  out.mask = GreedyMatch(c.scores, c.det, c.gt,
                         MaskIouMatrix(det_masks, gt_masks), cfg,
                         MatchKind::kMask, &out.mask_tp);
  out.box = GreedyMatch(c.scores, c.det, c.gt,
                        BoxIouMatrix(image.detections, image.ground_truth), cfg,
                        MatchKind::kBox, &out.box_tp);
  out.pixels = CountPixels(det_masks, gt_masks, image.detections, image.width,
                           image.height, cfg.score_floor);
  return out;
}

std::vector<ImageOutcome> ScoreImages(std::span<const EvalImage> images,
                                      const EvalConfig& cfg) {
  std::vector<ImageOutcome> out(images.size());
  ParallelFor(images.size(), cfg.threads,
              [&](size_t i) { out[i] = ScoreImage(images[i], cfg); });
  return out;
}

// Concatenates per-image matches, offsetting indices into the flattened
// detection and ground-truth lists.
MatchResult Combine(std::span<const EvalImage> images,
                    const std::vector<ImageOutcome>& outcomes, MatchKind kind,
                    double threshold) {
  MatchResult total;
  total.kind = kind;
  total.threshold = threshold;
  int64_t det_offset = 0;
  int64_t gt_offset = 0;
  for (size_t i = 0; i < images.size(); ++i) {
    const MatchResult& m =
        kind == MatchKind::kMask ? outcomes[i].mask : outcomes[i].box;
    total.tp += m.tp;
    total.fp += m.fp;
    total.fn += m.fn;
    for (const MatchPair& p : m.pairs) {
      total.pairs.push_back(
          {p.detection + det_offset, p.ground_truth + gt_offset, p.iou});
    }
    det_offset += static_cast<int64_t>(images[i].detections.size());
    gt_offset += static_cast<int64_t>(images[i].ground_truth.size());
  }
  return total;
}

ApResult SweepAp(std::span<const EvalImage> images,
                 const std::vector<ImageOutcome>& outcomes, MatchKind kind,
                 const EvalConfig& cfg) {
  std::vector<RankedOutcome> ranked;
  int64_t n_gt = 0;
  for (size_t i = 0; i < images.size(); ++i) {
    n_gt += static_cast<int64_t>(images[i].ground_truth.size());
    const std::vector<bool>& tp =
        kind == MatchKind::kMask ? outcomes[i].mask_tp : outcomes[i].box_tp;
    for (size_t d = 0; d < images[i].detections.size(); ++d) {
      const Detection& det = images[i].detections[d];
      if (det.score < cfg.score_floor) continue;
      ranked.push_back(
          {det.score, images[i].image_ref, static_cast<int64_t>(d), tp[d]});
    }
  }
  return AveragePrecision(std::move(ranked), n_gt, cfg.interpolation);
}

}  // namespace

int64_t PredictionSet::DetectionCount() const {
  int64_t n = 0;
  for (const ImagePredictions& p : images) {
    n += static_cast<int64_t>(p.detections.size());
  }
  return n;
}

PredictionSet ParsePredictions(std::string_view json_text) {
  const Json doc = json_util::ParseDocument(json_text);
  json_util::ExpectSchema(doc, kPredictionSchema);
  const Json& preds = json_util::AsArray(
      json_util::Field(doc, "", "predictions"), "/predictions");
  PredictionSet set;
  std::set<std::string> seen;
  for (size_t i = 0; i < preds.size(); ++i) {
    const std::string path = "/predictions/" + std::to_string(i);
    const Json& obj = preds[i];
    if (!obj.is_object()) json_util::Violation(path, "expected object");
    ImagePredictions ip;
    ip.image_ref = json_util::AsString(json_util::Field(obj, path, "image"),
                                       path + "/image");
    if (!seen.insert(ip.image_ref).second) {
      json_util::Violation(path + "/image",
                           "duplicate image \"" + ip.image_ref + "\"");
    }
    const std::string dets_path = path + "/detections";
    const Json& dets = json_util::AsArray(
        json_util::Field(obj, path, "detections"), dets_path);
    for (size_t k = 0; k < dets.size(); ++k) {
      ip.detections.push_back(ParseDetection(
          dets[k], dets_path + "/" + std::to_string(k), ip.image_ref));
    }
    set.images.push_back(std::move(ip));
  }
  return set;
}

std::string PredictionsToJson(const PredictionSet& predictions) {
  OrderedJson doc;
  doc["schema"] = kPredictionSchema;
  OrderedJson arr = OrderedJson::array();
  for (const ImagePredictions& ip : predictions.images) {
    OrderedJson img;
    img["image"] = ip.image_ref;
    OrderedJson dets = OrderedJson::array();
    for (const Detection& d : ip.detections) {
      OrderedJson det;
      det["class_id"] = d.class_id;
      det["score"] = d.score;
      OrderedJson poly = OrderedJson::array();
      for (const Point2D& p : d.polygon.vertices) poly.push_back({p.x, p.y});
      det["polygon"] = std::move(poly);
      dets.push_back(std::move(det));
    }
    img["detections"] = std::move(dets);
    arr.push_back(std::move(img));
  }
  doc["predictions"] = std::move(arr);
  return doc.dump(2) + "\n";
}

std::vector<YoloSegLabel> ParseYoloLabels(std::string_view text,
                                          bool with_confidence) {
  std::vector<YoloSegLabel> labels;
  size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{}
                                         : text.substr(eol + 1);
    auto fail = [&](const std::string& what) -> void {
      throw Error(ErrorCode::kMalformedLabel,
                  "line " + std::to_string(line_no) + ": " + what);
    };
    std::vector<std::string_view> tokens;
    size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
      size_t end = pos;
      while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
      if (end > pos) tokens.push_back(line.substr(pos, end - pos));
      pos = end;
    }
    if (tokens.empty()) continue;

    YoloSegLabel label;
    {
      const std::string_view t = tokens[0];
      const auto r = std::from_chars(t.data(), t.data() + t.size(), label.class_id);
      if (r.ec != std::errc() || r.ptr != t.data() + t.size() ||
          label.class_id < 0) {
        fail("class id \"" + std::string(t) + "\" is not a non-negative integer");
      }
    }
    std::vector<double> values;
    for (size_t i = 1; i < tokens.size(); ++i) {
      const std::string_view t = tokens[i];
      double v = 0.0;
      const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
      if (r.ec != std::errc() || r.ptr != t.data() + t.size() ||
          !std::isfinite(v)) {
        fail("value \"" + std::string(t) + "\" is not a finite number");
      }
      values.push_back(v);
    }
    if (with_confidence) {
      if (values.empty()) fail("missing confidence");
      const double c = values.back();
      values.pop_back();
      if (c < 0.0 || c > 1.0) fail("confidence outside [0, 1]");
      label.confidence = c;
    }
    if (values.size() % 2 != 0) fail("odd coordinate count");
    if (values.size() < 6) fail("fewer than 3 vertices");
    for (size_t i = 0; i < values.size(); i += 2) {
      label.normalized_vertices.push_back({values[i], values[i + 1]});
    }
    labels.push_back(std::move(label));
  }
  return labels;
}

const char* MatchKindName(MatchKind kind) {
  return kind == MatchKind::kMask ? "mask" : "box";
}

const char* ApInterpolationName(ApInterpolation interpolation) {
  return interpolation == ApInterpolation::k101Point ? "101-point"
                                                     : "all-point";
}

std::optional<ApInterpolation> ParseApInterpolation(std::string_view name) {
  if (name == "101-point" || name == "101") return ApInterpolation::k101Point;
  if (name == "all-point" || name == "all") return ApInterpolation::kAllPoint;
  return std::nullopt;
}

void ValidateEvalConfig(const EvalConfig& cfg) {
  if (!(cfg.iou_threshold > 0.0 && cfg.iou_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig,
                "iou_threshold " + std::to_string(cfg.iou_threshold) +
                    " must lie in (0, 1)");
  }
  if (!(cfg.score_floor >= 0.0 && cfg.score_floor <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig,
                "score_floor " + std::to_string(cfg.score_floor) +
                    " must lie in [0, 1]");
  }
}

MatchResult GreedyMatch(std::span<const double> scores,
                        std::span<const int> detection_classes,
                        std::span<const int> gt_classes,
                        const std::vector<std::vector<double>>& iou,
                        const EvalConfig& cfg, MatchKind kind,
                        std::vector<bool>* is_tp) {
  const size_t n_det = scores.size();
  const size_t n_gt = gt_classes.size();
  MatchResult m;
  m.kind = kind;
  m.threshold = cfg.iou_threshold;
  if (is_tp) is_tp->assign(n_det, false);

  std::vector<size_t> order;
  for (size_t d = 0; d < n_det; ++d) {
    if (scores[d] >= cfg.score_floor) order.push_back(d);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  std::vector<bool> taken(n_gt, false);
  for (size_t d : order) {
    int64_t best = -1;
    double best_iou = -1.0;
    for (size_t g = 0; g < n_gt; ++g) {
      if (taken[g] || gt_classes[g] != detection_classes[d]) continue;
      if (iou[d][g] > best_iou) {
        best_iou = iou[d][g];
        best = static_cast<int64_t>(g);
      }
    }
    if (best >= 0 && best_iou >= cfg.iou_threshold) {
      taken[static_cast<size_t>(best)] = true;
      m.pairs.push_back({static_cast<int64_t>(d), best, best_iou});
      ++m.tp;
      if (is_tp) (*is_tp)[d] = true;
    } else {
      ++m.fp;
    }
  }
  m.fn = static_cast<int64_t>(n_gt) - m.tp;
  return m;
}

std::vector<std::vector<double>> IouMatrix(
    std::span<const Detection> detections,
    std::span<const NodulePolygon> ground_truth, int width, int height,
    MatchKind kind) {
  CheckFrame(width, height);
  if (kind == MatchKind::kBox) return BoxIouMatrix(detections, ground_truth);
  std::vector<NodulePolygon> polys;
  for (const Detection& d : detections) polys.push_back(d.polygon);
  return MaskIouMatrix(RasterizeAll(polys, width, height),
                       RasterizeAll(ground_truth, width, height));
}

MatchResult MatchDetections(std::span<const Detection> detections,
                            std::span<const NodulePolygon> ground_truth,
                            int width, int height, const EvalConfig& cfg,
                            MatchKind kind) {
  const Classes c = ClassesOf(detections, ground_truth);
  return GreedyMatch(c.scores, c.det, c.gt,
                     IouMatrix(detections, ground_truth, width, height, kind),
                     cfg, kind);
}

double Precision(const MatchResult& m) { return Ratio(m.tp, m.tp + m.fp); }
double Recall(const MatchResult& m) { return Ratio(m.tp, m.tp + m.fn); }
double DiceInstance(const MatchResult& m) {
  return Ratio(2 * m.tp, 2 * m.tp + m.fp + m.fn);
}

PixelCounts PixelOverlap(std::span<const EvalImage> images,
                         const EvalConfig& cfg) {
  std::vector<PixelCounts> per_image(images.size());
  ParallelFor(images.size(), cfg.threads, [&](size_t i) {
    const EvalImage& im = images[i];
    CheckFrame(im.width, im.height);
    std::vector<NodulePolygon> polys;
    for (const Detection& d : im.detections) polys.push_back(d.polygon);
    per_image[i] = CountPixels(RasterizeAll(polys, im.width, im.height),
                               RasterizeAll(im.ground_truth, im.width, im.height),
                               im.detections, im.width, im.height,
                               cfg.score_floor);
  });
  PixelCounts total;
  for (const PixelCounts& p : per_image) {
    total.tp += p.tp;
    total.fp += p.fp;
    total.fn += p.fn;
  }
  return total;
}

double DicePixel(std::span<const EvalImage> images, const EvalConfig& cfg) {
  const PixelCounts p = PixelOverlap(images, cfg);
  return Ratio(2 * p.tp, 2 * p.tp + p.fp + p.fn);
}

ApResult AveragePrecision(std::vector<RankedOutcome> outcomes,
                          int64_t n_ground_truth,
                          ApInterpolation interpolation) {
  if (n_ground_truth <= 0) {
    throw Error(ErrorCode::kNoGroundTruth,
                "average precision needs at least one ground-truth instance");
  }
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const RankedOutcome& a, const RankedOutcome& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.image_ref != b.image_ref) return a.image_ref < b.image_ref;
                     return a.index < b.index;
                   });
  const size_t n = outcomes.size();
  std::vector<int64_t> cum_tp(n);
  ApResult result;
  result.curve.reserve(n);
  int64_t tp = 0;
  for (size_t k = 0; k < n; ++k) {
    if (outcomes[k].true_positive) ++tp;
    cum_tp[k] = tp;
    result.curve.push_back(
        {static_cast<double>(tp) / static_cast<double>(n_ground_truth),
         static_cast<double>(tp) / static_cast<double>(k + 1)});
  }
  // envelope[k] = max precision over points k..n-1.
  std::vector<double> envelope(n);
  double running = 0.0;
  for (size_t k = n; k-- > 0;) {
    running = std::max(running, result.curve[k].precision);
    envelope[k] = running;
  }

  double sum = 0.0;
  if (interpolation == ApInterpolation::k101Point) {
    // Recall grid point i/100 is reached at the first k with
    // tp_k / n_gt >= i / 100, compared in integers.
    size_t k = 0;
    for (int64_t i = 0; i <= 100; ++i) {
      while (k < n && cum_tp[k] * 100 < i * n_ground_truth) ++k;
      if (k == n) break;
      sum += envelope[k];
    }
    result.ap = sum / 101.0;
  } else {
    int64_t prev_tp = 0;
    for (size_t k = 0; k < n; ++k) {
      if (cum_tp[k] > prev_tp) {
        sum += static_cast<double>(cum_tp[k] - prev_tp) * envelope[k];
        prev_tp = cum_tp[k];
      }
    }
    result.ap = sum / static_cast<double>(n_ground_truth);
  }
  return result;
}

ApResult AveragePrecision(std::span<const EvalImage> images,
                          const EvalConfig& cfg, MatchKind kind) {
  return SweepAp(images, ScoreImages(images, cfg), kind, cfg);
}

std::vector<EvalImage> CollectEvalImages(const PredictionSet& predictions,
                                         const AnnotationSet& ground_truth,
                                         const EvalScope& scope) {
  std::map<std::string, const AnnotationRecord*> by_ref;
  for (const AnnotationRecord& r : ground_truth.records) by_ref[r.image_ref] = &r;

  std::map<std::string, EvalImage> in_scope;
  auto admit = [&](const AnnotationRecord& r) {
    EvalImage im;
    im.image_ref = r.image_ref;
    im.width = r.image_width;
    im.height = r.image_height;
    im.ground_truth = r.nodules;
    in_scope.emplace(r.image_ref, std::move(im));
  };
  if (scope.manifest) {
    for (const ManifestEntry& e : scope.manifest->entries) {
      if (e.excluded) continue;
      if (scope.bucket) {
        if (!e.split) {
          throw Error(ErrorCode::kUnsplitManifest,
                      "entry \"" + e.image_ref + "\" has no split");
        }
        if (*e.split != *scope.bucket) continue;
      }
      auto it = by_ref.find(e.image_ref);
      if (it == by_ref.end()) {
        throw Error(ErrorCode::kUnknownImageRef,
                    "manifest entry \"" + e.image_ref +
                        "\" has no annotation record");
      }
      admit(*it->second);
    }
  } else {
    for (const AnnotationRecord& r : ground_truth.records) {
      if (!r.excluded) admit(r);
    }
  }

  for (const ImagePredictions& ip : predictions.images) {
    auto it = in_scope.find(ip.image_ref);
    if (it == in_scope.end()) {
      if (!by_ref.count(ip.image_ref)) {
        throw Error(ErrorCode::kUnknownImageRef,
                    "prediction for \"" + ip.image_ref +
                        "\" has no ground truth");
      }
      throw Error(ErrorCode::kSplitMismatch,
                  "prediction for \"" + ip.image_ref +
                      "\" lies outside the evaluated images");
    }
    for (const Detection& d : ip.detections) {
      it->second.detections.push_back(d);
      it->second.detections.back().image_ref = ip.image_ref;
    }
  }

  std::vector<EvalImage> images;
  images.reserve(in_scope.size());
  for (auto& [ref, im] : in_scope) images.push_back(std::move(im));
  return images;
}

EvalReport Evaluate(const PredictionSet& predictions,
                    const AnnotationSet& ground_truth, const EvalScope& scope,
                    const EvalConfig& cfg) {
  ValidateEvalConfig(cfg);
  const std::vector<EvalImage> images =
      CollectEvalImages(predictions, ground_truth, scope);
  const std::vector<ImageOutcome> outcomes = ScoreImages(images, cfg);

  EvalReport r;
  r.counts_mask = Combine(images, outcomes, MatchKind::kMask, cfg.iou_threshold);
  r.counts_box = Combine(images, outcomes, MatchKind::kBox, cfg.iou_threshold);
  for (const ImageOutcome& o : outcomes) {
    r.pixel_counts.tp += o.pixels.tp;
    r.pixel_counts.fp += o.pixels.fp;
    r.pixel_counts.fn += o.pixels.fn;
  }
  const ApResult ap_mask = SweepAp(images, outcomes, MatchKind::kMask, cfg);
  const ApResult ap_box = SweepAp(images, outcomes, MatchKind::kBox, cfg);

  const PixelCounts& px = r.pixel_counts;
  r.dice_pixel = Ratio(2 * px.tp, 2 * px.tp + px.fp + px.fn);
  r.dice_instance = DiceInstance(r.counts_mask);
  r.map50_mask = ap_mask.ap;
  r.map50_box = ap_box.ap;
  r.precision_mask = Precision(r.counts_mask);
  r.precision_box = Precision(r.counts_box);
  r.recall_mask = Recall(r.counts_mask);
  r.recall_box = Recall(r.counts_box);
  r.pr_curve_mask = ap_mask.curve;
  r.pr_curve_box = ap_box.curve;

  ReportMeta& meta = r.meta;
  meta.model_tag = scope.model_tag;
  if (scope.manifest) {
    meta.dataset_version = VersionTagName(scope.manifest->version_tag);
    meta.seed = scope.manifest->seed;
  }
  if (scope.bucket) meta.bucket = BucketName(*scope.bucket);
  meta.iou_threshold = cfg.iou_threshold;
  meta.score_floor = cfg.score_floor;
  meta.interpolation = ApInterpolationName(cfg.interpolation);
  meta.n_images = static_cast<int64_t>(images.size());
  meta.n_ground_truth = r.counts_mask.tp + r.counts_mask.fn;
  meta.n_detections = r.counts_mask.tp + r.counts_mask.fp;
  for (const MatchResult* m : {&r.counts_mask, &r.counts_box}) {
    const std::string kind = MatchKindName(m->kind);
    if (m->tp + m->fp == 0) meta.conventions.push_back("precision_" + kind + "=0/0");
    if (m->tp + m->fn == 0) meta.conventions.push_back("recall_" + kind + "=0/0");
  }
  if (2 * r.counts_mask.tp + r.counts_mask.fp + r.counts_mask.fn == 0) {
    meta.conventions.push_back("dice_instance=0/0");
  }
  if (2 * px.tp + px.fp + px.fn == 0) meta.conventions.push_back("dice_pixel=0/0");
  return r;
}

}  // namespace nodulekit
