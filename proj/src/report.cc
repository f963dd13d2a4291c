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

#include "nodulekit/report.h"

#include <charconv>
#include <cstdio>
#include <limits>

#include "json_util.h"
#include "nodulekit/error.h"
#include "nodulekit/fsutil.h"

namespace nodulekit {

namespace {

using json_util::Json;
using json_util::OrderedJson;

// Plot geometry in SVG user units.
constexpr double kSvgWidth = 640.0;
constexpr double kSvgHeight = 520.0;
constexpr double kPlotLeft = 70.0;
constexpr double kPlotTop = 60.0;
constexpr double kPlotSize = 400.0;

struct CurveStyle {
  const char* kind;
  const char* color;
};
constexpr CurveStyle kCurves[] = {{"mask", "#1f77b4"}, {"box", "#d62728"}};

std::string Fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string Shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string XmlEscape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

OrderedJson MatchJson(const MatchResult& m) {
  OrderedJson j;
  j["kind"] = MatchKindName(m.kind);
  j["threshold"] = m.threshold;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  OrderedJson pairs = OrderedJson::array();
  for (const MatchPair& p : m.pairs) {
    pairs.push_back(OrderedJson::array({p.detection, p.ground_truth, p.iou}));
  }
  j["pairs"] = std::move(pairs);
  return j;
}

OrderedJson CurveJson(const std::vector<PrPoint>& curve) {
  OrderedJson arr = OrderedJson::array();
  for (const PrPoint& p : curve) {
    arr.push_back(OrderedJson::array({p.recall, p.precision}));
  }
  return arr;
}

int64_t Count(const Json& obj, const std::string& path, const char* key) {
  return json_util::AsInteger(json_util::Field(obj, path, key),
                              path + "/" + key, 0,
                              std::numeric_limits<int64_t>::max());
}

double Metric(const Json& obj, const std::string& path, const char* key) {
  const double v =
      json_util::AsNumber(json_util::Field(obj, path, key), path + "/" + key);
  if (v < 0.0 || v > 1.0) json_util::Violation(path + "/" + key, "outside [0, 1]");
  return v;
}

MatchResult ParseMatch(const Json& obj, const std::string& path,
                       MatchKind kind) {
  MatchResult m;
  m.kind = kind;
  m.threshold = json_util::AsNumber(json_util::Field(obj, path, "threshold"),
                                    path + "/threshold");
  m.tp = Count(obj, path, "tp");
  m.fp = Count(obj, path, "fp");
  m.fn = Count(obj, path, "fn");
  const Json& pairs =
      json_util::AsArray(json_util::Field(obj, path, "pairs"), path + "/pairs");
  for (size_t i = 0; i < pairs.size(); ++i) {
    const std::string p = path + "/pairs/" + std::to_string(i);
    if (!pairs[i].is_array() || pairs[i].size() != 3) {
      json_util::Violation(p, "expected [detection, ground_truth, iou]");
    }
    const int64_t kMax = std::numeric_limits<int64_t>::max();
    m.pairs.push_back({json_util::AsInteger(pairs[i][0], p + "/0", 0, kMax),
                       json_util::AsInteger(pairs[i][1], p + "/1", 0, kMax),
                       json_util::AsNumber(pairs[i][2], p + "/2")});
  }
  if (static_cast<int64_t>(m.pairs.size()) != m.tp) {
    json_util::Violation(path + "/pairs", "pair count differs from tp");
  }
  return m;
}

std::vector<PrPoint> ParseCurve(const Json& arr, const std::string& path) {
  json_util::AsArray(arr, path);
  std::vector<PrPoint> curve;
  for (size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    if (!arr[i].is_array() || arr[i].size() != 2) {
      json_util::Violation(p, "expected [recall, precision]");
    }
    curve.push_back({json_util::AsNumber(arr[i][0], p + "/0"),
                     json_util::AsNumber(arr[i][1], p + "/1")});
  }
  return curve;
}

std::string PlotX(double recall) {
  return Shortest(kPlotLeft + recall * kPlotSize);
}
std::string PlotY(double precision) {
  return Shortest(kPlotTop + (1.0 - precision) * kPlotSize);
}

}  // namespace

std::optional<ReportFormat> ParseReportFormat(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  if (name == "svg") return ReportFormat::kSvg;
  return std::nullopt;
}

const char* ReportFormatExtension(ReportFormat format) {
  switch (format) {
    case ReportFormat::kCsv: return "csv";
    case ReportFormat::kJson: return "json";
    case ReportFormat::kSvg: return "svg";
  }
  return "txt";
}

std::string ReportCsv(const EvalReport& r) {
  std::string out =
      "model,dataset,dice_pixel,dice_instance,map50_mask,map50_box,"
      "precision_mask,precision_box,recall_mask,recall_box\n";
  out += CsvField(r.meta.model_tag) + "," + CsvField(r.meta.dataset_version);
  for (double v : {r.dice_pixel, r.dice_instance, r.map50_mask, r.map50_box,
                   r.precision_mask, r.precision_box, r.recall_mask,
                   r.recall_box}) {
    out += "," + Fixed3(v);
  }
  return out + "\n";
}

std::string ReportJson(const EvalReport& r) {
  OrderedJson doc;
  doc["schema"] = kReportSchema;
  const ReportMeta& m = r.meta;
  OrderedJson meta;
  meta["model_tag"] = m.model_tag;
  meta["dataset_version"] = m.dataset_version;
  meta["bucket"] = m.bucket;
  meta["seed"] = m.seed;
  meta["iou_threshold"] = m.iou_threshold;
  meta["score_floor"] = m.score_floor;
  meta["interpolation"] = m.interpolation;
  meta["dice_averaging"] = m.dice_averaging;
  meta["dice_instance_kind"] = m.dice_instance_kind;
  meta["operating_point"] = m.operating_point;
  meta["n_images"] = m.n_images;
  meta["n_ground_truth"] = m.n_ground_truth;
  meta["n_detections"] = m.n_detections;
  meta["conventions"] = m.conventions;
  doc["meta"] = std::move(meta);

  OrderedJson metrics;
  metrics["dice_pixel"] = r.dice_pixel;
  metrics["dice_instance"] = r.dice_instance;
  metrics["map50_mask"] = r.map50_mask;
  metrics["map50_box"] = r.map50_box;
  metrics["precision_mask"] = r.precision_mask;
  metrics["precision_box"] = r.precision_box;
  metrics["recall_mask"] = r.recall_mask;
  metrics["recall_box"] = r.recall_box;
  doc["metrics"] = std::move(metrics);

  OrderedJson counts;
  counts["mask"] = MatchJson(r.counts_mask);
  counts["box"] = MatchJson(r.counts_box);
  counts["pixel"] = {{"tp", r.pixel_counts.tp},
                     {"fp", r.pixel_counts.fp},
                     {"fn", r.pixel_counts.fn}};
  doc["counts"] = std::move(counts);
  doc["pr_curve"] = {{"mask", CurveJson(r.pr_curve_mask)},
                     {"box", CurveJson(r.pr_curve_box)}};
  return doc.dump(2) + "\n";
}

EvalReport ParseReportJson(std::string_view json_text) {
  const Json doc = json_util::ParseDocument(json_text);
  json_util::ExpectSchema(doc, kReportSchema);
  EvalReport r;

  const Json& meta = json_util::Field(doc, "", "meta");
  ReportMeta& m = r.meta;
  auto str = [&](const char* key) {
    return json_util::AsString(json_util::Field(meta, "/meta", key),
                               std::string("/meta/") + key, true);
  };
  m.model_tag = str("model_tag");
  m.dataset_version = str("dataset_version");
  m.bucket = str("bucket");
  m.seed = json_util::AsUint64(json_util::Field(meta, "/meta", "seed"),
                               "/meta/seed");
  m.iou_threshold = Metric(meta, "/meta", "iou_threshold");
  m.score_floor = Metric(meta, "/meta", "score_floor");
  m.interpolation = str("interpolation");
  m.dice_averaging = str("dice_averaging");
  m.dice_instance_kind = str("dice_instance_kind");
  m.operating_point = str("operating_point");
  m.n_images = Count(meta, "/meta", "n_images");
  m.n_ground_truth = Count(meta, "/meta", "n_ground_truth");
  m.n_detections = Count(meta, "/meta", "n_detections");
  const Json& conv = json_util::AsArray(
      json_util::Field(meta, "/meta", "conventions"), "/meta/conventions");
  for (size_t i = 0; i < conv.size(); ++i) {
    m.conventions.push_back(json_util::AsString(
        conv[i], "/meta/conventions/" + std::to_string(i)));
  }

  const Json& metrics = json_util::Field(doc, "", "metrics");
  r.dice_pixel = Metric(metrics, "/metrics", "dice_pixel");
  r.dice_instance = Metric(metrics, "/metrics", "dice_instance");
  r.map50_mask = Metric(metrics, "/metrics", "map50_mask");
  r.map50_box = Metric(metrics, "/metrics", "map50_box");
  r.precision_mask = Metric(metrics, "/metrics", "precision_mask");
  r.precision_box = Metric(metrics, "/metrics", "precision_box");
  r.recall_mask = Metric(metrics, "/metrics", "recall_mask");
  r.recall_box = Metric(metrics, "/metrics", "recall_box");

  const Json& counts = json_util::Field(doc, "", "counts");
  r.counts_mask = ParseMatch(json_util::Field(counts, "/counts", "mask"),
                             "/counts/mask", MatchKind::kMask);
  r.counts_box = ParseMatch(json_util::Field(counts, "/counts", "box"),
                            "/counts/box", MatchKind::kBox);
  const Json& px = json_util::Field(counts, "/counts", "pixel");
  r.pixel_counts = {Count(px, "/counts/pixel", "tp"),
                    Count(px, "/counts/pixel", "fp"),
                    Count(px, "/counts/pixel", "fn")};

  const Json& curves = json_util::Field(doc, "", "pr_curve");
  r.pr_curve_mask = ParseCurve(json_util::Field(curves, "/pr_curve", "mask"),
                               "/pr_curve/mask");
  r.pr_curve_box = ParseCurve(json_util::Field(curves, "/pr_curve", "box"),
                              "/pr_curve/box");
  return r;
}

std::string ReportSvg(const EvalReport& r) {
  const std::string size = Shortest(kPlotSize);
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
       Shortest(kSvgWidth) + "\" height=\"" + Shortest(kSvgHeight) +
       "\" viewBox=\"0 0 " + Shortest(kSvgWidth) + " " + Shortest(kSvgHeight) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + PlotX(0.5) + "\" y=\"30\" text-anchor=\"middle\" " +
       "font-size=\"15\">" +
       XmlEscape("PR curves: " + r.meta.model_tag + " / " +
                 r.meta.dataset_version + " / " + r.meta.bucket +
                 " (IoU >= " + Shortest(r.meta.iou_threshold) + ")") +
       "</text>\n";

  // Frame, grid and ticks.
  s += "<rect x=\"" + PlotX(0) + "\" y=\"" + PlotY(1) + "\" width=\"" + size +
       "\" height=\"" + size + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 10; ++i) {
    const double t = i / 10.0;
    const std::string label = Fixed3(t).substr(0, 3);
    s += "<line x1=\"" + PlotX(t) + "\" y1=\"" + PlotY(0) + "\" x2=\"" +
         PlotX(t) + "\" y2=\"" + PlotY(1) +
         "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    s += "<line x1=\"" + PlotX(0) + "\" y1=\"" + PlotY(t) + "\" x2=\"" +
         PlotX(1) + "\" y2=\"" + PlotY(t) +
         "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    s += "<text x=\"" + PlotX(t) + "\" y=\"" + Shortest(kPlotTop + kPlotSize + 16) +
         "\" text-anchor=\"middle\">" + label + "</text>\n";
    s += "<text x=\"" + Shortest(kPlotLeft - 6) + "\" y=\"" +
         Shortest(kPlotTop + (1.0 - t) * kPlotSize + 4) +
         "\" text-anchor=\"end\">" + label + "</text>\n";
  }
  s += "<text class=\"axis-label\" x=\"" + PlotX(0.5) + "\" y=\"" +
       Shortest(kPlotTop + kPlotSize + 38) +
       "\" text-anchor=\"middle\">Recall</text>\n";
  s += "<text class=\"axis-label\" transform=\"translate(22," +
       Shortest(kPlotTop + kPlotSize / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">Precision</text>\n";

  // Curves in data coordinates.
  s += "<g transform=\"translate(" + PlotX(0) + "," + PlotY(0) + ") scale(" +
       size + ",-" + size + ")\">\n";
  for (const CurveStyle& style : kCurves) {
    const auto& curve = std::string_view(style.kind) == "mask" ? r.pr_curve_mask
                                                               : r.pr_curve_box;
    std::string points;
    for (const PrPoint& p : curve) {
      if (!points.empty()) points += ' ';
      points += Shortest(p.recall) + "," + Shortest(p.precision);
    }
    s += "<polyline id=\"pr-" + std::string(style.kind) +
         "\" fill=\"none\" stroke=\"" + style.color +
         "\" stroke-width=\"2\" vector-effect=\"non-scaling-stroke\" points=\"" +
         points + "\"/>\n";
  }
  s += "</g>\n";

  // Operating points and legend.
  double legend_y = kPlotTop + 20;
  for (const CurveStyle& style : kCurves) {
    const bool mask = std::string_view(style.kind) == "mask";
    const auto& curve = mask ? r.pr_curve_mask : r.pr_curve_box;
    const double ap = mask ? r.map50_mask : r.map50_box;
    if (!curve.empty()) {
      const PrPoint& op = curve.back();
      s += "<circle class=\"operating-point\" id=\"op-" +
           std::string(style.kind) + "\" cx=\"" + PlotX(op.recall) +
           "\" cy=\"" + PlotY(op.precision) + "\" r=\"5\" fill=\"" +
           style.color + "\" stroke=\"black\"><title>" + style.kind +
           " operating point: recall " + Fixed3(op.recall) + ", precision " +
           Fixed3(op.precision) + "</title></circle>\n";
    }
    const double lx = kPlotLeft + kPlotSize + 20;
    s += "<line x1=\"" + Shortest(lx) + "\" y1=\"" + Shortest(legend_y) +
         "\" x2=\"" + Shortest(lx + 20) + "\" y2=\"" + Shortest(legend_y) +
         "\" stroke=\"" + style.color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + Shortest(lx + 26) + "\" y=\"" + Shortest(legend_y + 4) +
         "\">" + style.kind + " AP " + Fixed3(ap) + "</text>\n";
    legend_y += 20;
  }
  s += "<circle cx=\"" + Shortest(kPlotLeft + kPlotSize + 30) + "\" cy=\"" +
       Shortest(legend_y) + "\" r=\"5\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"" + Shortest(kPlotLeft + kPlotSize + 46) + "\" y=\"" +
       Shortest(legend_y + 4) + "\">operating point</text>\n";
  s += "</svg>\n";
  return s;
}

std::string RenderReport(const EvalReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kCsv: return ReportCsv(report);
    case ReportFormat::kJson: return ReportJson(report);
    case ReportFormat::kSvg: return ReportSvg(report);
  }
  return {};
}

std::string ReportFileName(const ReportMeta& meta, ReportFormat format) {
  return "report_" + meta.dataset_version + "_" + meta.bucket + "_seed" +
         std::to_string(meta.seed) + "." + ReportFormatExtension(format);
}

void WriteReport(const EvalReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
  WriteFileAtomic(path, RenderReport(report, format));
}

}  // namespace nodulekit
