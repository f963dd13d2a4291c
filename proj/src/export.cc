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
#include "nodulekit/export.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdio>
#include <unordered_map>

#include "json_util.h"
#include "nodulekit/error.h"
#include "nodulekit/fsutil.h"
#include "nodulekit/parallel.h"

namespace nodulekit {

namespace fs = std::filesystem;

namespace {

using json_util::Json;
using json_util::OrderedJson;

void AppendFixed6(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), " %.6f", v);
  out += buf;
}

void RequireSplit(const DatasetManifest& manifest) {
  for (const ManifestEntry& e : manifest.entries) {
    if (!e.excluded && !e.split) {
      throw Error(ErrorCode::kUnsplitManifest,
                  e.image_ref + " has no split assignment");
    }
  }
}

std::unordered_map<std::string, const AnnotationRecord*> IndexRecords(
    const AnnotationSet& annotations) {
  std::unordered_map<std::string, const AnnotationRecord*> index;
  for (const AnnotationRecord& r : annotations.records) {
    index.emplace(r.image_ref, &r);
  }
  return index;
}

}  // namespace

std::string ExportYolo(const AnnotationRecord& record) {
  if (record.nodules.empty()) {
    if (record.no_finding) return "";
    throw Error(ErrorCode::kNoNodules, record.image_ref);
  }
  const double w = record.image_width;
  const double h = record.image_height;
  std::string out;
  for (const NodulePolygon& n : record.nodules) {
    ValidatePolygon(n);
    out += std::to_string(kYoloClassId);
    for (const Point2D& p : n.vertices) {
      AppendFixed6(out, std::clamp(p.x / w, 0.0, 1.0));
      AppendFixed6(out, std::clamp(p.y / h, 0.0, 1.0));
    }
    out += '\n';
  }
  return out;
}

CocoDataset ExportCoco(const DatasetManifest& manifest,
                       const AnnotationSet& annotations, Bucket bucket) {
  RequireSplit(manifest);
  const auto index = IndexRecords(annotations);
  CocoDataset coco;
  coco.categories.push_back({});
  int64_t image_id = 0;
  int64_t ann_id = 0;
  for (const ManifestEntry& e : manifest.entries) {
    if (e.excluded || e.split != bucket) continue;
    auto it = index.find(e.image_ref);
    if (it == index.end()) {
      throw Error(ErrorCode::kUnknownImageRef,
                  e.image_ref + " has no annotation record");
    }
    const AnnotationRecord& r = *it->second;
    coco.images.push_back(
        {++image_id, r.image_ref, r.image_width, r.image_height});
    for (const NodulePolygon& n : r.nodules) {
      CocoAnnotation a;
      a.id = ++ann_id;
      a.image_id = image_id;
      std::vector<double> flat;
      flat.reserve(2 * n.vertices.size());
      for (const Point2D& p : n.vertices) {
        flat.push_back(p.x);
        flat.push_back(p.y);
      }
      a.segmentation.push_back(std::move(flat));
      const BoundingBox box = PolygonBbox(n);
      a.bbox = {box.x_min, box.y_min, box.width(), box.height()};
      a.area = ShoelaceArea(n);
      if (n.tirads) a.tirads = TiradsName(*n.tirads);
      coco.annotations.push_back(std::move(a));
    }
  }
  return coco;
}

std::string CocoToJson(const CocoDataset& coco) {
  OrderedJson doc;
  OrderedJson images = OrderedJson::array();
  for (const CocoImage& im : coco.images) {
    images.push_back({{"id", im.id},
                      {"file_name", im.file_name},
                      {"width", im.width},
                      {"height", im.height}});
  }
  OrderedJson anns = OrderedJson::array();
  for (const CocoAnnotation& a : coco.annotations) {
    OrderedJson j;
    j["id"] = a.id;
    j["image_id"] = a.image_id;
    j["category_id"] = a.category_id;
    j["segmentation"] = a.segmentation;
    j["bbox"] = a.bbox;
    j["area"] = a.area;
    j["iscrowd"] = a.iscrowd;
    if (a.tirads) j["tirads"] = *a.tirads;
    anns.push_back(std::move(j));
  }
  OrderedJson cats = OrderedJson::array();
  for (const CocoCategory& c : coco.categories) {
    cats.push_back({{"id", c.id}, {"name", c.name}});
  }
  doc["images"] = std::move(images);
  doc["annotations"] = std::move(anns);
  doc["categories"] = std::move(cats);
  return doc.dump() + "\n";
}

CocoDataset ParseCoco(std::string_view json_text) {
  const Json doc = json_util::ParseDocument(json_text);
  try {
    CocoDataset coco;
    const Json& images =
        json_util::AsArray(json_util::Field(doc, "", "images"), "/images");
    for (size_t i = 0; i < images.size(); ++i) {
      const std::string p = "/images/" + std::to_string(i);
      const Json& j = images[i];
      coco.images.push_back(
          {json_util::AsInteger(json_util::Field(j, p, "id"), p + "/id", 1,
                                INT64_MAX),
           json_util::AsString(json_util::Field(j, p, "file_name"),
                               p + "/file_name"),
           static_cast<int>(json_util::AsInteger(
               json_util::Field(j, p, "width"), p + "/width", 1, 1 << 16)),
           static_cast<int>(json_util::AsInteger(
               json_util::Field(j, p, "height"), p + "/height", 1, 1 << 16))});
    }
    const Json& anns = json_util::AsArray(
        json_util::Field(doc, "", "annotations"), "/annotations");
    for (size_t i = 0; i < anns.size(); ++i) {
      const std::string p = "/annotations/" + std::to_string(i);
      const Json& j = anns[i];
      CocoAnnotation a;
      a.id = json_util::AsInteger(json_util::Field(j, p, "id"), p + "/id", 1,
                                  INT64_MAX);
      a.image_id = json_util::AsInteger(json_util::Field(j, p, "image_id"),
                                        p + "/image_id", 1, INT64_MAX);
      a.category_id = static_cast<int>(json_util::AsInteger(
          json_util::Field(j, p, "category_id"), p + "/category_id", 0,
          INT32_MAX));
      const Json& seg = json_util::AsArray(
          json_util::Field(j, p, "segmentation"), p + "/segmentation");
      for (size_t s = 0; s < seg.size(); ++s) {
        const std::string sp = p + "/segmentation/" + std::to_string(s);
        const Json& flat = json_util::AsArray(seg[s], sp);
        std::vector<double> poly;
        for (size_t k = 0; k < flat.size(); ++k) {
          poly.push_back(json_util::AsNumber(flat[k], sp + "/" + std::to_string(k)));
        }
        a.segmentation.push_back(std::move(poly));
      }
      const Json& bbox =
          json_util::AsArray(json_util::Field(j, p, "bbox"), p + "/bbox");
      if (bbox.size() != 4) json_util::Violation(p + "/bbox", "expected 4 numbers");
      for (size_t k = 0; k < 4; ++k) {
        a.bbox[k] = json_util::AsNumber(bbox[k], p + "/bbox/" + std::to_string(k));
      }
      a.area = json_util::AsNumber(json_util::Field(j, p, "area"), p + "/area");
      a.iscrowd = static_cast<int>(json_util::AsInteger(
          json_util::Field(j, p, "iscrowd"), p + "/iscrowd", 0, 1));
      if (const Json* t = json_util::OptionalField(j, "tirads")) {
        a.tirads = json_util::AsString(*t, p + "/tirads");
      }
      coco.annotations.push_back(std::move(a));
    }
    const Json& cats = json_util::AsArray(
        json_util::Field(doc, "", "categories"), "/categories");
    for (size_t i = 0; i < cats.size(); ++i) {
      const std::string p = "/categories/" + std::to_string(i);
      coco.categories.push_back(
          {static_cast<int>(json_util::AsInteger(
               json_util::Field(cats[i], p, "id"), p + "/id", 0, INT32_MAX)),
           json_util::AsString(json_util::Field(cats[i], p, "name"),
                               p + "/name")});
    }
    return coco;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, e.what());
  }
}

std::vector<MaskFile> ExportMasks(const AnnotationRecord& record) {
  std::vector<MaskFile> out;
  const std::string stem = Stem(record.image_ref);
  for (size_t k = 0; k < record.nodules.size(); ++k) {
    out.push_back({stem + "_nodule" + std::to_string(k) + ".png",
                   Rasterize(record.nodules[k], record.image_width,
                             record.image_height)});
  }
  return out;
}

RasterImage MaskToImage(const InstanceMask& mask) {
  RasterImage img{mask.width(), mask.height(), 1, {}};
  img.samples.assign(static_cast<size_t>(mask.width()) * mask.height(), 0);
  const auto words = mask.words();
  for (size_t w = 0; w < words.size(); ++w) {
    uint64_t bits = words[w];
    while (bits != 0) {
      const size_t index = w * 64 + static_cast<size_t>(std::countr_zero(bits));
      bits &= bits - 1;
      img.samples[index] = 255;
    }
  }
  return img;
}

InstanceMask ImageToMask(const RasterImage& image) {
  ValidateImage(image);
  Bitmap bitmap(image.width, image.height);
  const int c = image.channels;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const size_t base = (static_cast<size_t>(y) * image.width + x) * c;
      bool on = false;
      for (int k = 0; k < c; ++k) on |= image.samples[base + k] != 0;
      if (on) bitmap.Set(x, y);
    }
  }
  return InstanceMask(image.width, image.height, std::move(bitmap).Release());
}

std::optional<ExportFormat> ParseExportFormat(std::string_view name) {
  if (name == "yolo") return ExportFormat::kYolo;
  if (name == "coco") return ExportFormat::kCoco;
  if (name == "masks") return ExportFormat::kMasks;
  return std::nullopt;
}

std::string DataYaml(const fs::path& root) {
  std::string out;
  out += "path: " + root.string() + "\n";
  out += "train: images/train\n";
  out += "val: images/val\n";
  out += "test: images/test\n";
  out += "nc: 1\n";
  out += "names: ['" + std::string(kCategoryName) + "']\n";
  return out;
}

ExportSummary ExportDataset(const DatasetManifest& manifest,
                            const AnnotationSet& annotations,
                            const ExportOptions& options) {
  RequireSplit(manifest);
  const auto index = IndexRecords(annotations);
  auto wants = [&](ExportFormat f) {
    return std::find(options.formats.begin(), options.formats.end(), f) !=
           options.formats.end();
  };
  auto in_buckets = [&](Bucket b) {
    return std::find(options.buckets.begin(), options.buckets.end(), b) !=
           options.buckets.end();
  };

  std::vector<const ManifestEntry*> selected;
  for (const ManifestEntry& e : manifest.entries) {
    if (e.excluded || !in_buckets(*e.split)) continue;
    if (!index.count(e.image_ref)) {
      throw Error(ErrorCode::kUnknownImageRef,
                  e.image_ref + " has no annotation record");
    }
    selected.push_back(&e);
  }

  const bool copy_images = options.render || !options.images_dir.empty();
  std::atomic<int64_t> images{0}, labels{0}, masks{0};
  ParallelFor(selected.size(), options.threads, [&](size_t i) {
    const ManifestEntry& e = *selected[i];
    const AnnotationRecord& r = *index.at(e.image_ref);
    const std::string bucket = BucketName(*e.split);
    if (wants(ExportFormat::kYolo)) {
      if (copy_images) {
        const fs::path dst = options.out_dir / "images" / bucket / r.image_ref;
        if (options.render) {
          WritePng(options.render(r.image_ref), dst);
        } else {
          WriteFileAtomic(dst, ReadFileBytes(options.images_dir / r.image_ref));
        }
        ++images;
      }
      WriteFileAtomic(
          options.out_dir / "labels" / bucket / (Stem(r.image_ref) + ".txt"),
          ExportYolo(r));
      ++labels;
    }
    if (wants(ExportFormat::kMasks)) {
      for (const MaskFile& m : ExportMasks(r)) {
        WritePng(MaskToImage(m.mask), options.out_dir / "masks" / m.file_name);
        ++masks;
      }
    }
  });

  ExportSummary summary;
  summary.images = images;
  summary.label_files = labels;
  summary.mask_files = masks;
  if (wants(ExportFormat::kYolo)) {
    WriteFileAtomic(options.out_dir / "data.yaml", DataYaml(options.out_dir));
  }
  if (wants(ExportFormat::kCoco)) {
    for (Bucket b : options.buckets) {
      const CocoDataset coco = ExportCoco(manifest, annotations, b);
      summary.coco_annotations += static_cast<int64_t>(coco.annotations.size());
      WriteFileAtomic(options.out_dir / "annotations" /
                          ("instances_" + std::string(BucketName(b)) + ".json"),
                      CocoToJson(coco));
    }
  }
  return summary;
}

}  // namespace nodulekit
