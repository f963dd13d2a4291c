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

// Training artifacts: YOLO segmentation labels, COCO instance JSON and
// per-nodule mask images.
//
// On-disk layout under an export root:
//   images/{train,val,test}/<image>      labels/{train,val,test}/<stem>.txt
//   annotations/instances_{bucket}.json  masks/<stem>_nodule<k>.png
//   data.yaml
#ifndef NODULEKIT_EXPORT_H_
#define NODULEKIT_EXPORT_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nodulekit/annotations.h"
#include "nodulekit/geometry.h"
#include "nodulekit/image.h"
#include "nodulekit/manifest.h"

namespace nodulekit {

inline constexpr int kYoloClassId = 0;
inline constexpr int kCocoCategoryId = 1;
inline constexpr char kCategoryName[] = "nodule";

struct YoloSegLabel {
  int class_id = kYoloClassId;
  std::vector<Point2D> normalized_vertices;  // (x / width, y / height)
  std::optional<double> confidence;          // prediction files only

  bool operator==(const YoloSegLabel&) const = default;
};

// One line per nodule: "class x1 y1 x2 y2 ..." with 6-decimal coordinates.
// A no_finding record yields an empty string; otherwise zero nodules throws
// kNoNodules.
std::string ExportYolo(const AnnotationRecord& record);

struct CocoImage {
  int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;

  bool operator==(const CocoImage&) const = default;
};

struct CocoAnnotation {
  int64_t id = 0;
  int64_t image_id = 0;
  int category_id = kCocoCategoryId;
  std::vector<std::vector<double>> segmentation;  // flat x,y polygons
  std::array<double, 4> bbox{};                   // x, y, width, height
  double area = 0.0;
  int iscrowd = 0;
  std::optional<std::string> tirads;

  bool operator==(const CocoAnnotation&) const = default;
};

struct CocoCategory {
  int id = kCocoCategoryId;
  std::string name = kCategoryName;

  bool operator==(const CocoCategory&) const = default;
};

struct CocoDataset {
  std::vector<CocoImage> images;
  std::vector<CocoAnnotation> annotations;
  std::vector<CocoCategory> categories;

  bool operator==(const CocoDataset&) const = default;
};

// Images of `bucket` in manifest order; ids dense from 1. Throws
// kUnsplitManifest when any non-excluded entry lacks a split.
CocoDataset ExportCoco(const DatasetManifest& manifest,
                       const AnnotationSet& annotations, Bucket bucket);
std::string CocoToJson(const CocoDataset& coco);
CocoDataset ParseCoco(std::string_view json_text);

struct MaskFile {
  std::string file_name;  // <stem>_nodule<k>.png
  InstanceMask mask;
};

// One mask per nodule, rasterized independently (overlaps are kept).
std::vector<MaskFile> ExportMasks(const AnnotationRecord& record);

// 255 inside, 0 outside.
RasterImage MaskToImage(const InstanceMask& mask);
// Any nonzero sample is inside. Throws kEmptyMask for an all-zero image.
InstanceMask ImageToMask(const RasterImage& image);

enum class ExportFormat { kYolo, kCoco, kMasks };
std::optional<ExportFormat> ParseExportFormat(std::string_view name);

struct ExportOptions {
  std::filesystem::path out_dir;
  std::vector<ExportFormat> formats = {ExportFormat::kYolo, ExportFormat::kCoco,
                                       ExportFormat::kMasks};
  std::vector<Bucket> buckets = {kAllBuckets.begin(), kAllBuckets.end()};
  // Source PNGs copied into images/<bucket>/; skipped when empty and
  // `render` is unset.
  std::filesystem::path images_dir;
  // Alternative image source (e.g. the synthetic generator).
  std::function<RasterImage(const std::string& image_ref)> render;
  int threads = 1;
};

struct ExportSummary {
  int64_t images = 0;
  int64_t label_files = 0;
  int64_t coco_annotations = 0;
  int64_t mask_files = 0;
};

ExportSummary ExportDataset(const DatasetManifest& manifest,
                            const AnnotationSet& annotations,
                            const ExportOptions& options);

std::string DataYaml(const std::filesystem::path& root);

}  // namespace nodulekit

#endif  // NODULEKIT_EXPORT_H_
