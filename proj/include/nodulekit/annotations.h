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

// Canonical per-nodule annotation records ("nodule-annotations/1").
//
//   { "schema": "nodule-annotations/1",
//     "records": [ { "image": "<filename>", "patient_id": "<string>",
//                    "width": <int>, "height": <int>,
//                    "no_finding": <bool, optional>,
//                    "excluded": "<reason, optional>",
//                    "doppler": <bool, optional>,
//                    "nodules": [ { "polygon": [[x, y], ...],
//                                   "tirads": "TR1".."TR5" (optional),
//                                   "attrs": { "<k>": "<v>" } (optional) } ]
//                  } ] }
//
// Unrecognized record fields and unrecognized TIRADS strings are kept in
// AnnotationRecord::source_meta and written back on emission.
#ifndef NODULEKIT_ANNOTATIONS_H_
#define NODULEKIT_ANNOTATIONS_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nodulekit/geometry.h"
#include "nodulekit/image.h"

namespace nodulekit {

inline constexpr char kAnnotationSchema[] = "nodule-annotations/1";

struct AnnotationRecord {
  std::string image_ref;
  std::string patient_id;
  int image_width = 0;
  int image_height = 0;
  bool no_finding = false;
  std::optional<std::string> excluded;
  std::optional<bool> doppler;
  std::vector<NodulePolygon> nodules;
  // Unknown record fields keyed by name, unknown nodule fields and
  // unrecognized TIRADS strings keyed "nodules[k].<field>". Values are
  // compact JSON text.
  std::map<std::string, std::string> source_meta;

  bool operator==(const AnnotationRecord&) const = default;
};

struct AnnotationSet {
  std::vector<AnnotationRecord> records;
  std::string label_schema_version = kAnnotationSchema;

  int64_t NoduleCount() const;
  const AnnotationRecord* Find(const std::string& image_ref) const;

  bool operator==(const AnnotationSet&) const = default;
};

AnnotationSet ParseAnnotations(std::string_view json_text);
std::string AnnotationsToJson(const AnnotationSet& set);

// Half-pixel overshoot accepted (and clipped) around the frame.
inline constexpr double kBoundsTolerancePx = 0.5;

struct ValidationIssue {
  enum class Kind {
    kMissingImage,         // annotation refers to an image not on disk
    kUnannotatedImage,     // image without annotation record
    kOutOfBounds,          // vertex beyond the tolerance band
    kDimensionMismatch,    // record width/height differ from the image
  };
  Kind kind;
  std::string image_ref;
  int nodule = -1;
  int vertex = -1;
  std::string detail;

  bool operator==(const ValidationIssue&) const = default;
};

const char* ValidationKindName(ValidationIssue::Kind kind);

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool clean() const { return issues.empty(); }
};

struct ValidationResult {
  AnnotationSet annotations;  // every input record, tolerance-clipped
  ValidationReport report;
};

// Cross-checks annotations against decoded image dimensions. Never drops
// records; flagged records pass through unchanged apart from clipping.
ValidationResult ValidateAgainstImages(
    const AnnotationSet& set, const std::map<std::string, ImageDims>& images);

}  // namespace nodulekit

#endif  // NODULEKIT_ANNOTATIONS_H_
