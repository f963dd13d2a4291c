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
#include "nodulekit/annotations.h"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "json_util.h"
#include "nodulekit/error.h"

namespace nodulekit {

namespace {

using json_util::Json;
using json_util::OrderedJson;

constexpr int kMaxDimension = 1 << 16;

const char* const kRecordFields[] = {"image",      "patient_id", "width",
                                     "height",     "no_finding", "excluded",
                                     "doppler",    "nodules"};
const char* const kNoduleFields[] = {"polygon", "tirads", "attrs"};

template <size_t N>
bool IsKnown(const char* const (&fields)[N], const std::string& key) {
  return std::find_if(std::begin(fields), std::end(fields),
                      [&](const char* f) { return key == f; }) !=
         std::end(fields);
}

std::string NoduleMetaKey(size_t k, const std::string& field) {
  return "nodules[" + std::to_string(k) + "]." + field;
}

NodulePolygon ParseNodule(const Json& obj, const std::string& path, size_t k,
                          AnnotationRecord& record) {
  if (!obj.is_object()) json_util::Violation(path, "expected object");
  NodulePolygon nodule;
  const std::string poly_path = path + "/polygon";
  const Json& poly =
      json_util::AsArray(json_util::Field(obj, path, "polygon"), poly_path);
  if (poly.size() < 3) {
    json_util::Violation(poly_path, "polygon has " +
                                        std::to_string(poly.size()) +
                                        " points; at least 3 required");
  }
  nodule.vertices.reserve(poly.size());
  for (size_t i = 0; i < poly.size(); ++i) {
    const std::string vpath = poly_path + "/" + std::to_string(i);
    const Json& pt = poly[i];
    if (!pt.is_array() || pt.size() != 2) {
      json_util::Violation(vpath, "expected [x, y]");
    }
    nodule.vertices.push_back({json_util::AsNumber(pt[0], vpath + "/0"),
                               json_util::AsNumber(pt[1], vpath + "/1")});
  }
  try {
    ValidatePolygon(nodule);
  } catch (const Error& e) {
    json_util::Violation(poly_path, e.what());
  }

  if (const Json* t = json_util::OptionalField(obj, "tirads")) {
    const std::string text = json_util::AsString(*t, path + "/tirads", true);
    nodule.tirads = ParseTirads(text);
    if (!nodule.tirads) record.source_meta[NoduleMetaKey(k, "tirads")] = t->dump();
  }
  if (const Json* attrs = json_util::OptionalField(obj, "attrs")) {
    if (!attrs->is_object()) json_util::Violation(path + "/attrs", "expected object");
    for (auto it = attrs->begin(); it != attrs->end(); ++it) {
      nodule.shape_attrs[it.key()] =
          json_util::AsString(it.value(), path + "/attrs/" + it.key(), true);
    }
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!IsKnown(kNoduleFields, it.key())) {
      record.source_meta[NoduleMetaKey(k, it.key())] = it.value().dump();
    }
  }
  return nodule;
}

AnnotationRecord ParseRecord(const Json& obj, const std::string& path) {
  if (!obj.is_object()) json_util::Violation(path, "expected object");
  AnnotationRecord r;
  r.image_ref = json_util::AsString(json_util::Field(obj, path, "image"),
                                    path + "/image");
  r.patient_id = json_util::AsString(
      json_util::Field(obj, path, "patient_id"), path + "/patient_id");
  r.image_width = static_cast<int>(json_util::AsInteger(
      json_util::Field(obj, path, "width"), path + "/width", 1, kMaxDimension));
  r.image_height = static_cast<int>(
      json_util::AsInteger(json_util::Field(obj, path, "height"),
                           path + "/height", 1, kMaxDimension));
  if (const Json* v = json_util::OptionalField(obj, "no_finding")) {
    r.no_finding = json_util::AsBool(*v, path + "/no_finding");
  }
  if (const Json* v = json_util::OptionalField(obj, "excluded")) {
    r.excluded = json_util::AsString(*v, path + "/excluded");
  }
  if (const Json* v = json_util::OptionalField(obj, "doppler")) {
    r.doppler = json_util::AsBool(*v, path + "/doppler");
  }
  const std::string nodules_path = path + "/nodules";
  const Json& nodules = json_util::AsArray(
      json_util::Field(obj, path, "nodules"), nodules_path);
  if (nodules.empty() && !r.no_finding) {
    json_util::Violation(nodules_path,
                         "no nodules and record not flagged no_finding");
  }
  if (!nodules.empty() && r.no_finding) {
    json_util::Violation(nodules_path, "no_finding record carries nodules");
  }
  for (size_t k = 0; k < nodules.size(); ++k) {
    r.nodules.push_back(ParseNodule(
        nodules[k], nodules_path + "/" + std::to_string(k), k, r));
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!IsKnown(kRecordFields, it.key())) {
      r.source_meta[it.key()] = it.value().dump();
    }
  }
  return r;
}

OrderedJson MetaValue(const std::string& text) {
  return OrderedJson::parse(text, nullptr, /*allow_exceptions=*/false);
}

}  // namespace

int64_t AnnotationSet::NoduleCount() const {
  int64_t n = 0;
  for (const auto& r : records) n += static_cast<int64_t>(r.nodules.size());
  return n;
}

const AnnotationRecord* AnnotationSet::Find(const std::string& image_ref) const {
  for (const auto& r : records) {
    if (r.image_ref == image_ref) return &r;
  }
  return nullptr;
}

AnnotationSet ParseAnnotations(std::string_view json_text) {
  const Json doc = json_util::ParseDocument(json_text);
  try {
    json_util::ExpectSchema(doc, kAnnotationSchema);
    const Json& records = json_util::AsArray(
        json_util::Field(doc, "", "records"), "/records");
    if (records.empty()) {
      throw Error(ErrorCode::kEmptyExport, "records array is empty");
    }
    AnnotationSet set;
    set.label_schema_version = doc["schema"].get<std::string>();
    std::unordered_set<std::string> seen;
    set.records.reserve(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
      const std::string path = "/records/" + std::to_string(i);
      AnnotationRecord r = ParseRecord(records[i], path);
      if (!seen.insert(r.image_ref).second) {
        throw Error(ErrorCode::kDuplicateImageRef,
                    path + "/image: " + r.image_ref);
      }
      set.records.push_back(std::move(r));
    }
    return set;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, e.what());
  }
}

std::string AnnotationsToJson(const AnnotationSet& set) {
  OrderedJson doc;
  doc["schema"] = set.label_schema_version;
  OrderedJson records = OrderedJson::array();
  for (const AnnotationRecord& r : set.records) {
    OrderedJson rec;
    rec["image"] = r.image_ref;
    rec["patient_id"] = r.patient_id;
    rec["width"] = r.image_width;
    rec["height"] = r.image_height;
    if (r.no_finding) rec["no_finding"] = true;
    if (r.excluded) rec["excluded"] = *r.excluded;
    if (r.doppler) rec["doppler"] = *r.doppler;
    OrderedJson nodules = OrderedJson::array();
    for (size_t k = 0; k < r.nodules.size(); ++k) {
      const NodulePolygon& n = r.nodules[k];
      OrderedJson nod;
      OrderedJson poly = OrderedJson::array();
      for (const Point2D& p : n.vertices) poly.push_back({p.x, p.y});
      nod["polygon"] = std::move(poly);
      if (n.tirads) nod["tirads"] = TiradsName(*n.tirads);
      if (!n.shape_attrs.empty()) nod["attrs"] = n.shape_attrs;
      const std::string prefix = "nodules[" + std::to_string(k) + "].";
      for (const auto& [key, value] : r.source_meta) {
        if (key.rfind(prefix, 0) == 0) {
          nod[key.substr(prefix.size())] = MetaValue(value);
        }
      }
      nodules.push_back(std::move(nod));
    }
    rec["nodules"] = std::move(nodules);
    for (const auto& [key, value] : r.source_meta) {
      if (key.rfind("nodules[", 0) != 0) rec[key] = MetaValue(value);
    }
    records.push_back(std::move(rec));
  }
  doc["records"] = std::move(records);
  return doc.dump(2) + "\n";
}

const char* ValidationKindName(ValidationIssue::Kind kind) {
  switch (kind) {
    case ValidationIssue::Kind::kMissingImage:
      return "missing_image";
    case ValidationIssue::Kind::kUnannotatedImage:
      return "unannotated_image";
    case ValidationIssue::Kind::kOutOfBounds:
      return "out_of_bounds";
    case ValidationIssue::Kind::kDimensionMismatch:
      return "dimension_mismatch";
  }
  return "unknown";
}

ValidationResult ValidateAgainstImages(
    const AnnotationSet& set, const std::map<std::string, ImageDims>& images) {
  ValidationResult result;
  result.annotations = set;
  std::set<std::string> annotated;
  for (AnnotationRecord& r : result.annotations.records) {
    annotated.insert(r.image_ref);
    int width = r.image_width;
    int height = r.image_height;
    auto it = images.find(r.image_ref);
    if (it == images.end()) {
      result.report.issues.push_back(
          {ValidationIssue::Kind::kMissingImage, r.image_ref, -1, -1,
           "no decoded image with this name"});
    } else if (it->second.width != width || it->second.height != height) {
      result.report.issues.push_back(
          {ValidationIssue::Kind::kDimensionMismatch, r.image_ref, -1, -1,
           "annotation " + std::to_string(width) + "x" +
               std::to_string(height) + ", image " +
               std::to_string(it->second.width) + "x" +
               std::to_string(it->second.height)});
      width = it->second.width;
      height = it->second.height;
    }

    for (size_t k = 0; k < r.nodules.size(); ++k) {
      auto& vertices = r.nodules[k].vertices;
      for (size_t v = 0; v < vertices.size(); ++v) {
        Point2D& p = vertices[v];
        const bool inside = p.x >= -kBoundsTolerancePx &&
                            p.x <= width + kBoundsTolerancePx &&
                            p.y >= -kBoundsTolerancePx &&
                            p.y <= height + kBoundsTolerancePx;
        if (!inside) {
          result.report.issues.push_back(
              {ValidationIssue::Kind::kOutOfBounds, r.image_ref,
               static_cast<int>(k), static_cast<int>(v),
               "vertex (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                   ") outside " + std::to_string(width) + "x" +
                   std::to_string(height)});
          continue;
        }
        p.x = std::clamp(p.x, 0.0, static_cast<double>(width));
        p.y = std::clamp(p.y, 0.0, static_cast<double>(height));
      }
    }
  }
  for (const auto& [ref, dims] : images) {
    if (!annotated.count(ref)) {
      result.report.issues.push_back({ValidationIssue::Kind::kUnannotatedImage,
                                      ref, -1, -1, "image has no annotation"});
    }
  }
  return result;
}

}  // namespace nodulekit
