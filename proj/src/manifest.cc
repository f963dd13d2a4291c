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
#include "nodulekit/manifest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "json_util.h"
#include "nodulekit/error.h"
#include "nodulekit/random.h"

namespace nodulekit {

namespace {

using json_util::Json;
using json_util::OrderedJson;

void SortEntries(std::vector<ManifestEntry>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) {
              return a.image_ref < b.image_ref;
            });
}

void CheckSplitConsistency(const DatasetManifest& m) {
  bool any = false;
  bool all = true;
  for (const ManifestEntry& e : m.entries) {
    if (e.excluded) continue;
    any |= e.split.has_value();
    all &= e.split.has_value();
  }
  if (any && !all) {
    json_util::Violation("/entries",
                         "split assigned to some but not all entries");
  }
}

}  // namespace

const char* BucketName(Bucket b) {
  switch (b) {
    case Bucket::kTrain:
      return "train";
    case Bucket::kVal:
      return "val";
    case Bucket::kTest:
      return "test";
  }
  return "?";
}

std::optional<Bucket> ParseBucket(std::string_view name) {
  for (Bucket b : kAllBuckets) {
    if (name == BucketName(b)) return b;
  }
  return std::nullopt;
}

const char* VersionTagName(VersionTag v) {
  switch (v) {
    case VersionTag::kV1:
      return "V1";
    case VersionTag::kV2:
      return "V2";
    case VersionTag::kCustom:
      return "custom";
  }
  return "?";
}

std::optional<VersionTag> ParseVersionTag(std::string_view name) {
  for (VersionTag v : {VersionTag::kV1, VersionTag::kV2, VersionTag::kCustom}) {
    if (name == VersionTagName(v)) return v;
  }
  return std::nullopt;
}

ManifestStats ComputeStats(const std::vector<ManifestEntry>& entries) {
  ManifestStats s;
  std::set<std::string> patients;
  for (const ManifestEntry& e : entries) {
    if (e.excluded) continue;
    patients.insert(e.patient_id);
    ++s.n_images;
    s.n_nodules += e.n_nodules;
  }
  s.n_patients = static_cast<int64_t>(patients.size());
  return s;
}

bool DetectDoppler(const RasterImage& image, const DopplerParams& params) {
  if (image.channels != 3) return false;
  const size_t pixels = static_cast<size_t>(image.width) * image.height;
  if (pixels == 0 || image.samples.size() < 3 * pixels) return false;
  size_t chromatic = 0;
  const uint8_t* s = image.samples.data();
  for (size_t i = 0; i < pixels; ++i, s += 3) {
    const int hi = std::max({s[0], s[1], s[2]});
    const int lo = std::min({s[0], s[1], s[2]});
    if (hi - lo > params.chroma_threshold) ++chromatic;
  }
  return static_cast<double>(chromatic) >
         params.fraction_threshold * static_cast<double>(pixels);
}

DatasetManifest BuildManifest(
    const AnnotationSet& annotations,
    const std::map<std::string, ImageMeta>& image_meta) {
  DatasetManifest m;
  std::set<std::string> seen;
  m.entries.reserve(annotations.records.size());
  for (const AnnotationRecord& r : annotations.records) {
    if (!seen.insert(r.image_ref).second) {
      throw Error(ErrorCode::kDuplicateImageRef, r.image_ref);
    }
    ManifestEntry e;
    e.image_ref = r.image_ref;
    e.patient_id = r.patient_id;
    e.n_nodules = static_cast<int>(r.nodules.size());
    if (r.doppler) {
      e.doppler = *r.doppler;
    } else if (auto it = image_meta.find(r.image_ref); it != image_meta.end()) {
      e.doppler = it->second.doppler;
    }
    e.excluded = r.excluded;
    m.entries.push_back(std::move(e));
  }
  SortEntries(m.entries);
  m.stats = ComputeStats(m.entries);
  return m;
}

std::vector<std::string> ApplyExclusions(
    DatasetManifest& manifest,
    const std::map<std::string, std::string>& exclusions) {
  std::vector<std::string> unknown;
  for (const auto& [ref, reason] : exclusions) {
    auto it = std::lower_bound(
        manifest.entries.begin(), manifest.entries.end(), ref,
        [](const ManifestEntry& e, const std::string& r) {
          return e.image_ref < r;
        });
    if (it == manifest.entries.end() || it->image_ref != ref) {
      unknown.push_back(ref);
      continue;
    }
    it->excluded = reason;
    it->split.reset();
  }
  manifest.stats = ComputeStats(manifest.entries);
  return unknown;
}

DatasetManifest FilterVariant(const DatasetManifest& manifest,
                              VersionTag variant) {
  DatasetManifest out;
  out.seed = manifest.seed;
  out.passthrough = manifest.passthrough;
  out.version_tag = variant;
  for (const ManifestEntry& e : manifest.entries) {
    if (e.excluded) continue;
    if (variant == VersionTag::kV2 && e.doppler) continue;
    out.entries.push_back(e);
  }
  out.stats = ComputeStats(out.entries);
  return out;
}

void ValidateSplitConfig(const SplitConfig& cfg) {
  double sum = 0.0;
  for (size_t i = 0; i < cfg.ratios.size(); ++i) {
    const double r = cfg.ratios[i];
    if (!(r > 0.0 && r < 1.0)) {
      throw Error(ErrorCode::kInvalidConfig,
                  std::string(BucketName(kAllBuckets[i])) +
                      " ratio must be in (0, 1), got " + std::to_string(r));
    }
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidConfig,
                "split ratios must sum to 1, got sum " + std::to_string(sum));
  }
}

DatasetManifest AssignSplits(const DatasetManifest& manifest,
                             const SplitConfig& cfg, bool force) {
  ValidateSplitConfig(cfg);
  DatasetManifest out = manifest;
  out.seed = cfg.seed;

  std::map<std::string, int64_t> images_per_patient;
  int64_t total = 0;
  for (ManifestEntry& e : out.entries) {
    if (e.split && !e.excluded && !force) {
      throw Error(ErrorCode::kAlreadySplit,
                  e.image_ref + " already has a split; pass force to redo");
    }
    e.split.reset();
    if (e.excluded) continue;
    ++images_per_patient[e.patient_id];
    ++total;
  }
  const size_t n_buckets = kAllBuckets.size();
  if (images_per_patient.size() < n_buckets) {
    throw Error(ErrorCode::kTooFewPatients,
                std::to_string(images_per_patient.size()) +
                    " patients for " + std::to_string(n_buckets) + " buckets");
  }

  // Sorted order first, so the shuffle depends only on the patient set.
  std::vector<std::string> patients;
  patients.reserve(images_per_patient.size());
  for (const auto& [id, count] : images_per_patient) patients.push_back(id);
  Rng rng(cfg.seed);
  rng.Shuffle(patients);

  std::array<double, 3> cumulative_target{};
  double acc = 0.0;
  for (size_t b = 0; b < n_buckets; ++b) {
    acc += cfg.ratios[b];
    cumulative_target[b] = acc * static_cast<double>(total);
  }

  std::unordered_map<std::string, Bucket> assignment;
  size_t bucket = 0;
  int64_t running = 0;
  for (size_t i = 0; i < patients.size(); ++i) {
    // Leave at least one patient for every bucket still to come.
    const size_t left = patients.size() - i;
    while (bucket + 1 < n_buckets && left <= n_buckets - 1 - bucket) ++bucket;
    assignment[patients[i]] = kAllBuckets[bucket];
    running += images_per_patient[patients[i]];
    // The patient that reaches the target stays in the earlier bucket.
    if (bucket + 1 < n_buckets &&
        static_cast<double>(running) >= cumulative_target[bucket] - 1e-9) {
      ++bucket;
    }
  }
  for (ManifestEntry& e : out.entries) {
    if (!e.excluded) e.split = assignment.at(e.patient_id);
  }
  return out;
}

std::string ManifestToJson(const DatasetManifest& m) {
  OrderedJson doc;
  doc["schema"] = kManifestSchema;
  doc["version_tag"] = VersionTagName(m.version_tag);
  doc["seed"] = m.seed;
  doc["stats"] = {{"n_patients", m.stats.n_patients},
                  {"n_images", m.stats.n_images},
                  {"n_nodules", m.stats.n_nodules}};
  OrderedJson entries = OrderedJson::array();
  for (const ManifestEntry& e : m.entries) {
    OrderedJson j;
    j["image_ref"] = e.image_ref;
    j["patient_id"] = e.patient_id;
    j["n_nodules"] = e.n_nodules;
    j["doppler"] = e.doppler;
    if (e.excluded) j["excluded"] = *e.excluded;
    if (e.split) j["split"] = BucketName(*e.split);
    entries.push_back(std::move(j));
  }
  doc["entries"] = std::move(entries);
  if (!m.passthrough.empty()) {
    doc["passthrough"] = OrderedJson::parse(m.passthrough);
  }
  return doc.dump(2) + "\n";
}

DatasetManifest ParseManifest(std::string_view json_text) {
  const Json doc = json_util::ParseDocument(json_text);
  try {
    json_util::ExpectSchema(doc, kManifestSchema);
    DatasetManifest m;
    const std::string tag = json_util::AsString(
        json_util::Field(doc, "", "version_tag"), "/version_tag");
    auto version = ParseVersionTag(tag);
    if (!version) json_util::Violation("/version_tag", "unknown tag " + tag);
    m.version_tag = *version;
    m.seed = json_util::AsUint64(json_util::Field(doc, "", "seed"), "/seed");

    const Json& entries = json_util::AsArray(
        json_util::Field(doc, "", "entries"), "/entries");
    for (size_t i = 0; i < entries.size(); ++i) {
      const std::string path = "/entries/" + std::to_string(i);
      const Json& j = entries[i];
      ManifestEntry e;
      e.image_ref = json_util::AsString(json_util::Field(j, path, "image_ref"),
                                        path + "/image_ref");
      e.patient_id = json_util::AsString(
          json_util::Field(j, path, "patient_id"), path + "/patient_id");
      e.n_nodules = static_cast<int>(
          json_util::AsInteger(json_util::Field(j, path, "n_nodules"),
                               path + "/n_nodules", 0, 1 << 20));
      e.doppler = json_util::AsBool(json_util::Field(j, path, "doppler"),
                                    path + "/doppler");
      if (const Json* v = json_util::OptionalField(j, "excluded")) {
        e.excluded = json_util::AsString(*v, path + "/excluded");
      }
      if (const Json* v = json_util::OptionalField(j, "split")) {
        const std::string name = json_util::AsString(*v, path + "/split");
        e.split = ParseBucket(name);
        if (!e.split) json_util::Violation(path + "/split", "unknown bucket " + name);
      }
      if (!m.entries.empty() && !(m.entries.back().image_ref < e.image_ref)) {
        if (m.entries.back().image_ref == e.image_ref) {
          throw Error(ErrorCode::kDuplicateImageRef, path + ": " + e.image_ref);
        }
        json_util::Violation(path, "entries not sorted by image_ref");
      }
      if (m.version_tag == VersionTag::kV2 && e.doppler) {
        json_util::Violation(path, "doppler entry in a V2 manifest");
      }
      m.entries.push_back(std::move(e));
    }
    CheckSplitConsistency(m);

    const Json& stats = json_util::Field(doc, "", "stats");
    m.stats = ComputeStats(m.entries);
    const ManifestStats declared{
        json_util::AsInteger(json_util::Field(stats, "/stats", "n_patients"),
                             "/stats/n_patients", 0, INT64_MAX),
        json_util::AsInteger(json_util::Field(stats, "/stats", "n_images"),
                             "/stats/n_images", 0, INT64_MAX),
        json_util::AsInteger(json_util::Field(stats, "/stats", "n_nodules"),
                             "/stats/n_nodules", 0, INT64_MAX)};
    if (!(declared == m.stats)) {
      json_util::Violation("/stats", "declared counts differ from entries");
    }
    if (const Json* p = json_util::OptionalField(doc, "passthrough")) {
      m.passthrough = p->dump();
    }
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, e.what());
  }
}

}  // namespace nodulekit
