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

// Dataset manifest ("nodule-manifest/1"), doppler variants and patient-level
// train/val/test assignment.
#ifndef NODULEKIT_MANIFEST_H_
#define NODULEKIT_MANIFEST_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nodulekit/annotations.h"
#include "nodulekit/image.h"

namespace nodulekit {

inline constexpr char kManifestSchema[] = "nodule-manifest/1";

enum class Bucket { kTrain = 0, kVal = 1, kTest = 2 };
inline constexpr std::array<Bucket, 3> kAllBuckets = {
    Bucket::kTrain, Bucket::kVal, Bucket::kTest};

const char* BucketName(Bucket b);
std::optional<Bucket> ParseBucket(std::string_view name);

enum class VersionTag { kV1, kV2, kCustom };

const char* VersionTagName(VersionTag v);
std::optional<VersionTag> ParseVersionTag(std::string_view name);

struct ManifestEntry {
  std::string image_ref;
  std::string patient_id;
  int n_nodules = 0;
  bool doppler = false;
  std::optional<std::string> excluded;
  std::optional<Bucket> split;

  bool operator==(const ManifestEntry&) const = default;
};

struct ManifestStats {
  int64_t n_patients = 0;
  int64_t n_images = 0;
  int64_t n_nodules = 0;

  bool operator==(const ManifestStats&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;  // sorted by image_ref
  VersionTag version_tag = VersionTag::kCustom;
  uint64_t seed = 0;
  ManifestStats stats;
  // Opaque training-hyperparameter block carried through unmodified (compact
  // JSON text; empty when absent).
  std::string passthrough;

  bool operator==(const DatasetManifest&) const = default;
};

// Counts over non-excluded entries.
ManifestStats ComputeStats(const std::vector<ManifestEntry>& entries);

struct DopplerParams {
  int chroma_threshold = 20;         // max(R,G,B) - min(R,G,B) must exceed
  double fraction_threshold = 0.005;  // share of chromatic pixels must exceed
};

// Color-flow overlay heuristic. Grayscale images are never doppler.
bool DetectDoppler(const RasterImage& image, const DopplerParams& params = {});

struct ImageMeta {
  ImageDims dims;
  bool doppler = false;  // heuristic result on the decoded image
};

// One entry per annotation record. The doppler flag comes from the record
// when present, otherwise from `image_meta`, otherwise false.
DatasetManifest BuildManifest(const AnnotationSet& annotations,
                              const std::map<std::string, ImageMeta>& image_meta);

// Marks entries listed in `exclusions` (image_ref -> reason). Unknown refs are
// returned; nothing is removed.
std::vector<std::string> ApplyExclusions(
    DatasetManifest& manifest,
    const std::map<std::string, std::string>& exclusions);

// V1: every non-excluded entry. V2: V1 without doppler entries.
DatasetManifest FilterVariant(const DatasetManifest& manifest,
                              VersionTag variant);

struct SplitConfig {
  std::array<double, 3> ratios = {0.80, 0.15, 0.05};
  uint64_t seed = 0;
};

// Throws kInvalidConfig naming the offending ratio or sum.
void ValidateSplitConfig(const SplitConfig& cfg);

// Shuffles patients with a seeded PRNG and fills train, val, test in turn;
// a bucket closes once the running image count reaches its cumulative share
// of all images. Every image inherits its patient's bucket.
DatasetManifest AssignSplits(const DatasetManifest& manifest,
                             const SplitConfig& cfg, bool force = false);

std::string ManifestToJson(const DatasetManifest& manifest);
DatasetManifest ParseManifest(std::string_view json_text);

}  // namespace nodulekit

#endif  // NODULEKIT_MANIFEST_H_
