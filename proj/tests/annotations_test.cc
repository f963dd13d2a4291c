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

#include <gtest/gtest.h>

#include <string>

#include "nodulekit/error.h"
#include "nodulekit/random.h"
#include "test_util.h"

namespace nodulekit {
namespace {

constexpr char kSingle[] = R"({
  "schema": "nodule-annotations/1",
  "records": [
    {"image": "P001_0.png", "patient_id": "P001", "width": 640,
     "height": 480, "platform_id": 77,
     "nodules": [
       {"polygon": [[10, 20], [60, 20], [60, 70], [10, 70]],
        "tirads": "TR3", "attrs": {"shape": "oval"}, "reviewer": "A"}]}
  ]
})";

Error ErrorOf(const std::string& json) {
  try {
    ParseAnnotations(json);
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "no error thrown";
  return Error(ErrorCode::kIoFailure, "");
}

std::string WithRecords(const std::string& records) {
  return R"({"schema": "nodule-annotations/1", "records": )" + records + "}";
}

TEST(ParseAnnotationsTest, SingleRecordFieldByField) {
  const AnnotationSet set = ParseAnnotations(kSingle);
  ASSERT_EQ(set.records.size(), 1u);
  EXPECT_EQ(set.label_schema_version, "nodule-annotations/1");
  const AnnotationRecord& r = set.records[0];
  EXPECT_EQ(r.image_ref, "P001_0.png");
  EXPECT_EQ(r.patient_id, "P001");
  EXPECT_EQ(r.image_width, 640);
  EXPECT_EQ(r.image_height, 480);
  EXPECT_FALSE(r.no_finding);
  EXPECT_FALSE(r.excluded.has_value());
  ASSERT_EQ(r.nodules.size(), 1u);
  const NodulePolygon& n = r.nodules[0];
  EXPECT_EQ(n.vertices, (std::vector<Point2D>{{10, 20}, {60, 20}, {60, 70},
                                              {10, 70}}));
  EXPECT_EQ(n.tirads, Tirads::kTR3);
  EXPECT_EQ(n.class_id, 0);
  EXPECT_EQ(n.shape_attrs.at("shape"), "oval");
  EXPECT_EQ(r.source_meta.at("platform_id"), "77");
  EXPECT_EQ(r.source_meta.at("nodules[0].reviewer"), "\"A\"");
  EXPECT_EQ(set.NoduleCount(), 1);
  EXPECT_EQ(set.Find("P001_0.png"), &set.records[0]);
  EXPECT_EQ(set.Find("nope"), nullptr);
}

TEST(ParseAnnotationsTest, UnknownTiradsPreserved) {
  const AnnotationSet set = ParseAnnotations(WithRecords(R"([
    {"image": "a.png", "patient_id": "p", "width": 10, "height": 10,
     "nodules": [{"polygon": [[0,0],[5,0],[0,5]], "tirads": "TR4b"}]}])"));
  EXPECT_FALSE(set.records[0].nodules[0].tirads.has_value());
  EXPECT_EQ(set.records[0].source_meta.at("nodules[0].tirads"), "\"TR4b\"");
  // Re-emitted as-is.
  EXPECT_EQ(ParseAnnotations(AnnotationsToJson(set)), set);
}

TEST(ParseAnnotationsTest, TwoPointPolygonViolationNamesPath) {
  const Error e = ErrorOf(WithRecords(R"([
    {"image": "a.png", "patient_id": "p", "width": 10, "height": 10,
     "nodules": [{"polygon": [[0,0],[5,5],[0,5]]},
                 {"polygon": [[0,0],[5,5]]}]}])"));
  EXPECT_EQ(e.code(), ErrorCode::kSchemaViolation);
  EXPECT_NE(std::string(e.what()).find("/records/0/nodules/1/polygon"),
            std::string::npos)
      << e.what();
}

TEST(ParseAnnotationsTest, EmptyRecordsIsEmptyExport) {
  EXPECT_EQ(ErrorOf(WithRecords("[]")).code(), ErrorCode::kEmptyExport);
}

TEST(ParseAnnotationsTest, MalformedJson) {
  EXPECT_EQ(ErrorOf("{\"schema\": ").code(), ErrorCode::kMalformedJson);
  EXPECT_EQ(ErrorOf("").code(), ErrorCode::kMalformedJson);
}

TEST(ParseAnnotationsTest, SchemaViolationsCarryPaths) {
  struct Case {
    std::string json;
    std::string path;
  };
  const std::vector<Case> cases = {
      {R"({"records": []})", "/schema"},
      {R"({"schema": "other/1", "records": []})", "/schema"},
      {R"({"schema": "nodule-annotations/1"})", "/records"},
      {WithRecords(R"([{"patient_id": "p", "width": 1, "height": 1,
                        "nodules": []}])"),
       "/records/0/image"},
      {WithRecords(R"([{"image": "a", "patient_id": "p", "width": 0,
                        "height": 1, "no_finding": true, "nodules": []}])"),
       "/records/0/width"},
      {WithRecords(R"([{"image": "a", "patient_id": "p", "width": 4,
                        "height": "4", "no_finding": true, "nodules": []}])"),
       "/records/0/height"},
      {WithRecords(R"([{"image": "a", "patient_id": "p", "width": 4,
                        "height": 4, "nodules": []}])"),
       "/records/0/nodules"},
      {WithRecords(R"([{"image": "a", "patient_id": "p", "width": 4,
                        "height": 4, "nodules": [{"polygon":
                        [[0,0],[1,"x"],[0,1]]}]}])"),
       "/records/0/nodules/0/polygon/1/1"},
      {WithRecords(R"([{"image": "a", "patient_id": "p", "width": 4,
                        "height": 4, "nodules": [{"polygon":
                        [[0,0],[1,1],[2,2]]}]}])"),
       "/records/0/nodules/0/polygon"},
      {WithRecords(R"([{"image": "a", "patient_id": "p", "width": 4,
                        "height": 4, "no_finding": "yes", "nodules": []}])"),
       "/records/0/no_finding"},
  };
  for (const Case& c : cases) {
    const Error e = ErrorOf(c.json);
    EXPECT_EQ(e.code(), ErrorCode::kSchemaViolation) << c.json;
    EXPECT_NE(std::string(e.what()).find(c.path), std::string::npos)
        << e.what() << " lacks " << c.path;
  }
}

TEST(ParseAnnotationsTest, DuplicateImageRef) {
  const Error e = ErrorOf(WithRecords(R"([
    {"image": "a.png", "patient_id": "p", "width": 4, "height": 4,
     "no_finding": true, "nodules": []},
    {"image": "a.png", "patient_id": "q", "width": 4, "height": 4,
     "no_finding": true, "nodules": []}])"));
  EXPECT_EQ(e.code(), ErrorCode::kDuplicateImageRef);
}

TEST(ParseAnnotationsTest, NoFindingAndExcludedRecords) {
  const AnnotationSet set = ParseAnnotations(WithRecords(R"([
    {"image": "a.png", "patient_id": "p", "width": 4, "height": 4,
     "no_finding": true, "excluded": "artifact", "doppler": true,
     "nodules": []}])"));
  EXPECT_TRUE(set.records[0].no_finding);
  EXPECT_EQ(set.records[0].excluded, "artifact");
  EXPECT_EQ(set.records[0].doppler, true);
  EXPECT_EQ(set.NoduleCount(), 0);
}

AnnotationSet RandomSet(Rng& rng, int n_records) {
  AnnotationSet set;
  for (int i = 0; i < n_records; ++i) {
    const int w = rng.IntIn(32, 800), h = rng.IntIn(32, 600);
    std::vector<NodulePolygon> nodules;
    const int k = rng.IntIn(0, 4);
    for (int j = 0; j < k; ++j) {
      NodulePolygon p = testing::RandomStarPolygon(
          rng, rng.Uniform(10, w - 10), rng.Uniform(10, h - 10), 2, 9,
          rng.IntIn(3, 30));
      if (rng.Bernoulli(0.5)) p.tirads = static_cast<Tirads>(rng.IntIn(1, 5));
      if (rng.Bernoulli(0.3)) p.shape_attrs["margin"] = "smooth";
      nodules.push_back(std::move(p));
    }
    AnnotationRecord r = testing::Record("IMG" + std::to_string(i) + ".png",
                                         "P" + std::to_string(i / 3), w, h,
                                         std::move(nodules));
    if (rng.Bernoulli(0.1)) r.excluded = "blurred";
    if (rng.Bernoulli(0.2)) r.doppler = rng.Bernoulli(0.5);
    if (rng.Bernoulli(0.2)) r.source_meta["vendor"] = "{\"id\":3}";
    set.records.push_back(std::move(r));
  }
  return set;
}

TEST(RoundTripTest, EmitParseIsFixpoint) {
  Rng rng(21);
  for (int t = 0; t < 30; ++t) {
    const AnnotationSet set = RandomSet(rng, rng.IntIn(1, 20));
    const std::string text = AnnotationsToJson(set);
    const AnnotationSet parsed = ParseAnnotations(text);
    EXPECT_EQ(parsed, set);
    EXPECT_EQ(AnnotationsToJson(parsed), text);
  }
  const AnnotationSet single = ParseAnnotations(kSingle);
  EXPECT_EQ(ParseAnnotations(AnnotationsToJson(single)), single);
}

TEST(RoundTripTest, CountConservation) {
  Rng rng(22);
  for (int t = 0; t < 20; ++t) {
    const AnnotationSet set = RandomSet(rng, rng.IntIn(1, 30));
    const std::string text = AnnotationsToJson(set);
    // Count polygon entries in the source text independently.
    int64_t polygons = 0;
    for (size_t pos = text.find("\"polygon\""); pos != std::string::npos;
         pos = text.find("\"polygon\"", pos + 1)) {
      ++polygons;
    }
    EXPECT_EQ(ParseAnnotations(text).NoduleCount(), polygons);
  }
}

TEST(ValidateTest, MatchingSetIsClean) {
  AnnotationSet set;
  set.records.push_back(
      testing::Record("a.png", "p", 20, 10, {testing::Rect(1, 1, 5, 5)}));
  const ValidationResult res =
      ValidateAgainstImages(set, {{"a.png", {20, 10, 1}}});
  EXPECT_TRUE(res.report.clean());
  EXPECT_EQ(res.annotations, set);
}

TEST(ValidateTest, Categories) {
  AnnotationSet set;
  set.records.push_back(
      testing::Record("x.png", "p", 20, 10, {testing::Rect(1, 1, 5, 5)}));
  set.records.push_back(
      testing::Record("b.png", "p", 20, 10, {testing::Rect(1, 1, 5, 5)}));
  const ValidationResult res = ValidateAgainstImages(
      set, {{"b.png", {30, 10, 1}}, {"c.png", {8, 8, 1}}});
  ASSERT_EQ(res.report.issues.size(), 3u);
  EXPECT_EQ(res.report.issues[0].kind, ValidationIssue::Kind::kMissingImage);
  EXPECT_EQ(res.report.issues[0].image_ref, "x.png");
  EXPECT_EQ(res.report.issues[1].kind,
            ValidationIssue::Kind::kDimensionMismatch);
  EXPECT_EQ(res.report.issues[2].kind,
            ValidationIssue::Kind::kUnannotatedImage);
  EXPECT_EQ(res.report.issues[2].image_ref, "c.png");
  // Flagged records are kept.
  EXPECT_EQ(res.annotations.records.size(), 2u);
  EXPECT_STREQ(ValidationKindName(ValidationIssue::Kind::kOutOfBounds),
               "out_of_bounds");
}

TEST(ValidateTest, ToleranceBandClipsOrFlags) {
  AnnotationSet set;
  set.records.push_back(testing::Record(
      "a.png", "p", 20, 10,
      {testing::Poly({{1, 1}, {20.4, 1}, {20.4, 5}}),
       testing::Poly({{-0.5, -0.5}, {5, 0}, {5, 5}}),
       testing::Poly({{1, 1}, {30, 1}, {30, 5}})}));
  const ValidationResult res =
      ValidateAgainstImages(set, {{"a.png", {20, 10, 1}}});
  const auto& nodules = res.annotations.records[0].nodules;
  EXPECT_EQ(nodules[0].vertices[1].x, 20.0);
  EXPECT_EQ(nodules[0].vertices[2].x, 20.0);
  EXPECT_EQ(nodules[1].vertices[0], (Point2D{0, 0}));
  ASSERT_EQ(res.report.issues.size(), 2u);
  for (const auto& issue : res.report.issues) {
    EXPECT_EQ(issue.kind, ValidationIssue::Kind::kOutOfBounds);
    EXPECT_EQ(issue.nodule, 2);
  }
  EXPECT_EQ(res.report.issues[0].vertex, 1);
  EXPECT_EQ(res.report.issues[1].vertex, 2);
  // Violating vertices are left untouched.
  EXPECT_EQ(nodules[2].vertices[1].x, 30.0);
}

TEST(FuzzTest, RandomBytesAndMutationsGiveStructuredErrors) {
  Rng rng(23);
  const std::string base = kSingle;
  const std::string alphabet = "{}[]\",:0123456789.-eE truefalsnul\\";
  for (int t = 0; t < 3000; ++t) {
    std::string text;
    if (t % 3 == 0) {
      text.resize(rng.Below(200));
      for (char& c : text) c = static_cast<char>(rng.Next());
    } else if (t % 3 == 1) {
      text.resize(rng.Below(200));
      for (char& c : text) c = alphabet[rng.Below(alphabet.size())];
    } else {
      text = base;
      const int edits = rng.IntIn(1, 6);
      for (int k = 0; k < edits; ++k) {
        text[rng.Below(text.size())] = alphabet[rng.Below(alphabet.size())];
      }
    }
    try {
      ParseAnnotations(text);
    } catch (const Error&) {
    }
  }
}

}  // namespace
}  // namespace nodulekit
