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

// nodulekit: dataset preparation and evaluation from the command line.
//
// Every subcommand prints a JSON run summary on stdout. Exit status: 0 ok,
// 1 usage or configuration error, 2 data error, 3 I/O failure.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nodulekit/annotations.h"
#include "nodulekit/dicom.h"
#include "nodulekit/error.h"
#include "nodulekit/eval.h"
#include "nodulekit/export.h"
#include "nodulekit/fsutil.h"
#include "nodulekit/image.h"
#include "nodulekit/manifest.h"
#include "nodulekit/parallel.h"
#include "nodulekit/report.h"
#include "nodulekit/synth.h"

#ifndef NODULEKIT_VERSION
#define NODULEKIT_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using OrderedJson = nlohmann::ordered_json;

namespace nodulekit {
namespace {

constexpr char kImageMetaSchema[] = "nodule-image-meta/1";
constexpr char kPlantedSchema[] = "nodule-planted/1";

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitIo = 3 };

// Collects inputs, outputs and results for the run summary.
struct RunSummary {
  std::string command;
  std::optional<uint64_t> seed;
  OrderedJson inputs = OrderedJson::object();
  OrderedJson outputs = OrderedJson::array();
  OrderedJson result = OrderedJson::object();

  void Input(const fs::path& path, std::string_view bytes) {
    inputs[path.string()] = Sha256Hex(bytes);
  }
  void Output(const fs::path& path) { outputs.push_back(path.string()); }
};

// Reads a file and records its digest.
std::string ReadInput(RunSummary& run, const fs::path& path) {
  std::string text = ReadFileText(path);
  run.Input(path, text);
  return text;
}

// Rethrows library errors with the offending file in the message.
template <typename Fn>
auto InFile(const fs::path& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void WriteText(RunSummary& run, const fs::path& path, std::string_view text) {
  WriteFileAtomic(path, text);
  run.Output(path);
}

AnnotationSet LoadAnnotations(RunSummary& run, const fs::path& path) {
  const std::string text = ReadInput(run, path);
  return InFile(path, [&] { return ParseAnnotations(text); });
}

DatasetManifest LoadManifest(RunSummary& run, const fs::path& path) {
  const std::string text = ReadInput(run, path);
  return InFile(path, [&] { return ParseManifest(text); });
}

std::map<std::string, ImageMeta> LoadImageMeta(RunSummary& run,
                                               const fs::path& path) {
  const std::string text = ReadInput(run, path);
  return InFile(path, [&] {
    const auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
      throw Error(ErrorCode::kMalformedJson, "document is not valid JSON");
    }
    if (!doc.is_object() || doc.value("schema", "") != kImageMetaSchema ||
        !doc.contains("images") || !doc["images"].is_array()) {
      throw Error(ErrorCode::kSchemaViolation,
                  std::string("expected a ") + kImageMetaSchema + " document");
    }
    std::map<std::string, ImageMeta> meta;
    for (const auto& im : doc["images"]) {
      try {
        ImageMeta m;
        m.dims.width = im.at("width").get<int>();
        m.dims.height = im.at("height").get<int>();
        m.dims.channels = im.at("channels").get<int>();
        m.doppler = im.at("doppler").get<bool>();
        meta[im.at("image").get<std::string>()] = m;
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kSchemaViolation, e.what());
      }
    }
    return meta;
  });
}

// {"<image>": "<reason>", ...}
std::map<std::string, std::string> LoadExclusions(RunSummary& run,
                                                  const fs::path& path) {
  const std::string text = ReadInput(run, path);
  return InFile(path, [&] {
    const auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
      throw Error(ErrorCode::kMalformedJson, "document is not valid JSON");
    }
    if (!doc.is_object()) {
      throw Error(ErrorCode::kSchemaViolation,
                  "exclusions must map image to reason");
    }
    std::map<std::string, std::string> out;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (!it.value().is_string()) {
        throw Error(ErrorCode::kSchemaViolation,
                    "/" + it.key() + ": expected reason string");
      }
      out[it.key()] = it.value().get<std::string>();
    }
    return out;
  });
}

std::string LoadPassthrough(RunSummary& run, const fs::path& path) {
  const std::string text = ReadInput(run, path);
  const auto doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::kMalformedJson, path.string() + ": not valid JSON");
  }
  return doc.dump();
}

std::string SafeFileComponent(std::string s) {
  for (char& c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                    c == '.' || c == '_';
    if (!ok) c = '_';
  }
  return s;
}

std::vector<fs::path> ListFiles(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end;
       it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    if (!ext.empty() && it->path().extension() != ext) continue;
    files.push_back(it->path());
  }
  if (ec) {
    throw Error(ErrorCode::kIoFailure,
                "cannot list " + dir.string() + ": " + ec.message());
  }
  std::sort(files.begin(), files.end());
  return files;
}

OrderedJson StatsJson(const ManifestStats& s) {
  return {{"n_patients", s.n_patients},
          {"n_images", s.n_images},
          {"n_nodules", s.n_nodules}};
}

IntRange ParseIntRange(const std::string& text) {
  IntRange r;
  const auto comma = text.find(',');
  try {
    r.lo = std::stoi(text.substr(0, comma));
    r.hi = comma == std::string::npos ? r.lo : std::stoi(text.substr(comma + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidConfig,
                "range \"" + text + "\" is not lo,hi");
  }
  return r;
}

// --- subcommands ---------------------------------------------------------

struct IngestArgs {
  fs::path dicom_dir;
  fs::path out;
  fs::path annotations;
  bool hash_patient_ids = false;
};

void RunIngest(const IngestArgs& a, int threads, RunSummary& run) {
  const std::vector<fs::path> files = ListFiles(a.dicom_dir, "");
  if (files.empty()) {
    throw Error(ErrorCode::kIoFailure,
                "no files in " + a.dicom_dir.string());
  }
  auto patient_of = [&](const DicomObject& obj) {
    std::string pid = obj.GetString(tags::kPatientId);
    if (a.hash_patient_ids) pid = Sha256Hex(pid).substr(0, 16);
    return pid;
  };

  std::vector<std::string> pids(files.size());
  std::vector<std::string> digests(files.size());
  ParallelFor(files.size(), threads, [&](size_t i) {
    const std::vector<uint8_t> bytes = ReadFileBytes(files[i]);
    digests[i] = Sha256Hex(bytes);
    pids[i] = InFile(files[i], [&] { return patient_of(ParseDicom(bytes)); });
  });
  std::map<std::string, int> next_index;
  std::vector<std::string> refs(files.size());
  for (size_t i = 0; i < files.size(); ++i) {
    run.inputs[files[i].string()] = digests[i];
    const int k = next_index[pids[i]]++;
    refs[i] = SafeFileComponent(pids[i]) + "_" + std::to_string(k) + ".png";
  }

  std::vector<ImageMeta> metas(files.size());
  ParallelFor(files.size(), threads, [&](size_t i) {
    const std::vector<uint8_t> bytes = ReadFileBytes(files[i]);
    const RasterImage img =
        InFile(files[i], [&] { return DecodeImage(ParseDicom(bytes)); });
    WritePng(img, a.out / "images" / refs[i]);
    metas[i].dims = {img.width, img.height, img.channels};
    metas[i].doppler = DetectDoppler(img);
  });

  OrderedJson images = OrderedJson::array();
  std::map<std::string, ImageMeta> meta_map;
  int64_t n_doppler = 0;
  for (size_t i = 0; i < files.size(); ++i) {
    images.push_back({{"image", refs[i]},
                      {"patient_id", pids[i]},
                      {"source", files[i].filename().string()},
                      {"width", metas[i].dims.width},
                      {"height", metas[i].dims.height},
                      {"channels", metas[i].dims.channels},
                      {"doppler", metas[i].doppler}});
    meta_map[refs[i]] = metas[i];
    n_doppler += metas[i].doppler;
    run.Output(a.out / "images" / refs[i]);
  }
  OrderedJson doc = {{"schema", kImageMetaSchema}, {"images", images}};
  WriteText(run, a.out / "image_meta.json", doc.dump(2) + "\n");
  run.result["images"] = files.size();
  run.result["patients"] = next_index.size();
  run.result["doppler"] = n_doppler;

  if (!a.annotations.empty()) {
    const AnnotationSet set = LoadAnnotations(run, a.annotations);
    const DatasetManifest m =
        InFile(a.annotations, [&] { return BuildManifest(set, meta_map); });
    WriteText(run, a.out / "manifest.json", ManifestToJson(m));
    run.result["stats"] = StatsJson(m.stats);
  }
}

struct ValidateArgs {
  fs::path annotations;
  fs::path images;
  fs::path out;
  bool strict = false;
};

int RunValidate(const ValidateArgs& a, RunSummary& run) {
  const AnnotationSet set = LoadAnnotations(run, a.annotations);
  std::map<std::string, ImageDims> dims;
  for (const fs::path& p : ListFiles(a.images, ".png")) {
    dims[p.filename().string()] = InFile(p, [&] { return ReadPngDims(p); });
  }
  const ValidationResult v = ValidateAgainstImages(set, dims);
  OrderedJson issues = OrderedJson::array();
  for (const ValidationIssue& i : v.report.issues) {
    OrderedJson j = {{"kind", ValidationKindName(i.kind)},
                     {"image", i.image_ref}};
    if (i.nodule >= 0) j["nodule"] = i.nodule;
    if (i.vertex >= 0) j["vertex"] = i.vertex;
    if (!i.detail.empty()) j["detail"] = i.detail;
    issues.push_back(std::move(j));
  }
  run.result["clean"] = v.report.clean();
  run.result["issues"] = std::move(issues);
  if (!a.out.empty()) WriteText(run, a.out, AnnotationsToJson(v.annotations));
  return a.strict && !v.report.clean() ? kExitData : kExitOk;
}

struct VariantArgs {
  fs::path manifest;
  fs::path annotations;
  fs::path image_meta;
  fs::path exclusions;
  fs::path passthrough;
  fs::path out;
  bool keep_doppler = false;
  bool drop_doppler = false;
};

void RunVariant(const VariantArgs& a, RunSummary& run) {
  if (a.keep_doppler == a.drop_doppler) {
    throw Error(ErrorCode::kInvalidConfig,
                "choose exactly one of --keep-doppler (V1) or --drop-doppler (V2)");
  }
  if (a.manifest.empty() == a.annotations.empty()) {
    throw Error(ErrorCode::kInvalidConfig,
                "give either --manifest or --annotations");
  }
  DatasetManifest m;
  if (!a.manifest.empty()) {
    m = LoadManifest(run, a.manifest);
  } else {
    const AnnotationSet set = LoadAnnotations(run, a.annotations);
    std::map<std::string, ImageMeta> meta;
    if (!a.image_meta.empty()) meta = LoadImageMeta(run, a.image_meta);
    m = InFile(a.annotations, [&] { return BuildManifest(set, meta); });
  }
  if (!a.exclusions.empty()) {
    const auto unknown = ApplyExclusions(m, LoadExclusions(run, a.exclusions));
    run.result["unknown_exclusions"] = unknown;
  }
  if (!a.passthrough.empty()) m.passthrough = LoadPassthrough(run, a.passthrough);
  const DatasetManifest v =
      FilterVariant(m, a.keep_doppler ? VersionTag::kV1 : VersionTag::kV2);
  WriteText(run, a.out, ManifestToJson(v));
  run.result["variant"] = VersionTagName(v.version_tag);
  run.result["stats"] = StatsJson(v.stats);
  run.result["source_stats"] = StatsJson(ComputeStats(m.entries));
}

struct SplitArgs {
  fs::path manifest;
  fs::path out;
  std::vector<double> ratios = {0.80, 0.15, 0.05};
  uint64_t seed = 0;
  bool force = false;
};

void RunSplit(const SplitArgs& a, RunSummary& run) {
  if (a.ratios.size() != 3) {
    throw Error(ErrorCode::kInvalidConfig,
                "--ratios needs 3 values (train,val,test), got " +
                    std::to_string(a.ratios.size()));
  }
  SplitConfig cfg;
  std::copy(a.ratios.begin(), a.ratios.end(), cfg.ratios.begin());
  cfg.seed = a.seed;
  ValidateSplitConfig(cfg);
  const DatasetManifest m = LoadManifest(run, a.manifest);
  const DatasetManifest split = AssignSplits(m, cfg, a.force);
  WriteText(run, a.out, ManifestToJson(split));
  run.seed = a.seed;

  std::map<Bucket, int64_t> images;
  std::map<Bucket, std::set<std::string>> patients;
  for (const ManifestEntry& e : split.entries) {
    if (e.excluded || !e.split) continue;
    ++images[*e.split];
    patients[*e.split].insert(e.patient_id);
  }
  for (Bucket b : kAllBuckets) {
    run.result[BucketName(b)] = {
        {"images", images[b]},
        {"patients", patients[b].size()},
        {"share", split.stats.n_images
                      ? static_cast<double>(images[b]) / split.stats.n_images
                      : 0.0}};
  }
}

struct ExportArgs {
  fs::path manifest;
  fs::path annotations;
  fs::path images;
  fs::path out;
  std::vector<std::string> formats = {"yolo", "coco", "masks"};
  std::vector<std::string> buckets = {"train", "val", "test"};
};

void RunExport(const ExportArgs& a, int threads, RunSummary& run) {
  ExportOptions opt;
  opt.out_dir = a.out;
  opt.images_dir = a.images;
  opt.threads = threads;
  opt.formats.clear();
  for (const std::string& f : a.formats) {
    const auto fmt = ParseExportFormat(f);
    if (!fmt) throw Error(ErrorCode::kInvalidConfig, "unknown format " + f);
    opt.formats.push_back(*fmt);
  }
  opt.buckets.clear();
  for (const std::string& b : a.buckets) {
    const auto bucket = ParseBucket(b);
    if (!bucket) throw Error(ErrorCode::kInvalidConfig, "unknown bucket " + b);
    opt.buckets.push_back(*bucket);
  }
  const DatasetManifest m = LoadManifest(run, a.manifest);
  const AnnotationSet set = LoadAnnotations(run, a.annotations);
  const ExportSummary s = ExportDataset(m, set, opt);
  run.Output(a.out);
  run.result = {{"images", s.images},
                {"label_files", s.label_files},
                {"coco_annotations", s.coco_annotations},
                {"mask_files", s.mask_files}};
}

struct SynthArgs {
  fs::path out;
  int patients = 10;
  std::string images_per_patient = "1,3";
  std::string nodules = "1,2";
  std::string width = "256,320";
  std::string height = "192,240";
  double doppler_fraction = 0.0;
  double no_finding_rate = 0.0;
  double speckle = 0.25;
  uint64_t seed = 0;
  bool no_images = false;
};

void RunSynth(const SynthArgs& a, int threads, RunSummary& run) {
  SynthConfig cfg;
  cfg.n_patients = a.patients;
  cfg.images_per_patient = ParseIntRange(a.images_per_patient);
  cfg.nodules_per_image = ParseIntRange(a.nodules);
  cfg.width = ParseIntRange(a.width);
  cfg.height = ParseIntRange(a.height);
  cfg.doppler_fraction = a.doppler_fraction;
  cfg.no_finding_rate = a.no_finding_rate;
  cfg.speckle_sigma = a.speckle;
  cfg.seed = a.seed;
  const SynthDataset ds = Generate(cfg);
  run.seed = a.seed;
  if (!a.no_images) {
    ParallelFor(ds.plans.size(), threads, [&](size_t i) {
      WritePng(RenderImage(ds.plans[i], cfg),
               a.out / "images" / ds.plans[i].image_ref);
    });
    run.Output(a.out / "images");
  }
  WriteText(run, a.out / "annotations.json", AnnotationsToJson(ds.annotations));
  WriteText(run, a.out / "manifest.json", ManifestToJson(ds.manifest));
  int64_t doppler = 0;
  for (const ImagePlan& p : ds.plans) doppler += p.doppler;
  run.result["stats"] = StatsJson(ds.manifest.stats);
  run.result["doppler_images"] = doppler;
}

struct PerturbArgs {
  fs::path gt;
  fs::path out;
  fs::path planted;
  double drop = 0.0;
  double spurious = 0.0;
  double jitter = 0.0;
  uint64_t seed = 0;
};

void RunPerturb(const PerturbArgs& a, RunSummary& run) {
  PerturbConfig cfg;
  cfg.drop_rate = a.drop;
  cfg.spurious_rate = a.spurious;
  cfg.jitter_px = a.jitter;
  cfg.seed = a.seed;
  ValidatePerturbConfig(cfg);
  const AnnotationSet set = LoadAnnotations(run, a.gt);
  const PerturbResult r = InFile(a.gt, [&] { return Perturb(set, cfg); });
  WriteText(run, a.out, PredictionsToJson(r.predictions));
  run.seed = a.seed;
  OrderedJson planted = {{"schema", kPlantedSchema},
                         {"kept", r.planted.kept},
                         {"dropped", r.planted.dropped},
                         {"spurious", r.planted.spurious}};
  if (!a.planted.empty()) WriteText(run, a.planted, planted.dump(2) + "\n");
  planted.erase("schema");
  run.result["planted"] = std::move(planted);
}

struct EvaluateArgs {
  fs::path gt;
  fs::path pred;
  fs::path manifest;
  std::string bucket;
  std::string model_tag = "model";
  double iou = 0.5;
  double score_floor = 0.0;
  std::string interpolation = "101-point";
  fs::path out;
  fs::path out_dir = ".";
};

void RunEvaluate(const EvaluateArgs& a, int threads, RunSummary& run) {
  EvalConfig cfg;
  cfg.iou_threshold = a.iou;
  cfg.score_floor = a.score_floor;
  cfg.threads = threads;
  const auto interp = ParseApInterpolation(a.interpolation);
  if (!interp) {
    throw Error(ErrorCode::kInvalidConfig,
                "unknown interpolation " + a.interpolation);
  }
  cfg.interpolation = *interp;
  ValidateEvalConfig(cfg);

  EvalScope scope;
  scope.model_tag = a.model_tag;
  if (!a.bucket.empty()) {
    scope.bucket = ParseBucket(a.bucket);
    if (!scope.bucket) {
      throw Error(ErrorCode::kInvalidConfig, "unknown bucket " + a.bucket);
    }
    if (a.manifest.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "--bucket needs --manifest");
    }
  }
  std::optional<DatasetManifest> manifest;
  if (!a.manifest.empty()) {
    manifest = LoadManifest(run, a.manifest);
    scope.manifest = &*manifest;
  }
  const AnnotationSet gt = LoadAnnotations(run, a.gt);
  const std::string pred_text = ReadInput(run, a.pred);
  const PredictionSet pred =
      InFile(a.pred, [&] { return ParsePredictions(pred_text); });
  const EvalReport report = InFile(a.pred, [&] {
    return Evaluate(pred, gt, scope, cfg);
  });
  if (manifest) run.seed = manifest->seed;

  const fs::path out = a.out.empty()
                           ? a.out_dir / ReportFileName(report.meta,
                                                        ReportFormat::kJson)
                           : a.out;
  WriteReport(report, ReportFormat::kJson, out);
  run.Output(out);
  run.result = {{"dice_pixel", report.dice_pixel},
                {"dice_instance", report.dice_instance},
                {"map50_mask", report.map50_mask},
                {"map50_box", report.map50_box},
                {"precision_mask", report.precision_mask},
                {"precision_box", report.precision_box},
                {"recall_mask", report.recall_mask},
                {"recall_box", report.recall_box},
                {"mask", {{"tp", report.counts_mask.tp},
                          {"fp", report.counts_mask.fp},
                          {"fn", report.counts_mask.fn}}},
                {"box", {{"tp", report.counts_box.tp},
                         {"fp", report.counts_box.fp},
                         {"fn", report.counts_box.fn}}}};
}

struct ReportArgs {
  fs::path report;
  std::vector<std::string> formats = {"csv"};
  fs::path out;
  fs::path out_dir = ".";
};

void RunReport(const ReportArgs& a, RunSummary& run) {
  const std::string text = ReadInput(run, a.report);
  const EvalReport report =
      InFile(a.report, [&] { return ParseReportJson(text); });
  if (!a.out.empty() && a.formats.size() != 1) {
    throw Error(ErrorCode::kInvalidConfig, "--out needs exactly one --format");
  }
  run.seed = report.meta.seed;
  for (const std::string& f : a.formats) {
    const auto fmt = ParseReportFormat(f);
    if (!fmt) throw Error(ErrorCode::kInvalidConfig, "unknown format " + f);
    const fs::path out =
        a.out.empty() ? a.out_dir / ReportFileName(report.meta, *fmt) : a.out;
    WriteReport(report, *fmt, out);
    run.Output(out);
  }
}

// Effective option values of the subcommand that ran: flags, then config
// file, then defaults.
OrderedJson ResolvedConfig(const CLI::App& sub, int threads) {
  OrderedJson cfg;
  cfg["threads"] = threads;
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames()[0] == "help") continue;
    const std::string& key = opt->get_lnames()[0];
    const std::vector<std::string> values = opt->reduced_results();
    if (values.empty()) {
      cfg[key] = opt->get_default_str();
    } else if (values.size() == 1 && opt->get_expected_max() <= 1) {
      cfg[key] = values[0];
    } else {
      cfg[key] = values;
    }
  }
  return cfg;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig:
      return kExitUsage;
    case ErrorCode::kIoFailure:
      return kExitIo;
    default:
      return kExitData;
  }
}

int Main(int argc, char** argv) {
  CLI::App app{"Thyroid-nodule ultrasound dataset preparation and evaluation"};
  app.set_version_flag("--version", NODULEKIT_VERSION);
  app.set_config("--config", "", "INI/TOML config file; flags override it");
  app.require_subcommand(1);
  int threads = DefaultThreads();
  app.add_option("--threads", threads, "Worker pool size")
      ->check(CLI::Range(1, 1024));

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "DICOM files to PNG + metadata");
  c_ingest->add_option("--dicom-dir", ingest.dicom_dir)->required()
      ->check(CLI::ExistingDirectory);
  c_ingest->add_option("--out", ingest.out)->required();
  c_ingest->add_option("--annotations", ingest.annotations,
                       "Also build manifest.json from these annotations")
      ->check(CLI::ExistingFile);
  c_ingest->add_flag("--hash-patient-ids", ingest.hash_patient_ids,
                     "Replace patient IDs by a SHA-256 prefix");

  ValidateArgs validate;
  auto* c_validate =
      app.add_subcommand("validate", "Cross-check annotations against images");
  c_validate->add_option("--annotations", validate.annotations)->required()
      ->check(CLI::ExistingFile);
  c_validate->add_option("--images", validate.images)->required()
      ->check(CLI::ExistingDirectory);
  c_validate->add_option("--out", validate.out,
                         "Write the tolerance-clipped annotations here");
  c_validate->add_flag("--strict", validate.strict,
                       "Exit 2 when the report is not clean");

  VariantArgs variant;
  auto* c_variant = app.add_subcommand("variant", "Derive the V1 or V2 manifest");
  c_variant->add_option("--manifest", variant.manifest)->check(CLI::ExistingFile);
  c_variant->add_option("--annotations", variant.annotations)
      ->check(CLI::ExistingFile);
  c_variant->add_option("--image-meta", variant.image_meta)
      ->check(CLI::ExistingFile);
  c_variant->add_option("--exclusions", variant.exclusions,
                        "JSON object mapping image to exclusion reason")
      ->check(CLI::ExistingFile);
  c_variant->add_option("--passthrough", variant.passthrough,
                        "Opaque JSON hyperparameter block to carry along")
      ->check(CLI::ExistingFile);
  c_variant->add_flag("--keep-doppler", variant.keep_doppler, "V1");
  c_variant->add_flag("--drop-doppler", variant.drop_doppler, "V2");
  c_variant->add_option("--out", variant.out)->required();

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "Patient-level train/val/test split");
  c_split->add_option("--manifest", split.manifest)->required()
      ->check(CLI::ExistingFile);
  c_split->add_option("--ratios", split.ratios, "train,val,test")
      ->delimiter(',')
      ->capture_default_str();
  c_split->add_option("--seed", split.seed)->capture_default_str();
  c_split->add_flag("--force", split.force, "Re-split a split manifest");
  c_split->add_option("--out", split.out)->required();

  ExportArgs exp;
  auto* c_export = app.add_subcommand("export", "YOLO, COCO and mask artifacts");
  c_export->add_option("--manifest", exp.manifest)->required()
      ->check(CLI::ExistingFile);
  c_export->add_option("--annotations", exp.annotations)->required()
      ->check(CLI::ExistingFile);
  c_export->add_option("--images", exp.images, "Source PNG directory")
      ->check(CLI::ExistingDirectory);
  c_export->add_option("--format", exp.formats, "yolo|coco|masks")
      ->delimiter(',')
      ->capture_default_str();
  c_export->add_option("--bucket", exp.buckets, "train|val|test")
      ->delimiter(',')
      ->capture_default_str();
  c_export->add_option("--out", exp.out)->required();

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  c_synth->add_option("--out", synth.out)->required();
  c_synth->add_option("--patients", synth.patients)->capture_default_str();
  c_synth->add_option("--images-per-patient", synth.images_per_patient, "lo,hi")
      ->capture_default_str();
  c_synth->add_option("--nodules", synth.nodules, "lo,hi per image")
      ->capture_default_str();
  c_synth->add_option("--width", synth.width, "lo,hi")->capture_default_str();
  c_synth->add_option("--height", synth.height, "lo,hi")->capture_default_str();
  c_synth->add_option("--doppler-fraction", synth.doppler_fraction)
      ->capture_default_str();
  c_synth->add_option("--no-finding-rate", synth.no_finding_rate)
      ->capture_default_str();
  c_synth->add_option("--speckle", synth.speckle)->capture_default_str();
  c_synth->add_option("--seed", synth.seed)->capture_default_str();
  c_synth->add_flag("--no-images", synth.no_images,
                    "Write annotations and manifest only");

  PerturbArgs perturb;
  auto* c_perturb =
      app.add_subcommand("perturb", "Predictions with planted errors");
  c_perturb->add_option("--gt", perturb.gt)->required()->check(CLI::ExistingFile);
  c_perturb->add_option("--drop", perturb.drop)->capture_default_str();
  c_perturb->add_option("--spurious", perturb.spurious)->capture_default_str();
  c_perturb->add_option("--jitter", perturb.jitter, "px")->capture_default_str();
  c_perturb->add_option("--seed", perturb.seed)->capture_default_str();
  c_perturb->add_option("--planted", perturb.planted,
                        "Write planted counts here");
  c_perturb->add_option("--out", perturb.out)->required();

  EvaluateArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "Score predictions");
  c_eval->add_option("--gt", eval.gt)->required()->check(CLI::ExistingFile);
  c_eval->add_option("--pred", eval.pred)->required()->check(CLI::ExistingFile);
  c_eval->add_option("--manifest", eval.manifest)->check(CLI::ExistingFile);
  c_eval->add_option("--bucket", eval.bucket, "train|val|test");
  c_eval->add_option("--model-tag", eval.model_tag)->capture_default_str();
  c_eval->add_option("--iou", eval.iou)->capture_default_str();
  c_eval->add_option("--score-floor", eval.score_floor)->capture_default_str();
  c_eval->add_option("--interpolation", eval.interpolation,
                     "101-point|all-point")
      ->capture_default_str();
  c_eval->add_option("--out", eval.out, "Report JSON path");
  c_eval->add_option("--out-dir", eval.out_dir)->capture_default_str();

  ReportArgs rep;
  auto* c_report = app.add_subcommand("report", "Render a report");
  c_report->add_option("--report", rep.report)->required()
      ->check(CLI::ExistingFile);
  c_report->add_option("--format", rep.formats, "csv|json|svg")
      ->delimiter(',')
      ->capture_default_str();
  c_report->add_option("--out", rep.out);
  c_report->add_option("--out-dir", rep.out_dir)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunSummary run;
  int status = kExitOk;
  const CLI::App* active = app.get_subcommands().front();
  try {
    if (c_ingest->parsed()) {
      run.command = "ingest";
      RunIngest(ingest, threads, run);
    } else if (c_validate->parsed()) {
      run.command = "validate";
      status = RunValidate(validate, run);
    } else if (c_variant->parsed()) {
      run.command = "variant";
      RunVariant(variant, run);
    } else if (c_split->parsed()) {
      run.command = "split";
      RunSplit(split, run);
    } else if (c_export->parsed()) {
      run.command = "export";
      RunExport(exp, threads, run);
    } else if (c_synth->parsed()) {
      run.command = "synth";
      RunSynth(synth, threads, run);
    } else if (c_perturb->parsed()) {
      run.command = "perturb";
      RunPerturb(perturb, run);
    } else if (c_eval->parsed()) {
      run.command = "evaluate";
      RunEvaluate(eval, threads, run);
    } else if (c_report->parsed()) {
      run.command = "report";
      RunReport(rep, run);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: IoFailure: " << e.what() << "\n";
    return kExitIo;
  }

  OrderedJson summary;
  summary["tool"] = "nodulekit";
  summary["version"] = NODULEKIT_VERSION;
  summary["command"] = run.command;
  summary["seed"] = run.seed ? OrderedJson(*run.seed) : OrderedJson(nullptr);
  summary["inputs"] = std::move(run.inputs);
  summary["outputs"] = std::move(run.outputs);
  summary["config"] = ResolvedConfig(*active, threads);
  summary["result"] = std::move(run.result);
  std::cout << summary.dump(2) << std::endl;
  return status;
}

}  // namespace
}  // namespace nodulekit

int main(int argc, char** argv) { return nodulekit::Main(argc, argv); }
