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

// Evaluation report renderers: a one-row CSV in the published table's column
// order, full-fidelity JSON, and an SVG precision-recall plot.
#ifndef NODULEKIT_REPORT_H_
#define NODULEKIT_REPORT_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "nodulekit/eval.h"

namespace nodulekit {

inline constexpr char kReportSchema[] = "nodule-report/1";

enum class ReportFormat { kCsv, kJson, kSvg };
std::optional<ReportFormat> ParseReportFormat(std::string_view name);
const char* ReportFormatExtension(ReportFormat format);

// Header line plus one row: model, dataset, dice_pixel, dice_instance,
// map50_mask, map50_box, precision_mask, precision_box, recall_mask,
// recall_box. Metrics are printed with three decimals.
std::string ReportCsv(const EvalReport& report);

std::string ReportJson(const EvalReport& report);
EvalReport ParseReportJson(std::string_view json_text);

// Both PR curves in one plot. Each curve is a <polyline> whose points
// attribute lists the (recall, precision) pairs verbatim in shortest
// round-trip form; a transform maps them to the plot area. The operating
// point (all detections at or above the score floor) is marked per curve.
std::string ReportSvg(const EvalReport& report);

std::string RenderReport(const EvalReport& report, ReportFormat format);

// report_<dataset>_<bucket>_seed<seed>.<ext>
std::string ReportFileName(const ReportMeta& meta, ReportFormat format);

// Atomic write. Throws kIoFailure.
void WriteReport(const EvalReport& report, ReportFormat format,
                 const std::filesystem::path& path);

}  // namespace nodulekit

#endif  // NODULEKIT_REPORT_H_
