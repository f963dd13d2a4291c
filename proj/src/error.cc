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

#include "nodulekit/error.h"

namespace nodulekit {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegeneratePolygon: return "DegeneratePolygon";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotDicom: return "NotDicom";
    case ErrorCode::kUnsupportedTransferSyntax: return "UnsupportedTransferSyntax";
    case ErrorCode::kMissingRequiredTag: return "MissingRequiredTag";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kMalformedDicom: return "MalformedDicom";
    case ErrorCode::kUnsupportedBitDepth: return "UnsupportedBitDepth";
    case ErrorCode::kUnsupportedPixelFormat: return "UnsupportedPixelFormat";
    case ErrorCode::kPixelDataTooShort: return "PixelDataTooShort";
    case ErrorCode::kMalformedPng: return "MalformedPng";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kMalformedJson: return "MalformedJson";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kEmptyExport: return "EmptyExport";
    case ErrorCode::kDuplicateImageRef: return "DuplicateImageRef";
    case ErrorCode::kTooFewPatients: return "TooFewPatients";
    case ErrorCode::kAlreadySplit: return "AlreadySplit";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kUnsplitManifest: return "UnsplitManifest";
    case ErrorCode::kNoNodules: return "NoNodules";
    case ErrorCode::kMalformedLabel: return "MalformedLabel";
    case ErrorCode::kNoGroundTruth: return "NoGroundTruth";
    case ErrorCode::kUnknownImageRef: return "UnknownImageRef";
    case ErrorCode::kSplitMismatch: return "SplitMismatch";
    case ErrorCode::kNoRoomForSpurious: return "NoRoomForSpurious";
  }
  return "Unknown";
}

}  // namespace nodulekit
