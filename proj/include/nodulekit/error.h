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
#ifndef NODULEKIT_ERROR_H_
#define NODULEKIT_ERROR_H_

#include <stdexcept>
#include <string>

namespace nodulekit {

enum class ErrorCode {
  // geometry
  kDegeneratePolygon,
  kEmptyMask,
  kDimensionMismatch,
  // dicom / png
  kNotDicom,
  kUnsupportedTransferSyntax,
  kMissingRequiredTag,
  kTruncatedFile,
  kMalformedDicom,
  kUnsupportedBitDepth,
  kUnsupportedPixelFormat,
  kPixelDataTooShort,
  kMalformedPng,
  kIoFailure,
  // annotations, manifests, predictions
  kMalformedJson,
  kSchemaViolation,
  kEmptyExport,
  kDuplicateImageRef,
  kTooFewPatients,
  kAlreadySplit,
  kInvalidConfig,
  kUnsplitManifest,
  kNoNodules,
  kMalformedLabel,
  // evaluation
  kNoGroundTruth,
  kUnknownImageRef,
  kSplitMismatch,
  // synth
  kNoRoomForSpurious,
};

const char* ErrorCodeName(ErrorCode code);

// All recoverable failures in the library surface as this exception. The
// message carries context (file, JSON path, tag); the code is stable and is
// what callers and tests switch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const { return code_; }
  // The message without the code name prefix.
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace nodulekit

#endif  // NODULEKIT_ERROR_H_
