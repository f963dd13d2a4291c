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

// Minimal DICOM Part-10 reader for uncompressed little-endian files.
//
// Only what ultrasound frame ingestion needs is interpreted: the File Meta
// group (for the transfer syntax), a handful of image-pixel module tags and
// PatientID. Sequences are skipped. Compressed, encapsulated and big-endian
// transfer syntaxes are rejected.
#ifndef NODULEKIT_DICOM_H_
#define NODULEKIT_DICOM_H_

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nodulekit/image.h"

namespace nodulekit {

struct DicomTag {
  uint16_t group = 0;
  uint16_t element = 0;

  auto operator<=>(const DicomTag&) const = default;
  std::string ToString() const;  // "(7FE0,0010)"
};

namespace tags {
inline constexpr DicomTag kTransferSyntaxUid{0x0002, 0x0010};
inline constexpr DicomTag kPatientId{0x0010, 0x0020};
inline constexpr DicomTag kSamplesPerPixel{0x0028, 0x0002};
inline constexpr DicomTag kPhotometricInterpretation{0x0028, 0x0004};
inline constexpr DicomTag kPlanarConfiguration{0x0028, 0x0006};
inline constexpr DicomTag kRows{0x0028, 0x0010};
inline constexpr DicomTag kColumns{0x0028, 0x0011};
inline constexpr DicomTag kBitsAllocated{0x0028, 0x0100};
inline constexpr DicomTag kPixelData{0x7FE0, 0x0010};
}  // namespace tags

inline constexpr char kImplicitLittleEndianUid[] = "1.2.840.10008.1.2";
inline constexpr char kExplicitLittleEndianUid[] = "1.2.840.10008.1.2.1";

enum class TransferSyntax { kImplicitLittle, kExplicitLittle };

struct DicomElement {
  std::string vr;  // two letters; implicit-VR files get a dictionary guess
  std::vector<uint8_t> value;

  bool operator==(const DicomElement&) const = default;
};

struct DicomObject {
  std::map<DicomTag, DicomElement> elements;
  TransferSyntax transfer_syntax = TransferSyntax::kExplicitLittle;
  // Non-fatal irregularities, e.g. odd-length values.
  std::vector<std::string> warnings;

  const DicomElement* Find(DicomTag tag) const;
  // String value with leading/trailing spaces and NULs removed.
  std::string GetString(DicomTag tag) const;
  uint16_t GetUint16(DicomTag tag) const;

  bool operator==(const DicomObject&) const = default;
};

DicomObject ParseDicom(std::span<const uint8_t> bytes);

// 8-bit pixel data to a raster. MONOCHROME1 is inverted so that larger sample
// values are always brighter; planar RGB is interleaved.
RasterImage DecodeImage(const DicomObject& object);

// Writer used for fixtures and round-trip checks. Elements are emitted in tag
// order after a File Meta group announcing `syntax`.
std::vector<uint8_t> EncodeDicom(
    const std::map<DicomTag, DicomElement>& dataset, TransferSyntax syntax);

// Convenience dataset for a single 8-bit frame.
std::map<DicomTag, DicomElement> MakeImageDataset(
    const RasterImage& image, const std::string& patient_id,
    const std::string& photometric = "");

DicomElement UsElement(uint16_t value);
DicomElement StringElement(const std::string& vr, const std::string& value);

}  // namespace nodulekit

#endif  // NODULEKIT_DICOM_H_
