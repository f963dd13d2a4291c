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
#include "nodulekit/dicom.h"

#include <cstdio>
#include <cstring>

#include "nodulekit/error.h"

namespace nodulekit {

namespace {

constexpr size_t kPreambleSize = 128;
constexpr uint32_t kUndefinedLength = 0xFFFFFFFFu;
constexpr int kMaxSequenceDepth = 32;

constexpr DicomTag kItem{0xFFFE, 0xE000};
constexpr DicomTag kItemDelimiter{0xFFFE, 0xE00D};
constexpr DicomTag kSequenceDelimiter{0xFFFE, 0xE0DD};

const DicomTag kRequiredTags[] = {
    tags::kPatientId,     tags::kRows,
    tags::kColumns,       tags::kBitsAllocated,
    tags::kSamplesPerPixel, tags::kPhotometricInterpretation,
    tags::kPixelData,
};

bool HasLongLength(const std::string& vr) {
  static const char* kLong[] = {"OB", "OD", "OF", "OL", "OV", "OW", "SQ",
                                "UC", "UN", "UR", "UT", "SV", "UV"};
  for (const char* v : kLong) {
    if (vr == v) return true;
  }
  return false;
}

std::string ImplicitVr(DicomTag tag) {
  if (tag.group == 0x0028 &&
      (tag.element == 0x0002 || tag.element == 0x0006 ||
       tag.element == 0x0010 || tag.element == 0x0011 ||
       tag.element == 0x0100 || tag.element == 0x0101 ||
       tag.element == 0x0102 || tag.element == 0x0103)) {
    return "US";
  }
  if (tag == tags::kPhotometricInterpretation) return "CS";
  if (tag == tags::kPatientId) return "LO";
  if (tag == tags::kPixelData) return "OW";
  if (tag == tags::kTransferSyntaxUid) return "UI";
  return "UN";
}

std::string TrimValue(const std::vector<uint8_t>& value) {
  size_t begin = 0;
  size_t end = value.size();
  auto blank = [](uint8_t c) { return c == ' ' || c == 0; };
  while (begin < end && blank(value[begin])) ++begin;
  while (end > begin && blank(value[end - 1])) --end;
  return std::string(value.begin() + begin, value.begin() + end);
}

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  size_t pos() const { return pos_; }
  size_t remaining() const { return bytes_.size() - pos_; }
  bool AtEnd() const { return pos_ >= bytes_.size(); }

  void Need(size_t n, const char* what) const {
    if (remaining() < n) {
      throw Error(ErrorCode::kTruncatedFile,
                  std::string(what) + " at offset " + std::to_string(pos_));
    }
  }
  uint16_t U16() {
    Need(2, "16-bit field");
    const uint16_t v = static_cast<uint16_t>(bytes_[pos_] |
                                             (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  uint32_t U32() {
    Need(4, "32-bit field");
    const uint32_t v = uint32_t{bytes_[pos_]} |
                       (uint32_t{bytes_[pos_ + 1]} << 8) |
                       (uint32_t{bytes_[pos_ + 2]} << 16) |
                       (uint32_t{bytes_[pos_ + 3]} << 24);
    pos_ += 4;
    return v;
  }
  uint16_t PeekU16() const {
    Need(2, "tag");
    return static_cast<uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
  }
  std::span<const uint8_t> Take(size_t n, const char* what) {
    Need(n, what);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  void Skip(size_t n, const char* what) { Take(n, what); }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

struct ElementHeader {
  DicomTag tag;
  std::string vr;
  uint32_t length = 0;
};

ElementHeader ReadHeader(Reader& r, bool explicit_vr) {
  ElementHeader h;
  h.tag.group = r.U16();
  h.tag.element = r.U16();
  if (h.tag.group == 0xFFFE) {
    // Item and delimiter tags never carry a VR.
    h.vr = "";
    h.length = r.U32();
    return h;
  }
  if (!explicit_vr) {
    h.vr = ImplicitVr(h.tag);
    h.length = r.U32();
    return h;
  }
  auto vr = r.Take(2, "VR");
  if (vr[0] < 'A' || vr[0] > 'Z' || vr[1] < 'A' || vr[1] > 'Z') {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "invalid VR bytes %02X %02X for %s",
                  vr[0], vr[1], h.tag.ToString().c_str());
    throw Error(ErrorCode::kMalformedDicom, buf);
  }
  h.vr.assign(vr.begin(), vr.end());
  if (HasLongLength(h.vr)) {
    r.Skip(2, "reserved bytes");
    h.length = r.U32();
  } else {
    h.length = r.U16();
  }
  return h;
}

void SkipUndefinedSequence(Reader& r, bool explicit_vr, int depth);

// Skips the elements of an undefined-length item up to its delimiter.
void SkipUndefinedItem(Reader& r, bool explicit_vr, int depth) {
  while (true) {
    ElementHeader h = ReadHeader(r, explicit_vr);
    if (h.tag == kItemDelimiter) return;
    if (h.tag.group == 0xFFFE) {
      throw Error(ErrorCode::kMalformedDicom,
                  "unexpected " + h.tag.ToString() + " inside item");
    }
    if (h.length == kUndefinedLength) {
      SkipUndefinedSequence(r, explicit_vr, depth + 1);
    } else {
      r.Skip(h.length, "item element value");
    }
  }
}

void SkipUndefinedSequence(Reader& r, bool explicit_vr, int depth) {
  if (depth > kMaxSequenceDepth) {
    throw Error(ErrorCode::kMalformedDicom, "sequence nesting too deep");
  }
  while (true) {
    ElementHeader h = ReadHeader(r, explicit_vr);
    if (h.tag == kSequenceDelimiter) return;
    if (h.tag != kItem) {
      throw Error(ErrorCode::kMalformedDicom,
                  "expected item, found " + h.tag.ToString());
    }
    if (h.length == kUndefinedLength) {
      SkipUndefinedItem(r, explicit_vr, depth);
    } else {
      r.Skip(h.length, "sequence item");
    }
  }
}

// Parses elements until the reader is exhausted, or, with meta_only, until
// the next element leaves group 0002.
void ParseElements(Reader& r, bool explicit_vr, DicomObject& out,
                   bool meta_only) {
  DicomTag previous{0, 0};
  bool first = true;
  while (!r.AtEnd()) {
    if (meta_only && r.PeekU16() != 0x0002) return;
    ElementHeader h = ReadHeader(r, explicit_vr);
    if (h.tag.group == 0xFFFE) {
      throw Error(ErrorCode::kMalformedDicom,
                  "stray " + h.tag.ToString() + " at top level");
    }
    if (!first && !(previous < h.tag)) {
      throw Error(ErrorCode::kMalformedDicom,
                  "tags not ascending: " + h.tag.ToString() + " after " +
                      previous.ToString());
    }
    first = false;
    previous = h.tag;

    DicomElement element;
    element.vr = h.vr;
    if (h.length == kUndefinedLength) {
      if (h.tag == tags::kPixelData) {
        throw Error(ErrorCode::kUnsupportedTransferSyntax,
                    "encapsulated (compressed) pixel data");
      }
      if (h.vr != "SQ" && h.vr != "UN") {
        throw Error(ErrorCode::kMalformedDicom,
                    "undefined length on " + h.tag.ToString() + " with VR " +
                        h.vr);
      }
      SkipUndefinedSequence(r, explicit_vr, 0);
      element.vr = "SQ";
    } else {
      auto value = r.Take(h.length, "element value");
      if (h.length % 2 != 0) {
        out.warnings.push_back("odd value length " + std::to_string(h.length) +
                               " for " + h.tag.ToString());
      }
      // Sequence contents are not interpreted.
      if (h.vr != "SQ") element.value.assign(value.begin(), value.end());
    }
    out.elements.emplace(h.tag, std::move(element));
  }
}

void PutU16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xFF));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void PutElement(std::vector<uint8_t>& out, DicomTag tag,
                const DicomElement& e, bool explicit_vr) {
  PutU16(out, tag.group);
  PutU16(out, tag.element);
  const uint32_t length = static_cast<uint32_t>(e.value.size());
  if (!explicit_vr) {
    PutU32(out, length);
  } else {
    out.push_back(static_cast<uint8_t>(e.vr.size() > 0 ? e.vr[0] : 'U'));
    out.push_back(static_cast<uint8_t>(e.vr.size() > 1 ? e.vr[1] : 'N'));
    if (HasLongLength(e.vr)) {
      PutU16(out, 0);
      PutU32(out, length);
    } else {
      PutU16(out, static_cast<uint16_t>(length));
    }
  }
  out.insert(out.end(), e.value.begin(), e.value.end());
}

}  // namespace

std::string DicomTag::ToString() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "(%04X,%04X)", group, element);
  return buf;
}

const DicomElement* DicomObject::Find(DicomTag tag) const {
  auto it = elements.find(tag);
  return it == elements.end() ? nullptr : &it->second;
}

std::string DicomObject::GetString(DicomTag tag) const {
  const DicomElement* e = Find(tag);
  if (e == nullptr) {
    throw Error(ErrorCode::kMissingRequiredTag, tag.ToString());
  }
  return TrimValue(e->value);
}

uint16_t DicomObject::GetUint16(DicomTag tag) const {
  const DicomElement* e = Find(tag);
  if (e == nullptr) {
    throw Error(ErrorCode::kMissingRequiredTag, tag.ToString());
  }
  if (e->value.size() < 2) {
    throw Error(ErrorCode::kMalformedDicom,
                tag.ToString() + " too short for an unsigned short");
  }
  return static_cast<uint16_t>(e->value[0] | (e->value[1] << 8));
}

DicomObject ParseDicom(std::span<const uint8_t> bytes) {
  if (bytes.size() < kPreambleSize + 4 ||
      std::memcmp(bytes.data() + kPreambleSize, "DICM", 4) != 0) {
    throw Error(ErrorCode::kNotDicom, "missing DICM magic at offset 128");
  }
  Reader r(bytes.subspan(kPreambleSize + 4));
  DicomObject out;
  ParseElements(r, /*explicit_vr=*/true, out, /*meta_only=*/true);

  const DicomElement* ts = out.Find(tags::kTransferSyntaxUid);
  if (ts == nullptr) {
    throw Error(ErrorCode::kMissingRequiredTag,
                tags::kTransferSyntaxUid.ToString() + " (TransferSyntaxUID)");
  }
  const std::string uid = TrimValue(ts->value);
  if (uid == kExplicitLittleEndianUid) {
    out.transfer_syntax = TransferSyntax::kExplicitLittle;
  } else if (uid == kImplicitLittleEndianUid) {
    out.transfer_syntax = TransferSyntax::kImplicitLittle;
  } else {
    throw Error(ErrorCode::kUnsupportedTransferSyntax, uid);
  }

  // Dataset tags must ascend from the meta group onwards.
  DicomObject dataset;
  ParseElements(r, out.transfer_syntax == TransferSyntax::kExplicitLittle,
                dataset, /*meta_only=*/false);
  for (auto& [tag, element] : dataset.elements) {
    if (tag.group <= 0x0002) {
      throw Error(ErrorCode::kMalformedDicom,
                  tag.ToString() + " outside the File Meta group");
    }
    out.elements.emplace(tag, std::move(element));
  }
  out.warnings.insert(out.warnings.end(), dataset.warnings.begin(),
                      dataset.warnings.end());

  for (const DicomTag& tag : kRequiredTags) {
    if (out.Find(tag) == nullptr) {
      throw Error(ErrorCode::kMissingRequiredTag, tag.ToString());
    }
  }
  return out;
}

RasterImage DecodeImage(const DicomObject& object) {
  const uint16_t bits = object.GetUint16(tags::kBitsAllocated);
  if (bits != 8) {
    throw Error(ErrorCode::kUnsupportedBitDepth,
                "BitsAllocated = " + std::to_string(bits));
  }
  const int spp = object.GetUint16(tags::kSamplesPerPixel);
  const std::string photometric =
      object.GetString(tags::kPhotometricInterpretation);
  const bool mono =
      photometric == "MONOCHROME1" || photometric == "MONOCHROME2";
  if (!((mono && spp == 1) || (photometric == "RGB" && spp == 3))) {
    throw Error(ErrorCode::kUnsupportedPixelFormat,
                photometric + " with SamplesPerPixel = " + std::to_string(spp));
  }
  RasterImage image;
  image.height = object.GetUint16(tags::kRows);
  image.width = object.GetUint16(tags::kColumns);
  image.channels = spp;
  if (image.width == 0 || image.height == 0) {
    throw Error(ErrorCode::kUnsupportedPixelFormat, "zero Rows or Columns");
  }
  const size_t plane = static_cast<size_t>(image.width) * image.height;
  const size_t needed = plane * spp;
  const DicomElement* pixels = object.Find(tags::kPixelData);
  if (pixels == nullptr) {
    throw Error(ErrorCode::kMissingRequiredTag, tags::kPixelData.ToString());
  }
  if (pixels->value.size() < needed) {
    throw Error(ErrorCode::kPixelDataTooShort,
                std::to_string(pixels->value.size()) + " bytes, need " +
                    std::to_string(needed));
  }

  const bool planar = spp == 3 &&
                      object.Find(tags::kPlanarConfiguration) != nullptr &&
                      object.GetUint16(tags::kPlanarConfiguration) == 1;
  if (planar) {
    image.samples.resize(needed);
    for (size_t i = 0; i < plane; ++i) {
      for (int c = 0; c < 3; ++c) {
        image.samples[3 * i + c] = pixels->value[c * plane + i];
      }
    }
  } else {
    image.samples.assign(pixels->value.begin(),
                         pixels->value.begin() + needed);
  }
  if (photometric == "MONOCHROME1") {
    for (uint8_t& s : image.samples) s = static_cast<uint8_t>(255 - s);
  }
  return image;
}

std::vector<uint8_t> EncodeDicom(
    const std::map<DicomTag, DicomElement>& dataset, TransferSyntax syntax) {
  std::vector<uint8_t> out(kPreambleSize + 4, 0);
  std::memcpy(out.data() + kPreambleSize, "DICM", 4);

  std::vector<uint8_t> meta;
  PutElement(meta, {0x0002, 0x0001}, {"OB", {0x00, 0x01}}, true);
  PutElement(meta, tags::kTransferSyntaxUid,
             StringElement("UI", syntax == TransferSyntax::kExplicitLittle
                                     ? kExplicitLittleEndianUid
                                     : kImplicitLittleEndianUid),
             true);
  std::vector<uint8_t> length_value;
  PutU32(length_value, static_cast<uint32_t>(meta.size()));
  PutElement(out, {0x0002, 0x0000}, {"UL", length_value}, true);
  out.insert(out.end(), meta.begin(), meta.end());

  const bool explicit_vr = syntax == TransferSyntax::kExplicitLittle;
  for (const auto& [tag, element] : dataset) {
    if (tag.group == 0x0002) continue;
    PutElement(out, tag, element, explicit_vr);
  }
  return out;
}

DicomElement UsElement(uint16_t value) {
  return {"US", {static_cast<uint8_t>(value & 0xFF),
                 static_cast<uint8_t>(value >> 8)}};
}

DicomElement StringElement(const std::string& vr, const std::string& value) {
  DicomElement e{vr, std::vector<uint8_t>(value.begin(), value.end())};
  if (e.value.size() % 2 != 0) e.value.push_back(vr == "UI" ? 0 : ' ');
  return e;
}

std::map<DicomTag, DicomElement> MakeImageDataset(
    const RasterImage& image, const std::string& patient_id,
    const std::string& photometric) {
  std::map<DicomTag, DicomElement> ds;
  ds[tags::kPatientId] = StringElement("LO", patient_id);
  ds[tags::kSamplesPerPixel] = UsElement(static_cast<uint16_t>(image.channels));
  ds[tags::kPhotometricInterpretation] = StringElement(
      "CS", !photometric.empty()
                ? photometric
                : (image.channels == 3 ? "RGB" : "MONOCHROME2"));
  if (image.channels == 3) ds[tags::kPlanarConfiguration] = UsElement(0);
  ds[tags::kRows] = UsElement(static_cast<uint16_t>(image.height));
  ds[tags::kColumns] = UsElement(static_cast<uint16_t>(image.width));
  ds[tags::kBitsAllocated] = UsElement(8);
  ds[{0x0028, 0x0101}] = UsElement(8);
  ds[{0x0028, 0x0102}] = UsElement(7);
  ds[{0x0028, 0x0103}] = UsElement(0);
  DicomElement pixels{"OB", image.samples};
  if (pixels.value.size() % 2 != 0) pixels.value.push_back(0);
  ds[tags::kPixelData] = std::move(pixels);
  return ds;
}

}  // namespace nodulekit
