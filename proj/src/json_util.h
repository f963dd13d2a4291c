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

// Path-aware accessors for schema-checked JSON documents. Internal.
#ifndef NODULEKIT_SRC_JSON_UTIL_H_
#define NODULEKIT_SRC_JSON_UTIL_H_

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"
#include "nodulekit/error.h"

namespace nodulekit::json_util {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline Json ParseDocument(std::string_view text) {
  Json doc = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::kMalformedJson, "document is not valid JSON");
  }
  return doc;
}

[[noreturn]] inline void Violation(const std::string& path,
                                   const std::string& what) {
  throw Error(ErrorCode::kSchemaViolation,
              (path.empty() ? std::string("/") : path) + ": " + what);
}

inline const Json& Field(const Json& obj, const std::string& path,
                         const char* key) {
  if (!obj.is_object()) Violation(path, "expected object");
  auto it = obj.find(key);
  if (it == obj.end()) Violation(path + "/" + key, "missing required field");
  return *it;
}

inline const Json* OptionalField(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

inline std::string AsString(const Json& v, const std::string& path,
                            bool allow_empty = false) {
  if (!v.is_string()) Violation(path, "expected string");
  std::string s = v.get<std::string>();
  if (!allow_empty && s.empty()) Violation(path, "empty string");
  return s;
}

inline bool AsBool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) Violation(path, "expected boolean");
  return v.get<bool>();
}

inline double AsNumber(const Json& v, const std::string& path) {
  if (!v.is_number()) Violation(path, "expected number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) Violation(path, "non-finite number");
  return d;
}

inline int64_t AsInteger(const Json& v, const std::string& path,
                         int64_t min_value, int64_t max_value) {
  if (!v.is_number_integer()) Violation(path, "expected integer");
  int64_t i = 0;
  if (v.is_number_unsigned()) {
    const uint64_t u = v.get<uint64_t>();
    if (u > static_cast<uint64_t>(max_value)) Violation(path, "out of range");
    i = static_cast<int64_t>(u);
  } else {
    i = v.get<int64_t>();
  }
  if (i < min_value || i > max_value) Violation(path, "out of range");
  return i;
}

inline uint64_t AsUint64(const Json& v, const std::string& path) {
  if (!v.is_number_unsigned() &&
      !(v.is_number_integer() && v.get<int64_t>() >= 0)) {
    Violation(path, "expected non-negative integer");
  }
  return v.get<uint64_t>();
}

inline const Json& AsArray(const Json& v, const std::string& path) {
  if (!v.is_array()) Violation(path, "expected array");
  return v;
}

inline void ExpectSchema(const Json& doc, const char* schema) {
  if (!doc.is_object()) Violation("", "expected object at document root");
  const std::string got = AsString(Field(doc, "", "schema"), "/schema");
  if (got != schema) {
    Violation("/schema", "expected \"" + std::string(schema) + "\", got \"" +
                             got + "\"");
  }
}

}  // namespace nodulekit::json_util

#endif  // NODULEKIT_SRC_JSON_UTIL_H_
