// Copyright 2026 The vlproto Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Canonical JSON text: compact, object keys in byte order, floating-point
// numbers as the shortest decimal that round-trips (std::to_chars), always
// with a '.' or exponent so they parse back as floating point.

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

#include <json.hpp>

#include "vlproto/error.hpp"

namespace vlproto {

using Json = nlohmann::json;

inline void append_double(std::string& out, double v) {
  if (!std::isfinite(v)) throw ValidationError("cannot serialize non-finite number");
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error("float formatting failed");
  std::string_view text(buf, static_cast<std::size_t>(end - buf));
  out.append(text);
  if (text.find_first_of(".eE") == std::string_view::npos) out.append(".0");
}

inline void append_canonical(std::string& out, const Json& j) {
  switch (j.type()) {
    case Json::value_t::null:
      out += "null";
      break;
    case Json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      break;
    case Json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      break;
    case Json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      break;
    case Json::value_t::number_float:
      append_double(out, j.get<double>());
      break;
    case Json::value_t::string:
      out += j.dump();
      break;
    case Json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        append_canonical(out, v);
      }
      out += ']';
      break;
    }
    case Json::value_t::object: {
      // nlohmann's default object type is a std::map, so iteration is sorted.
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += Json(k).dump();
        out += ':';
        append_canonical(out, v);
      }
      out += '}';
      break;
    }
    default:
      throw Error("unsupported JSON value type");
  }
}

inline std::string canonical_dump(const Json& j) {
  std::string out;
  append_canonical(out, j);
  return out;
}

inline std::string format_double(double v) {
  std::string out;
  append_double(out, v);
  return out;
}

}  // namespace vlproto
