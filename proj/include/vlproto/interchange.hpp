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

// On-disk interchange formats and the per-class join.
//
// VLPD latent file, all integers little-endian:
//
//   offset  size        field
//   0       4           magic "VLPD"
//   4       4           version (u32) = 1
//   8       4           n_samples (u32)
//   12      4           dim (u32)
//   16      4           rank (u32)
//   20      4*rank      tensor shape dims (u32 each), product == dim
//   ...     4*n*dim     payload, IEEE-754 binary32, row-major
//
// Captions are JSONL with exactly the fields {index, sample_id, label, caption}.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vlproto/error.hpp"
#include "vlproto/json_format.hpp"

namespace vlproto {

inline constexpr std::array<char, 4> kLatentMagic = {'V', 'L', 'P', 'D'};
inline constexpr std::uint32_t kLatentVersion = 1;

/// n x dim matrix of per-sample latent vectors plus the tensor shape each
/// row reshapes to. Immutable once constructed; every value is finite.
class LatentMatrix {
 public:
  LatentMatrix() = default;

  LatentMatrix(std::size_t n_samples, std::vector<std::uint32_t> tensor_shape,
               std::vector<float> data)
      : n_samples_(n_samples), shape_(std::move(tensor_shape)), data_(std::move(data)) {
    std::uint64_t dim = 1;
    for (std::uint32_t s : shape_) {
      if (s == 0) throw ValidationError("tensor shape dims must be positive");
      dim *= s;
      if (dim > 0xFFFFFFFFULL) throw ValidationError("dim exceeds 2^32-1");
    }
    dim_ = static_cast<std::size_t>(dim);
    if (n_samples_ > 0xFFFFFFFFULL) throw ValidationError("n_samples exceeds 2^32-1");
    if (data_.size() != n_samples_ * dim_) {
      throw ValidationError("data length " + std::to_string(data_.size()) +
                            " != n_samples*dim " + std::to_string(n_samples_ * dim_));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (!std::isfinite(data_[i])) {
        throw ValidationError("non-finite value at row " + std::to_string(i / dim_) +
                              ", column " + std::to_string(i % dim_));
      }
    }
  }

  /// Builds a matrix from equally sized rows with shape [dim].
  static LatentMatrix from_rows(const std::vector<std::vector<float>>& rows) {
    if (rows.empty()) return LatentMatrix(0, {1}, {});
    const std::size_t d = rows.front().size();
    std::vector<float> data;
    data.reserve(rows.size() * d);
    for (const auto& r : rows) {
      if (r.size() != d) throw ValidationError("ragged rows");
      data.insert(data.end(), r.begin(), r.end());
    }
    return LatentMatrix(rows.size(), {static_cast<std::uint32_t>(d)}, std::move(data));
  }

  std::size_t n_samples() const noexcept { return n_samples_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<std::uint32_t>& tensor_shape() const noexcept { return shape_; }
  std::span<const float> data() const noexcept { return data_; }

  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(data_).subspan(i * dim_, dim_);
  }

  /// Sub-matrix of the given rows, in the given order.
  LatentMatrix select_rows(std::span<const std::size_t> indices) const {
    std::vector<float> out;
    out.reserve(indices.size() * dim_);
    for (std::size_t i : indices) {
      if (i >= n_samples_) throw ValidationError("row index out of range");
      auto r = row(i);
      out.insert(out.end(), r.begin(), r.end());
    }
    return LatentMatrix(indices.size(), shape_, std::move(out));
  }

  /// Bit-exact comparison, so +0.0 and -0.0 differ.
  friend bool operator==(const LatentMatrix& a, const LatentMatrix& b) {
    return a.n_samples_ == b.n_samples_ && a.shape_ == b.shape_ &&
           a.data_.size() == b.data_.size() &&
           (a.data_.empty() ||
            std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(float)) == 0);
  }

 private:
  std::size_t n_samples_ = 0;
  std::size_t dim_ = 1;
  std::vector<std::uint32_t> shape_;
  std::vector<float> data_;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint32_t get_u32(std::string_view in, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(in[off + i])) << (8 * i);
  }
  return v;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return std::move(ss).str();
}

inline void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Latents

inline std::string encode_latents(const LatentMatrix& m) {
  for (float v : m.data()) {
    if (!std::isfinite(v)) throw ValidationError("non-finite latent value");
  }
  std::string out;
  out.reserve(20 + 4 * m.tensor_shape().size() + 4 * m.data().size());
  out.append(kLatentMagic.data(), kLatentMagic.size());
  detail::put_u32(out, kLatentVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(m.n_samples()));
  detail::put_u32(out, static_cast<std::uint32_t>(m.dim()));
  detail::put_u32(out, static_cast<std::uint32_t>(m.tensor_shape().size()));
  for (std::uint32_t s : m.tensor_shape()) detail::put_u32(out, s);
  for (float v : m.data()) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

inline LatentMatrix decode_latents(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kLatentMagic.data(), 4) != 0) {
    throw FormatError("bad magic: not a VLPD latent file");
  }
  if (bytes.size() < 20) throw FormatError("truncated header");
  const std::uint32_t version = detail::get_u32(bytes, 4);
  if (version != kLatentVersion) {
    throw FormatError("unsupported VLPD version " + std::to_string(version));
  }
  const std::uint64_t n = detail::get_u32(bytes, 8);
  const std::uint64_t dim = detail::get_u32(bytes, 12);
  const std::uint64_t rank = detail::get_u32(bytes, 16);
  const std::uint64_t header = 20 + 4 * rank;
  if (bytes.size() < header) throw FormatError("truncated header (tensor shape)");
  std::vector<std::uint32_t> shape(rank);
  std::uint64_t product = 1;
  for (std::uint64_t i = 0; i < rank; ++i) {
    shape[i] = detail::get_u32(bytes, 20 + 4 * i);
    product *= shape[i];
    if (shape[i] == 0 || product > 0xFFFFFFFFULL) {
      throw FormatError("dim mismatch: invalid tensor shape");
    }
  }
  if (product != dim) {
    throw FormatError("dim mismatch: shape product " + std::to_string(product) +
                      " != dim " + std::to_string(dim));
  }
  const std::uint64_t payload = 4 * n * dim;
  const std::uint64_t available = bytes.size() - header;
  if (available < payload) {
    throw FormatError("truncated payload: expected " + std::to_string(payload) +
                      " bytes, found " + std::to_string(available));
  }
  if (available > payload) {
    throw FormatError("trailing bytes after payload: " + std::to_string(available - payload));
  }
  std::vector<float> data(static_cast<std::size_t>(n * dim));
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(detail::get_u32(bytes, header + 4 * i));
  }
  return LatentMatrix(static_cast<std::size_t>(n), std::move(shape), std::move(data));
}

inline void write_latents(const LatentMatrix& m, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_latents(m));
}

inline LatentMatrix read_latents(const std::filesystem::path& path) {
  return decode_latents(detail::read_file_bytes(path));
}

// ---------------------------------------------------------------------------
// Captions

struct CaptionRecord {
  std::size_t index = 0;
  std::string sample_id;
  std::string label;
  std::string caption;
  /// 1-based source line, 0 when not read from a file. Ignored by ==.
  std::size_t line = 0;

  friend bool operator==(const CaptionRecord& a, const CaptionRecord& b) {
    return a.index == b.index && a.sample_id == b.sample_id && a.label == b.label &&
           a.caption == b.caption;
  }
};

inline std::string where(const CaptionRecord& r) {
  return r.line ? "line " + std::to_string(r.line) : "sample '" + r.sample_id + "'";
}

/// Parses caption JSONL. Blank lines are skipped but still counted.
inline std::vector<CaptionRecord> parse_captions(std::istream& in) {
  std::vector<CaptionRecord> out;
  std::unordered_map<std::string, std::size_t> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty()) continue;
    const std::string at = "line " + std::to_string(line_no) + ": ";
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw FormatError(at + "malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw FormatError(at + "record is not a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (key != "index" && key != "sample_id" && key != "label" && key != "caption") {
        throw ValidationError(at + "unexpected field '" + key + "'");
      }
    }
    CaptionRecord r;
    r.line = line_no;
    if (!j.contains("index")) throw ValidationError(at + "missing required field 'index'");
    const Json& idx = j["index"];
    if (idx.is_number_unsigned()) {
      r.index = idx.get<std::uint64_t>();
    } else if (idx.is_number_integer() && idx.get<std::int64_t>() >= 0) {
      r.index = static_cast<std::size_t>(idx.get<std::int64_t>());
    } else {
      throw ValidationError(at + "field 'index' must be a non-negative integer");
    }
    auto get_string = [&](const char* key) {
      if (!j.contains(key)) {
        throw ValidationError(at + "missing required field '" + std::string(key) + "'");
      }
      if (!j[key].is_string()) {
        throw ValidationError(at + "field '" + std::string(key) + "' must be a string");
      }
      return j[key].get<std::string>();
    };
    r.sample_id = get_string("sample_id");
    r.label = get_string("label");
    r.caption = get_string("caption");
    if (detail::trim(r.caption).empty()) throw ValidationError(at + "empty caption");
    auto [it, inserted] = seen.emplace(r.sample_id, line_no);
    if (!inserted) {
      throw ValidationError(at + "duplicate sample_id \"" + r.sample_id +
                            "\" (first seen on line " + std::to_string(it->second) + ")");
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<CaptionRecord> parse_captions(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_captions(in);
}

inline std::vector<CaptionRecord> read_captions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_captions(in);
}

inline std::string format_captions(std::span<const CaptionRecord> records) {
  std::string out;
  for (const auto& r : records) {
    Json j = {{"index", r.index}, {"sample_id", r.sample_id}, {"label", r.label},
              {"caption", r.caption}};
    out += canonical_dump(j);
    out += '\n';
  }
  return out;
}

inline void write_captions(std::span<const CaptionRecord> records,
                           const std::filesystem::path& path) {
  detail::write_file_bytes(path, format_captions(records));
}

// ---------------------------------------------------------------------------
// Join

struct ClassRow {
  std::size_t index = 0;  ///< row in the LatentMatrix
  std::string caption;

  friend bool operator==(const ClassRow&, const ClassRow&) = default;
};

/// All samples of one label; rows in ascending latent index.
struct ClassDataset {
  std::string label;
  std::vector<ClassRow> rows;

  std::size_t size() const noexcept { return rows.size(); }
  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.index);
    return out;
  }
  std::vector<std::string> captions() const {
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.caption);
    return out;
  }
};

/// Groups captions by label. Classes come out in byte-lexicographic label
/// order. Latent rows without a caption are not part of any class.
inline std::vector<ClassDataset> join_classes(const LatentMatrix& matrix,
                                              std::span<const CaptionRecord> captions) {
  std::vector<const CaptionRecord*> owner(matrix.n_samples(), nullptr);
  std::map<std::string, ClassDataset> by_label;
  for (const auto& r : captions) {
    if (r.index >= matrix.n_samples()) {
      throw ValidationError(where(r) + ": caption index " + std::to_string(r.index) +
                            " out of range [0, " + std::to_string(matrix.n_samples()) + ")");
    }
    if (owner[r.index]) {
      throw ValidationError(where(r) + ": latent row " + std::to_string(r.index) +
                            " already referenced by " + where(*owner[r.index]));
    }
    owner[r.index] = &r;
    auto& cls = by_label[r.label];
    cls.label = r.label;
    cls.rows.push_back({r.index, r.caption});
  }
  std::vector<ClassDataset> out;
  out.reserve(by_label.size());
  for (auto& [_, cls] : by_label) {
    std::sort(cls.rows.begin(), cls.rows.end(),
              [](const ClassRow& a, const ClassRow& b) { return a.index < b.index; });
    out.push_back(std::move(cls));
  }
  return out;
}

}  // namespace vlproto
