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

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "vlproto/interchange.hpp"

using namespace vlproto;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("vlproto_interchange_" + name);
}

LatentMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::vector<std::uint32_t> shape) {
  std::size_t dim = 1;
  for (auto s : shape) dim *= s;
  std::normal_distribution<float> g(0.0f, 10.0f);
  std::vector<float> data(n * dim);
  for (auto& v : data) v = g(rng);
  return LatentMatrix(n, std::move(shape), std::move(data));
}

template <typename E, typename Fn>
std::string error_of(Fn&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  }
  return "<no exception>";
}

}  // namespace

TEST(Latents, TwoByThreeLayout) {
  const LatentMatrix m(2, {3}, {1, 2, 3, 4, 5, 6});
  const std::string bytes = encode_latents(m);
  // 20-byte fixed header + one shape dim + 6 payload words.
  ASSERT_EQ(bytes.size(), 20u + 4u + 24u);
  EXPECT_EQ(bytes.substr(0, 4), "VLPD");
  const unsigned char expected_header[] = {1, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0, 1, 0, 0, 0, 3, 0, 0, 0};
  for (std::size_t i = 0; i < sizeof(expected_header); ++i) {
    EXPECT_EQ(static_cast<unsigned char>(bytes[4 + i]), expected_header[i]) << "byte " << 4 + i;
  }
  // 1.0f == 0x3F800000, little-endian.
  EXPECT_EQ(static_cast<unsigned char>(bytes[24]), 0x00);
  EXPECT_EQ(static_cast<unsigned char>(bytes[27]), 0x3F);
  // 6.0f == 0x40C00000 is the last word.
  EXPECT_EQ(static_cast<unsigned char>(bytes[47]), 0x40);
  EXPECT_EQ(static_cast<unsigned char>(bytes[46]), 0xC0);
  EXPECT_EQ(decode_latents(bytes), m);
}

TEST(Latents, EmptyMatrixIsHeaderOnly) {
  const LatentMatrix m(0, {3}, {});
  const auto path = temp_path("empty.vlpd");
  write_latents(m, path);
  EXPECT_EQ(std::filesystem::file_size(path), 24u);
  EXPECT_EQ(read_latents(path), m);
}

TEST(Latents, RoundTripIsBitExact) {
  std::mt19937_64 rng(11);
  const auto path = temp_path("big.vlpd");
  for (int trial = 0; trial < 5; ++trial) {
    const LatentMatrix m = random_matrix(rng, 1, {4, 32, 32});
    write_latents(m, path);
    const LatentMatrix back = read_latents(path);
    EXPECT_EQ(back, m);
    EXPECT_EQ(back.dim(), 4096u);
    EXPECT_EQ(encode_latents(back), encode_latents(m));
  }
}

TEST(Latents, SignedZeroSurvives) {
  const LatentMatrix m(1, {2}, {-0.0f, 0.0f});
  const LatentMatrix back = decode_latents(encode_latents(m));
  EXPECT_TRUE(std::signbit(back.row(0)[0]));
  EXPECT_FALSE(std::signbit(back.row(0)[1]));
}

TEST(Latents, RejectsNonFinite) {
  EXPECT_THROW(LatentMatrix(1, {2}, {1.0f, std::numeric_limits<float>::quiet_NaN()}),
               ValidationError);
  EXPECT_THROW(LatentMatrix(1, {1}, {std::numeric_limits<float>::infinity()}), ValidationError);
  // A NaN smuggled into the payload is caught on read.
  std::string bytes = encode_latents(LatentMatrix(1, {1}, {1.0f}));
  bytes[24] = 0x00;
  bytes[25] = 0x00;
  bytes[26] = static_cast<char>(0xC0);
  bytes[27] = 0x7F;
  EXPECT_THROW(decode_latents(bytes), ValidationError);
}

TEST(Latents, RejectsBadMagicAndVersion) {
  std::string bytes = encode_latents(LatentMatrix(1, {1}, {1.0f}));
  std::string bad = bytes;
  bad.replace(0, 4, "XXXX");
  EXPECT_NE(error_of<FormatError>([&] { decode_latents(bad); }).find("bad magic"), std::string::npos);
  bad = bytes;
  bad[4] = 2;
  EXPECT_NE(error_of<FormatError>([&] { decode_latents(bad); }).find("version"), std::string::npos);
}

TEST(Latents, RejectsTruncatedPayload) {
  std::mt19937_64 rng(3);
  std::string bytes = encode_latents(random_matrix(rng, 3, {2}));
  bytes.resize(bytes.size() - 8);  // declared n=3, payload for 2 rows
  EXPECT_NE(error_of<FormatError>([&] { decode_latents(bytes); }).find("truncated payload"),
            std::string::npos);
  EXPECT_THROW(decode_latents(bytes.substr(0, 10)), FormatError);
}

TEST(Latents, RejectsDimMismatchAndTrailingBytes) {
  std::string bytes = encode_latents(LatentMatrix(1, {2}, {1.0f, 2.0f}));
  std::string bad = bytes;
  bad[12] = 3;  // dim 3 vs shape product 2
  EXPECT_NE(error_of<FormatError>([&] { decode_latents(bad); }).find("dim mismatch"),
            std::string::npos);
  EXPECT_THROW(decode_latents(bytes + "x"), FormatError);
}

TEST(Latents, ShapeInvariants) {
  EXPECT_THROW(LatentMatrix(1, {2, 0}, {}), ValidationError);
  EXPECT_THROW(LatentMatrix(2, {3}, {1, 2, 3}), ValidationError);
}

TEST(Captions, ParsesOneRecord) {
  const auto r = parse_captions(R"({"index":0,"sample_id":"a","label":"tench","caption":"A fish."})");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].index, 0u);
  EXPECT_EQ(r[0].sample_id, "a");
  EXPECT_EQ(r[0].label, "tench");
  EXPECT_EQ(r[0].caption, "A fish.");
  EXPECT_EQ(r[0].line, 1u);
}

TEST(Captions, EmptyFileIsEmptyList) {
  EXPECT_TRUE(parse_captions("").empty());
  EXPECT_TRUE(parse_captions("\n\n").empty());
}

TEST(Captions, DuplicateIdNamesTheId) {
  const std::string text =
      "{\"index\":0,\"sample_id\":\"a\",\"label\":\"x\",\"caption\":\"one\"}\n"
      "{\"index\":1,\"sample_id\":\"a\",\"label\":\"x\",\"caption\":\"two\"}\n";
  const auto msg = error_of<ValidationError>([&] { parse_captions(text); });
  EXPECT_NE(msg.find("duplicate sample_id \"a\""), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
}

TEST(Captions, MalformedLineReportsLineNumber) {
  const std::string text =
      "{\"index\":0,\"sample_id\":\"a\",\"label\":\"x\",\"caption\":\"one\"}\n"
      "\n"
      "{\"index\":1,\n";
  const auto msg = error_of<FormatError>([&] { parse_captions(text); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Captions, FieldValidation) {
  EXPECT_THROW(parse_captions(R"({"index":0,"sample_id":"a","label":"x"})"), ValidationError);
  EXPECT_THROW(parse_captions(R"({"index":-1,"sample_id":"a","label":"x","caption":"c"})"),
               ValidationError);
  EXPECT_THROW(parse_captions(R"({"index":1.5,"sample_id":"a","label":"x","caption":"c"})"),
               ValidationError);
  EXPECT_THROW(parse_captions(R"({"index":0,"sample_id":1,"label":"x","caption":"c"})"),
               ValidationError);
  EXPECT_THROW(parse_captions(R"({"index":0,"sample_id":"a","label":"x","caption":"   "})"),
               ValidationError);
  EXPECT_THROW(parse_captions(R"({"index":0,"sample_id":"a","label":"x","caption":"c","extra":1})"),
               ValidationError);
  EXPECT_THROW(parse_captions("[1,2]"), FormatError);
}

TEST(Captions, RoundTripIsByteExact) {
  std::mt19937_64 rng(5);
  std::vector<CaptionRecord> records;
  for (std::size_t i = 0; i < 50; ++i) {
    std::string cap = "caption " + std::to_string(rng() % 1000) + " \"quoted\" \\ caf\xC3\xA9 \xE2\x9C\x93";
    records.push_back({i, "id" + std::to_string(i), "label" + std::to_string(rng() % 4), cap, 0});
  }
  const std::string once = format_captions(records);
  const auto back = parse_captions(once);
  EXPECT_EQ(back, records);
  EXPECT_EQ(format_captions(back), once);
}

TEST(Join, SortsLabelsAndRows) {
  const LatentMatrix m(3, {1}, {0, 1, 2});
  const std::vector<CaptionRecord> caps = {
      {2, "s2", "a", "third", 0}, {0, "s0", "b", "first", 0}, {1, "s1", "a", "second", 0}};
  const auto classes = join_classes(m, caps);
  ASSERT_EQ(classes.size(), 2u);
  EXPECT_EQ(classes[0].label, "a");
  EXPECT_EQ(classes[0].size(), 2u);
  EXPECT_EQ(classes[0].rows[0].index, 1u);
  EXPECT_EQ(classes[0].rows[1].index, 2u);
  EXPECT_EQ(classes[1].label, "b");
  EXPECT_EQ(classes[1].size(), 1u);
}

TEST(Join, RangeAndReuseErrors) {
  const LatentMatrix m(3, {1}, {0, 1, 2});
  const std::vector<CaptionRecord> out_of_range = {{7, "s", "a", "c", 4}};
  const auto msg = error_of<ValidationError>([&] { join_classes(m, out_of_range); });
  EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
  EXPECT_NE(msg.find("out of range"), std::string::npos) << msg;
  const std::vector<CaptionRecord> reused = {{1, "s", "a", "c", 0}, {1, "t", "b", "d", 0}};
  EXPECT_THROW(join_classes(m, reused), ValidationError);
}

TEST(Join, PartitionsRandomRecords) {
  std::mt19937_64 rng(99);
  const std::size_t n = 1000;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<CaptionRecord> caps;
  for (std::size_t i = 0; i < n; ++i) {
    caps.push_back({perm[i], "id" + std::to_string(i), "c" + std::to_string(rng() % 17), "text", 0});
  }
  const LatentMatrix m(n, {1}, std::vector<float>(n, 0.0f));
  const auto classes = join_classes(m, caps);
  std::set<std::size_t> seen;
  std::size_t total = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (c) {
      EXPECT_LT(classes[c - 1].label, classes[c].label);
    }
    for (std::size_t r = 0; r < classes[c].rows.size(); ++r) {
      if (r) {
        EXPECT_LT(classes[c].rows[r - 1].index, classes[c].rows[r].index);
      }
      EXPECT_TRUE(seen.insert(classes[c].rows[r].index).second);
    }
    total += classes[c].size();
  }
  EXPECT_EQ(total, n);
  EXPECT_EQ(seen.size(), n);
}
