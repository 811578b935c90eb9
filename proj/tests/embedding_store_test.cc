// Copyright 2026 The Vyakarana Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "support/synthetic.h"
#include "vyakarana/embedding_store.h"
#include "vyakarana/rng.h"

namespace vyakarana::embeddings {
namespace {

std::vector<unsigned char> bytes_of(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void store(const std::string& path, const std::vector<unsigned char>& b) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
}

std::uint32_t le32(const std::vector<unsigned char>& b, std::size_t at) {
  return std::uint32_t(b[at]) | std::uint32_t(b[at + 1]) << 8 |
         std::uint32_t(b[at + 2]) << 16 | std::uint32_t(b[at + 3]) << 24;
}

// Bitwise reflected CRC-32 (polynomial 0xEDB88320), no tables.
std::uint32_t crc32_oracle(const unsigned char* p, std::size_t n) {
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) {
    c ^= p[i];
    for (int k = 0; k < 8; ++k) c = (c >> 1) ^ (0xEDB88320u & (0u - (c & 1u)));
  }
  return ~c;
}

Record filled(const std::string& id, std::uint32_t layers, std::uint32_t dim,
              std::uint32_t n, float base) {
  Record r(id, layers, dim, n);
  for (std::uint32_t i = 0; i < n; ++i) r.alignment[i] = i + 1;
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    r.values[i] = base + static_cast<float>(i);
  }
  return r;
}

TEST_CASE("one record of two tokens at L=2, d=3 stores 18 floats") {
  testing::TempDir dir("vyke");
  const auto path = dir.file("a.vyke");
  Header h{"m", 2, 3, 0};
  auto rec = filled("X", 2, 3, 2, 0.5f);
  CHECK(rec.values.size() == 18);
  write_file(path, h, std::span<const Record>(&rec, 1));

  auto b = bytes_of(path);
  const std::size_t header = 5 + 1 + 4 + 1 + 4 + 4 + 4;
  const std::size_t payload = 4 + 1 + 4 + 2 * 4 + 18 * 4;
  REQUIRE(b.size() == header + 4 + payload + 4);
  CHECK(std::memcmp(b.data(), "VYKE1", 5) == 0);
  CHECK(b[5] == 1);
  CHECK(le32(b, 6) == 1);
  CHECK(b[10] == 'm');
  CHECK(le32(b, 11) == 2);
  CHECK(le32(b, 15) == 3);
  CHECK(le32(b, 19) == 1);  // patched sentence count
  CHECK(le32(b, header) == payload);
  CHECK(le32(b, header + 4 + 5) == 2);  // n_tokens
  // First float of layer 1's sentence vector sits after layer 0's 9 floats.
  float f;
  std::memcpy(&f, &b[header + 4 + 4 + 1 + 4 + 8 + 9 * 4], 4);
  CHECK(f == 9.5f);
  CHECK(le32(b, b.size() - 4) ==
        crc32_oracle(b.data() + header, b.size() - header - 4));
}

TEST_CASE("zero records: header, empty body, CRC of nothing") {
  testing::TempDir dir("vyke");
  const auto path = dir.file("empty.vyke");
  write_file(path, Header{"model", 1, 4, 0}, {});
  auto b = bytes_of(path);
  CHECK(b.size() == 5 + 1 + 4 + 5 + 12 + 4);
  CHECK(le32(b, b.size() - 4) == 0);
  auto f = read_file(path);
  CHECK(f.records.empty());
  CHECK(f.header.model_name == "model");
}

TEST_CASE("round-trip keeps records identical") {
  testing::TempDir dir("vyke");
  const auto path = dir.file("rt.vyke");
  std::vector<Record> recs = {filled("s1", 3, 4, 5, 0.f), filled("s1#2", 3, 4, 2, 1.f),
                              filled("देवनागरी", 3, 4, 1, -7.f)};
  recs[0].values[3] = std::numeric_limits<float>::denorm_min();
  Header h{"bert-base-multilingual-cased", 3, 4, 0};
  write_file(path, h, recs);
  auto f = read_file(path);
  h.sentence_count = 3;
  CHECK(f.header == h);
  CHECK(f.records == recs);
}

TEST_CASE("writer rejects shapes that disagree with the header") {
  testing::TempDir dir("vyke");
  Writer w(dir.file("bad.vyke"), Header{"m", 2, 3, 0});
  CHECK_THROWS_AS(w.write(filled("a", 2, 4, 1, 0.f)), std::invalid_argument);
  CHECK_THROWS_AS(w.write(filled("a", 1, 3, 1, 0.f)), std::invalid_argument);
  Record broken = filled("a", 2, 3, 1, 0.f);
  broken.values.pop_back();
  CHECK_THROWS_AS(w.write(broken), std::invalid_argument);
}

conllu::Treebank two_sentences() {
  return conllu::parse(
      "# sent_id = X\n"
      "1\ta\ta\tNOUN\t_\t_\t2\tnsubj\t_\t_\n"
      "2\tb\tb\tVERB\t_\t_\t0\troot\t_\t_\n"
      "3\tc\tc\tPUNCT\t_\t_\t2\tpunct\t_\t_\n"
      "\n"
      "# sent_id = Y\n"
      "1\td\td\tVERB\t_\t_\t0\troot\t_\t_\n"
      "\n");
}

TEST_CASE("validate names the record whose token count is wrong") {
  testing::TempDir dir("vyke");
  const auto path = dir.file("v.vyke");
  auto tb = two_sentences();
  std::vector<Record> good = {filled("X", 2, 2, 3, 0.f), filled("Y", 2, 2, 1, 0.f),
                              filled("X#2", 2, 2, 2, 0.f)};
  write_file(path, Header{"m", 2, 2, 0}, good);
  auto ok = validate(path, tb);
  CHECK(ok.ok);
  CHECK(ok.records == 3);
  CHECK(ok.missing_sentences == 0);

  std::vector<Record> bad = {filled("X", 2, 2, 4, 0.f)};
  write_file(path, Header{"m", 2, 2, 0}, bad);
  auto r = validate(path, tb);
  CHECK_FALSE(r.ok);
  CHECK(r.sent_id == "X");
  CHECK(r.message.find("X") != std::string::npos);

  // Sentences without a record are counted but are not a failure.
  std::vector<Record> partial = {filled("X", 2, 2, 3, 0.f)};
  write_file(path, Header{"m", 2, 2, 0}, partial);
  auto p = validate(path, tb);
  CHECK(p.ok);
  CHECK(p.missing_sentences == 1);

  std::vector<Record> prefix = {filled("X#3", 2, 2, 3, 0.f)};
  write_file(path, Header{"m", 2, 2, 0}, prefix);
  CHECK_FALSE(validate(path, tb).ok);

  auto nan = filled("Y", 2, 2, 1, 0.f);
  nan.values[1] = std::nanf("");
  write_file(path, Header{"m", 2, 2, 0}, std::span<const Record>(&nan, 1));
  auto n = validate(path, tb);
  CHECK_FALSE(n.ok);
  CHECK(n.sent_id == "Y");
}

TEST_CASE("CRC catches every single-bit flip in the body") {
  testing::TempDir dir("vyke");
  const auto path = dir.file("c.vyke");
  std::vector<Record> recs = {filled("X", 2, 2, 3, 0.f), filled("Y", 2, 2, 1, 0.f)};
  write_file(path, Header{"m", 2, 2, 0}, recs);
  const auto pristine = bytes_of(path);
  const std::size_t body = 5 + 1 + 4 + 1 + 12;
  auto tb = two_sentences();
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    auto b = pristine;
    const auto at = body + uniform_index(rng, b.size() - body - 4);
    b[at] ^= static_cast<unsigned char>(1u << uniform_index(rng, 8));
    store(path, b);
    CHECK_THROWS_AS(read_file(path), FormatError);
    auto r = validate(path, tb);
    CHECK_FALSE(r.ok);
    CHECK(r.byte_offset.has_value());
  }
}

TEST_CASE("truncated and trailing bytes are format errors") {
  testing::TempDir dir("vyke");
  const auto path = dir.file("t.vyke");
  auto rec = filled("X", 1, 2, 3, 0.f);
  write_file(path, Header{"m", 1, 2, 0}, std::span<const Record>(&rec, 1));
  auto b = bytes_of(path);
  auto shorter = b;
  shorter.resize(b.size() - 7);
  store(path, shorter);
  CHECK_THROWS_AS(read_file(path), FormatError);
  auto longer = b;
  longer.push_back(0);
  store(path, longer);
  CHECK_THROWS_AS(read_file(path), FormatError);
  auto magic = b;
  magic[0] = 'W';
  store(path, magic);
  CHECK_THROWS_AS(read_file(path), FormatError);
}

TEST_CASE("slice looks up token, sentence and prefix vectors") {
  testing::TempDir dir("vyke");
  const auto path = dir.file("s.vyke");
  std::vector<Record> recs = {filled("X", 3, 2, 3, 0.f), filled("X#2", 3, 2, 2, 1000.f)};
  write_file(path, Header{"m", 3, 2, 0}, recs);

  tasks::TaskExample pos{tasks::Task::kPos, "X", 3, std::nullopt, "PUNCT",
                         conllu::Split::kDev, ""};
  tasks::TaskExample stdp{tasks::Task::kStdp, "X", std::nullopt, std::nullopt, "1",
                          conllu::Split::kDev, ""};
  tasks::TaskExample sva{tasks::Task::kSva, "X", 3, 2, "masculine-singular",
                         conllu::Split::kDev, ""};
  std::vector<tasks::TaskExample> ex = {pos, stdp, sva};

  auto s2 = slice(path, ex, 2);
  REQUIRE(s2.size() == 3);
  CHECK(s2.dim == 2);
  auto want_tok = recs[0].token_vector(2, 2);
  CHECK(std::vector<float>(s2.row(0).begin(), s2.row(0).end()) ==
        std::vector<float>(want_tok.begin(), want_tok.end()));
  auto want_prefix = recs[1].sentence_vector(2);
  CHECK(std::vector<float>(s2.row(2).begin(), s2.row(2).end()) ==
        std::vector<float>(want_prefix.begin(), want_prefix.end()));
  CHECK(s2.labels[0] == "PUNCT");

  auto s0 = slice(path, ex, 0);
  CHECK(s0.row(1)[0] == 0.f);  // sentence vector of layer 0 opens the record
  CHECK(s0.row(1)[1] == 1.f);

  std::vector<tasks::TaskExample> missing = {
      {tasks::Task::kStdp, "Z", std::nullopt, std::nullopt, "1", conllu::Split::kDev, ""}};
  try {
    slice(path, missing, 0);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("Z") != std::string::npos);
  }
  CHECK_THROWS(slice(path, ex, 3));
}

}  // namespace
}  // namespace vyakarana::embeddings
