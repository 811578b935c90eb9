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

#pragma once

// VYKE1: layer-wise sentence and token embeddings.
//
// All integers are unsigned 32-bit little-endian, floats are IEEE-754
// binary32 little-endian.
//
//   header   "VYKE1"                      5 bytes
//            float_encoding               1 byte, 1 = f32le
//            model_name_len, model_name   u32 + bytes (UTF-8)
//            num_layers L                 u32, >= 1
//            hidden_dim d                 u32, >= 1
//            sentence_count               u32
//   body     sentence_count records, each
//              payload_len                u32, bytes that follow
//              sent_id_len, sent_id       u32 + bytes
//              n_tokens                   u32
//              alignment                  n_tokens x u32
//              for layer 0..L-1:
//                sentence vector          d floats
//                token vectors            n_tokens x d floats
//   trailer  crc32                        u32, CRC-32 (IEEE) of the body
//
// Layer 0 is the embedding output; layer k >= 1 is the output of block k.
// SVA prefixes are separate records keyed `sent_id#prefix_len`.

#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/crc.hpp>

#include "vyakarana/conllu.h"
#include "vyakarana/tasks.h"

namespace vyakarana::embeddings {

inline constexpr char kMagic[5] = {'V', 'Y', 'K', 'E', '1'};
inline constexpr std::uint8_t kFloat32LE = 1;

/// Malformed or corrupt file. `offset()` is the byte offset where the
/// problem was detected.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::uint64_t offset, const std::string& what);
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

struct Header {
  std::string model_name;
  std::uint32_t num_layers = 1;
  std::uint32_t hidden_dim = 1;
  std::uint32_t sentence_count = 0;

  friend bool operator==(const Header&, const Header&) = default;
};

struct Record {
  std::string sent_id;
  std::uint32_t num_layers = 0;
  std::uint32_t hidden_dim = 0;
  std::vector<std::uint32_t> alignment;  // one entry per token
  // Layer-major: per layer, sentence vector then token vectors.
  std::vector<float> values;

  Record() = default;
  Record(std::string id, std::uint32_t layers, std::uint32_t dim,
         std::uint32_t n_tokens);

  std::uint32_t n_tokens() const {
    return static_cast<std::uint32_t>(alignment.size());
  }

  std::span<float> sentence_vector(std::uint32_t layer);
  std::span<const float> sentence_vector(std::uint32_t layer) const;
  /// `token` is 0-based.
  std::span<float> token_vector(std::uint32_t layer, std::uint32_t token);
  std::span<const float> token_vector(std::uint32_t layer,
                                      std::uint32_t token) const;

  friend bool operator==(const Record&, const Record&) = default;
};

/// Streams records to disk; sentence_count in the header is patched on
/// close() to the number of records written.
class Writer {
 public:
  Writer(const std::string& path, Header header);
  ~Writer();
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  /// Throws std::invalid_argument on dimension mismatch with the header.
  void write(const Record& record);
  void close();

 private:
  std::string path_;
  std::ofstream out_;
  Header header_;
  std::uint64_t count_offset_ = 0;
  boost::crc_32_type crc_;
  bool closed_ = false;
};

void write_file(const std::string& path, const Header& header,
                std::span<const Record> records);

class Reader {
 public:
  explicit Reader(const std::string& path);

  const Header& header() const { return header_; }

  /// Reads the next record; false after the last one, at which point the
  /// CRC trailer has been verified. Throws FormatError on corruption.
  bool next(Record& record);

  /// Offset of the next unread byte.
  std::uint64_t offset() const { return offset_; }

 private:
  void read_exact(void* dst, std::size_t n, bool in_body);
  std::uint32_t read_u32(bool in_body);

  std::ifstream in_;
  std::uint64_t size_ = 0;
  std::uint64_t offset_ = 0;
  Header header_;
  std::uint32_t remaining_ = 0;
  boost::crc_32_type crc_;
  bool done_ = false;
};

struct File {
  Header header;
  std::vector<Record> records;
};

File read_file(const std::string& path);

struct ValidationReport {
  bool ok = true;
  std::string message;
  std::optional<std::string> sent_id;      // first offending record
  std::optional<std::uint64_t> byte_offset;
  std::size_t records = 0;
  std::size_t missing_sentences = 0;  // treebank sentences with no record
};

/// Checks framing and CRC, that every record names a sentence of `tb` with
/// a matching token count (prefix records: `#k` means k tokens), and that
/// no value is NaN or infinite.
ValidationReport validate(const std::string& path, const conllu::Treebank& tb);

/// Feature rows for one layer, in example order.
struct Slice {
  std::size_t dim = 0;
  std::vector<float> features;  // examples x dim, row-major
  std::vector<std::string> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const float> row(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }
};

/// POS/GCM take the token vector at token_index, STDP the sentence vector,
/// SVA the sentence vector of the `sent_id#prefix_len` record.
/// Throws std::runtime_error naming the first missing record.
Slice slice(const std::string& path,
            std::span<const tasks::TaskExample> examples,
            std::uint32_t layer);

}  // namespace vyakarana::embeddings
