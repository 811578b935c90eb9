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

#include "vyakarana/embedding_store.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <unordered_map>
#include <unordered_set>

namespace vyakarana::embeddings {

namespace {

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_string(std::string& buf, const std::string& s) {
  put_u32(buf, static_cast<std::uint32_t>(s.size()));
  buf += s;
}

std::size_t floats_per_layer(std::uint32_t dim, std::uint32_t n_tokens) {
  return static_cast<std::size_t>(dim) * (1 + static_cast<std::size_t>(n_tokens));
}

}  // namespace

FormatError::FormatError(std::uint64_t offset, const std::string& what)
    : std::runtime_error("byte " + std::to_string(offset) + ": " + what),
      offset_(offset) {}

Record::Record(std::string id, std::uint32_t layers, std::uint32_t dim,
               std::uint32_t n_tokens)
    : sent_id(std::move(id)),
      num_layers(layers),
      hidden_dim(dim),
      alignment(n_tokens, 0),
      values(layers * floats_per_layer(dim, n_tokens), 0.0f) {}

std::span<float> Record::sentence_vector(std::uint32_t layer) {
  return {values.data() + layer * floats_per_layer(hidden_dim, n_tokens()),
          hidden_dim};
}

std::span<const float> Record::sentence_vector(std::uint32_t layer) const {
  return {values.data() + layer * floats_per_layer(hidden_dim, n_tokens()),
          hidden_dim};
}

std::span<float> Record::token_vector(std::uint32_t layer,
                                      std::uint32_t token) {
  return {values.data() + layer * floats_per_layer(hidden_dim, n_tokens()) +
              (1 + static_cast<std::size_t>(token)) * hidden_dim,
          hidden_dim};
}

std::span<const float> Record::token_vector(std::uint32_t layer,
                                            std::uint32_t token) const {
  return {values.data() + layer * floats_per_layer(hidden_dim, n_tokens()) +
              (1 + static_cast<std::size_t>(token)) * hidden_dim,
          hidden_dim};
}

Writer::Writer(const std::string& path, Header header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc),
      header_(std::move(header)) {
  if (!out_) throw std::runtime_error("cannot write " + path);
  if (header_.num_layers < 1 || header_.hidden_dim < 1) {
    throw std::invalid_argument("header needs num_layers >= 1 and hidden_dim >= 1");
  }
  std::string buf(kMagic, sizeof kMagic);
  buf.push_back(static_cast<char>(kFloat32LE));
  put_string(buf, header_.model_name);
  put_u32(buf, header_.num_layers);
  put_u32(buf, header_.hidden_dim);
  count_offset_ = buf.size();
  put_u32(buf, 0);
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  header_.sentence_count = 0;
}

Writer::~Writer() {
  if (!closed_) {
    try {
      close();
    } catch (...) {
    }
  }
}

void Writer::write(const Record& r) {
  if (closed_) throw std::logic_error("write after close on " + path_);
  if (r.num_layers != header_.num_layers || r.hidden_dim != header_.hidden_dim) {
    throw std::invalid_argument(
        "record '" + r.sent_id + "' has shape (L=" +
        std::to_string(r.num_layers) + ", d=" + std::to_string(r.hidden_dim) +
        "), header says (L=" + std::to_string(header_.num_layers) +
        ", d=" + std::to_string(header_.hidden_dim) + ")");
  }
  if (r.values.size() !=
      r.num_layers * floats_per_layer(r.hidden_dim, r.n_tokens())) {
    throw std::invalid_argument("record '" + r.sent_id +
                                "' has the wrong number of values");
  }
  std::string payload;
  payload.reserve(12 + r.sent_id.size() + 4 * (r.alignment.size() + r.values.size()));
  put_string(payload, r.sent_id);
  put_u32(payload, r.n_tokens());
  for (auto a : r.alignment) put_u32(payload, a);
  for (float v : r.values) put_u32(payload, std::bit_cast<std::uint32_t>(v));

  std::string frame;
  put_u32(frame, static_cast<std::uint32_t>(payload.size()));
  frame += payload;
  crc_.process_bytes(frame.data(), frame.size());
  out_.write(frame.data(), static_cast<std::streamsize>(frame.size()));
  ++header_.sentence_count;
}

void Writer::close() {
  if (closed_) return;
  closed_ = true;
  std::string trailer;
  put_u32(trailer, crc_.checksum());
  out_.write(trailer.data(), 4);
  std::string count;
  put_u32(count, header_.sentence_count);
  out_.seekp(static_cast<std::streamoff>(count_offset_));
  out_.write(count.data(), 4);
  out_.close();
  if (!out_) throw std::runtime_error("error writing " + path_);
}

void write_file(const std::string& path, const Header& header,
                std::span<const Record> records) {
  Writer w(path, header);
  for (const auto& r : records) w.write(r);
  w.close();
}

Reader::Reader(const std::string& path) : in_(path, std::ios::binary) {
  if (!in_) throw std::runtime_error("cannot open " + path);
  size_ = std::filesystem::file_size(path);
  char magic[5];
  read_exact(magic, 5, false);
  if (std::memcmp(magic, kMagic, 5) != 0) {
    throw FormatError(0, "not a VYKE1 file (bad magic)");
  }
  std::uint8_t enc = 0;
  read_exact(&enc, 1, false);
  if (enc != kFloat32LE) {
    throw FormatError(5, "unsupported float encoding " + std::to_string(enc));
  }
  const std::uint32_t name_len = read_u32(false);
  if (name_len > size_ - offset_) {
    throw FormatError(offset_ - 4, "model name length exceeds file size");
  }
  header_.model_name.resize(name_len);
  read_exact(header_.model_name.data(), name_len, false);
  header_.num_layers = read_u32(false);
  header_.hidden_dim = read_u32(false);
  header_.sentence_count = read_u32(false);
  if (header_.num_layers < 1 || header_.hidden_dim < 1) {
    throw FormatError(offset_ - 12, "header has zero layers or dimension");
  }
  remaining_ = header_.sentence_count;
}

void Reader::read_exact(void* dst, std::size_t n, bool in_body) {
  if (n > size_ - offset_) {
    throw FormatError(offset_, "unexpected end of file");
  }
  in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (!in_) throw FormatError(offset_, "read error");
  if (in_body) crc_.process_bytes(dst, n);
  offset_ += n;
}

std::uint32_t Reader::read_u32(bool in_body) {
  unsigned char b[4];
  read_exact(b, 4, in_body);
  return get_u32(b);
}

bool Reader::next(Record& r) {
  if (done_) return false;
  if (remaining_ == 0) {
    const std::uint64_t at = offset_;
    const std::uint32_t expected = crc_.checksum();
    const std::uint32_t stored = read_u32(false);
    if (stored != expected) throw FormatError(at, "CRC mismatch");
    if (offset_ != size_) throw FormatError(offset_, "trailing bytes after CRC");
    done_ = true;
    return false;
  }
  const std::uint64_t frame_at = offset_;
  const std::uint32_t payload_len = read_u32(true);
  // Leave room for the 4-byte CRC trailer.
  if (static_cast<std::uint64_t>(payload_len) + 4 > size_ - offset_) {
    throw FormatError(frame_at, "record length " + std::to_string(payload_len) +
                                    " exceeds remaining file size");
  }
  std::vector<unsigned char> payload(payload_len);
  read_exact(payload.data(), payload_len, true);

  std::size_t p = 0;
  auto need = [&](std::size_t n) {
    if (n > payload.size() - p) {
      throw FormatError(frame_at, "record payload truncated");
    }
  };
  need(4);
  const std::uint32_t id_len = get_u32(&payload[p]);
  p += 4;
  need(id_len);
  std::string id(reinterpret_cast<const char*>(&payload[p]), id_len);
  p += id_len;
  need(4);
  const std::uint32_t n_tokens = get_u32(&payload[p]);
  p += 4;
  const std::uint64_t floats =
      header_.num_layers *
      (static_cast<std::uint64_t>(header_.hidden_dim) * (1 + std::uint64_t{n_tokens}));
  if (payload.size() - p != 4 * (std::uint64_t{n_tokens} + floats)) {
    throw FormatError(frame_at, "record '" + id + "' size disagrees with " +
                                    std::to_string(n_tokens) + " tokens");
  }
  r = Record(std::move(id), header_.num_layers, header_.hidden_dim, n_tokens);
  for (auto& a : r.alignment) {
    a = get_u32(&payload[p]);
    p += 4;
  }
  for (auto& v : r.values) {
    v = std::bit_cast<float>(get_u32(&payload[p]));
    p += 4;
  }
  --remaining_;
  return true;
}

File read_file(const std::string& path) {
  Reader reader(path);
  File f;
  f.header = reader.header();
  Record r;
  while (reader.next(r)) f.records.push_back(std::move(r));
  return f;
}

ValidationReport validate(const std::string& path, const conllu::Treebank& tb) {
  ValidationReport report;
  std::unordered_map<std::string, std::size_t> lengths;
  for (const auto& s : tb.sentences) lengths[s.sent_id] = s.tokens.size();
  std::unordered_set<std::string> covered;

  auto fail = [&](std::string message, std::optional<std::string> id,
                  std::optional<std::uint64_t> offset) {
    report.ok = false;
    report.message = std::move(message);
    report.sent_id = std::move(id);
    report.byte_offset = offset;
    return report;
  };

  try {
    Reader reader(path);
    Record r;
    while (true) {
      const std::uint64_t at = reader.offset();
      if (!reader.next(r)) break;
      ++report.records;
      std::string base = r.sent_id;
      std::optional<std::size_t> expected;
      if (auto hash = r.sent_id.rfind('#'); hash != std::string::npos) {
        base = r.sent_id.substr(0, hash);
        try {
          expected = std::stoul(r.sent_id.substr(hash + 1));
        } catch (const std::exception&) {
          return fail("malformed prefix key '" + r.sent_id + "'", r.sent_id, at);
        }
      }
      auto it = lengths.find(base);
      if (it == lengths.end()) {
        return fail("record '" + r.sent_id + "' names no treebank sentence",
                    r.sent_id, at);
      }
      if (!expected) {
        expected = it->second;
        covered.insert(base);
      } else if (*expected == 0 || *expected >= it->second) {
        return fail("prefix record '" + r.sent_id + "' is not a proper prefix",
                    r.sent_id, at);
      }
      if (r.n_tokens() != *expected) {
        return fail("record '" + r.sent_id + "' has " +
                        std::to_string(r.n_tokens()) + " tokens, expected " +
                        std::to_string(*expected),
                    r.sent_id, at);
      }
      for (float v : r.values) {
        if (!std::isfinite(v)) {
          return fail("record '" + r.sent_id + "' contains NaN or Inf",
                      r.sent_id, at);
        }
      }
    }
  } catch (const FormatError& e) {
    return fail(e.what(), std::nullopt, e.offset());
  } catch (const std::runtime_error& e) {
    return fail(e.what(), std::nullopt, std::nullopt);
  }
  for (const auto& [id, n] : lengths) {
    if (!covered.contains(id)) ++report.missing_sentences;
  }
  report.message = "ok";
  return report;
}

Slice slice(const std::string& path,
            std::span<const tasks::TaskExample> examples, std::uint32_t layer) {
  Reader reader(path);
  const Header& h = reader.header();
  if (layer >= h.num_layers) {
    throw std::invalid_argument("layer " + std::to_string(layer) +
                                " out of range; file has " +
                                std::to_string(h.num_layers) + " layers");
  }

  // record key -> example positions that read from it
  std::unordered_map<std::string, std::vector<std::size_t>> wanted;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    wanted[examples[i].record_key()].push_back(i);
  }

  Slice out;
  out.dim = h.hidden_dim;
  out.features.assign(examples.size() * out.dim, 0.0f);
  out.labels.resize(examples.size());
  std::vector<char> filled(examples.size(), 0);

  Record r;
  while (reader.next(r)) {
    auto it = wanted.find(r.sent_id);
    if (it == wanted.end()) continue;
    for (std::size_t i : it->second) {
      const auto& ex = examples[i];
      std::span<const float> v;
      if (tasks::is_token_level(ex.task)) {
        if (!ex.token_index || *ex.token_index < 1 ||
            static_cast<std::uint32_t>(*ex.token_index) > r.n_tokens()) {
          throw std::runtime_error("example token_index out of range for '" +
                                   r.sent_id + "'");
        }
        v = r.token_vector(layer, static_cast<std::uint32_t>(*ex.token_index - 1));
      } else {
        v = r.sentence_vector(layer);
      }
      std::copy(v.begin(), v.end(), out.features.begin() + i * out.dim);
      out.labels[i] = ex.label;
      filled[i] = 1;
    }
  }
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (!filled[i]) {
      throw std::runtime_error("no embedding record '" +
                               examples[i].record_key() + "' in " + path);
    }
  }
  return out;
}

}  // namespace vyakarana::embeddings
