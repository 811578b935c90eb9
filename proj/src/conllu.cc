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

#include "vyakarana/conllu.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace vyakarana::conllu {

namespace {

constexpr std::string_view kSentIdPrefix = "# sent_id = ";
constexpr std::string_view kTextPrefix = "# text = ";

bool iless(std::string_view a, std::string_view b) {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
        return std::tolower(static_cast<unsigned char>(x)) <
               std::tolower(static_cast<unsigned char>(y));
      });
}

std::optional<int> to_int(std::string_view s) {
  int value = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

// Loose match for `# sent_id = X` / `# sent_id=X`; returns X.
std::optional<std::string> comment_value(std::string_view line,
                                         std::string_view key) {
  if (line.empty() || line[0] != '#') return std::nullopt;
  line.remove_prefix(1);
  while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
  if (line.substr(0, key.size()) != key) return std::nullopt;
  line.remove_prefix(key.size());
  while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
  if (line.empty() || line.front() != '=') return std::nullopt;
  line.remove_prefix(1);
  if (!line.empty() && line.front() == ' ') line.remove_prefix(1);
  return std::string(line);
}

std::string render_token(const Token& t) {
  std::string out;
  out.reserve(64);
  out += std::to_string(t.id);
  out += '\t';
  out += t.form;
  out += '\t';
  out += t.lemma;
  out += '\t';
  out += t.upos;
  out += '\t';
  out += t.xpos;
  out += '\t';
  out += t.feats.to_string();
  out += '\t';
  out += std::to_string(t.head);
  out += '\t';
  out += t.deprel;
  out += '\t';
  out += t.deps;
  out += '\t';
  out += t.misc;
  return out;
}

struct Block {
  std::size_t first_line = 0;
  std::vector<std::pair<std::size_t, std::string_view>> lines;
};

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& detail,
                       const std::string& path)
    : std::runtime_error((path.empty() ? "" : path + ":") + "line " +
                         std::to_string(line) + ": " + detail),
      line_(line),
      detail_(detail) {}

MorphFeatures MorphFeatures::parse(std::string_view column) {
  MorphFeatures out;
  if (column == "_" || column.empty()) return out;
  std::size_t start = 0;
  while (start <= column.size()) {
    auto bar = column.find('|', start);
    auto item = column.substr(start, bar == std::string_view::npos
                                         ? std::string_view::npos
                                         : bar - start);
    auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw std::invalid_argument("malformed feature '" + std::string(item) +
                                  "'");
    }
    out.set(item.substr(0, eq), item.substr(eq + 1));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return out;
}

std::optional<std::string> MorphFeatures::get(std::string_view key) const {
  for (const auto& [k, v] : items_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void MorphFeatures::set(std::string_view key, std::string_view value) {
  for (auto& [k, v] : items_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  auto pos = std::upper_bound(
      items_.begin(), items_.end(), key,
      [](std::string_view k, const auto& item) { return iless(k, item.first); });
  items_.emplace(pos, std::string(key), std::string(value));
}

void MorphFeatures::erase(std::string_view key) {
  std::erase_if(items_, [&](const auto& item) { return item.first == key; });
}

std::string MorphFeatures::to_string() const {
  if (items_.empty()) return "_";
  std::string out;
  for (const auto& [k, v] : items_) {
    if (!out.empty()) out += '|';
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

void Sentence::set_sent_id(std::string id) {
  sent_id = std::move(id);
  for (auto& c : comments) {
    if (c.kind == Comment::Kind::kSentId) return;
    if (c.kind == Comment::Kind::kOther && comment_value(c.raw, "sent_id")) {
      c = Comment{Comment::Kind::kSentId, {}};
      return;
    }
  }
  comments.insert(comments.begin(), Comment{Comment::Kind::kSentId, {}});
}

void Sentence::set_text(std::string value) {
  text = std::move(value);
  for (auto& c : comments) {
    if (c.kind == Comment::Kind::kText) return;
    if (c.kind == Comment::Kind::kOther && comment_value(c.raw, "text")) {
      c = Comment{Comment::Kind::kText, {}};
      return;
    }
  }
  auto pos = std::find_if(comments.begin(), comments.end(), [](const auto& c) {
    return c.kind == Comment::Kind::kSentId;
  });
  comments.insert(pos == comments.end() ? pos : pos + 1,
                  Comment{Comment::Kind::kText, {}});
}

std::string Sentence::render_text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out += tokens[i].form;
    if (i + 1 < tokens.size() &&
        tokens[i].misc.find("SpaceAfter=No") == std::string::npos) {
      out += ' ';
    }
  }
  return out;
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + std::string(name) + "'");
}

std::optional<Split> split_from_path(std::string_view path) {
  auto slash = path.find_last_of('/');
  auto base = slash == std::string_view::npos ? path : path.substr(slash + 1);
  if (base.find("train") != std::string_view::npos) return Split::kTrain;
  if (base.find("dev") != std::string_view::npos) return Split::kDev;
  if (base.find("test") != std::string_view::npos) return Split::kTest;
  return std::nullopt;
}

std::size_t Treebank::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

std::optional<std::string> check_forest(const Sentence& sentence) {
  const auto& tokens = sentence.tokens;
  const int n = static_cast<int>(tokens.size());
  if (n == 0) return "sentence has no tokens";
  bool has_root = false;
  for (int i = 0; i < n; ++i) {
    const auto& t = tokens[i];
    if (t.id != i + 1) {
      return "token ids not contiguous at id " + std::to_string(t.id);
    }
    if (t.head < 0 || t.head > n) {
      return "head " + std::to_string(t.head) + " out of range for token " +
             std::to_string(t.id);
    }
    if (t.head == t.id) {
      return "token " + std::to_string(t.id) + " is its own head";
    }
    if (t.head == 0) has_root = true;
  }
  if (!has_root) return "no root token";
  // 0 = unvisited, 1 = on current path, 2 = reaches a root.
  std::vector<char> state(n + 1, 0);
  state[0] = 2;
  for (int start = 1; start <= n; ++start) {
    std::vector<int> path;
    int cur = start;
    while (state[cur] == 0) {
      state[cur] = 1;
      path.push_back(cur);
      cur = tokens[cur - 1].head;
    }
    if (state[cur] == 1) {
      return "cycle through token " + std::to_string(cur);
    }
    for (int v : path) state[v] = 2;
  }
  return std::nullopt;
}

Treebank parse(std::string_view text, const ParseOptions& options) {
  Treebank tb;
  std::set<std::string, std::less<>> seen_ids;

  auto finish = [&](Block& block) {
    if (block.lines.empty()) return;
    Sentence s;
    for (auto [lineno, line] : block.lines) {
      if (line[0] == '#') {
        if (auto id = comment_value(line, "sent_id")) {
          s.sent_id = *id;
          bool canonical = line == std::string(kSentIdPrefix) + *id;
          s.comments.push_back(canonical
                                   ? Comment{Comment::Kind::kSentId, {}}
                                   : Comment{Comment::Kind::kOther,
                                             std::string(line)});
        } else if (auto txt = comment_value(line, "text")) {
          s.text = *txt;
          bool canonical = line == std::string(kTextPrefix) + *txt;
          s.comments.push_back(canonical ? Comment{Comment::Kind::kText, {}}
                                         : Comment{Comment::Kind::kOther,
                                                   std::string(line)});
        } else {
          s.comments.push_back({Comment::Kind::kOther, std::string(line)});
        }
        continue;
      }
      auto cols = split_tabs(line);
      if (cols.size() != 10) {
        throw ParseError(lineno, "expected 10 tab-separated columns, found " +
                                     std::to_string(cols.size()));
      }
      if (cols[0].find_first_of("-.") != std::string_view::npos) {
        s.extra_lines.push_back({s.tokens.size(), std::string(line)});
        continue;
      }
      Token t;
      auto id = to_int(cols[0]);
      if (!id || *id <= 0) {
        throw ParseError(lineno, "invalid token id '" + std::string(cols[0]) +
                                     "'");
      }
      auto head = to_int(cols[6]);
      if (!head) {
        throw ParseError(lineno, "non-integer head '" + std::string(cols[6]) +
                                     "'");
      }
      t.id = *id;
      t.form = cols[1];
      t.lemma = cols[2];
      t.upos = cols[3];
      t.xpos = cols[4];
      try {
        t.feats = MorphFeatures::parse(cols[5]);
      } catch (const std::invalid_argument& e) {
        throw ParseError(lineno, e.what());
      }
      t.head = *head;
      t.deprel = cols[7];
      t.deps = cols[8];
      t.misc = cols[9];
      s.tokens.push_back(std::move(t));
    }
    const std::size_t first = block.first_line;
    block.lines.clear();
    if (auto problem = check_forest(s)) {
      if (options.strict) throw ParseError(first, *problem);
      tb.warnings.push_back("line " + std::to_string(first) + ": skipped '" +
                            s.sent_id + "': " + *problem);
      return;
    }
    if (s.sent_id.empty()) {
      s.sent_id = "s" + std::to_string(tb.sentences.size() + 1);
    }
    if (!seen_ids.insert(s.sent_id).second) {
      throw ParseError(first, "duplicate sent_id '" + s.sent_id + "'");
    }
    tb.sentences.push_back(std::move(s));
  };

  Block block;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos
                                     ? std::string_view::npos
                                     : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++lineno;
    if (line.empty()) {
      finish(block);
      continue;
    }
    if (block.lines.empty()) block.first_line = lineno;
    block.lines.emplace_back(lineno, line);
  }
  finish(block);
  return tb;
}

Treebank read_file(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  Treebank tb;
  try {
    tb = parse(buf.str(), options);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path);
  }
  tb.source_path = path;
  if (auto split = split_from_path(path)) tb.split = *split;
  return tb;
}

std::string serialize(const Sentence& s) {
  std::string out;
  for (const auto& c : s.comments) {
    switch (c.kind) {
      case Comment::Kind::kSentId:
        out += kSentIdPrefix;
        out += s.sent_id;
        break;
      case Comment::Kind::kText:
        out += kTextPrefix;
        out += s.text.value_or("");
        break;
      case Comment::Kind::kOther:
        out += c.raw;
        break;
    }
    out += '\n';
  }
  std::size_t extra = 0;
  for (std::size_t i = 0; i <= s.tokens.size(); ++i) {
    while (extra < s.extra_lines.size() &&
           s.extra_lines[extra].before_token == i) {
      out += s.extra_lines[extra++].raw;
      out += '\n';
    }
    if (i < s.tokens.size()) {
      out += render_token(s.tokens[i]);
      out += '\n';
    }
  }
  out += '\n';
  return out;
}

std::string serialize(const Treebank& tb) {
  std::string out;
  for (const auto& s : tb.sentences) out += serialize(s);
  return out;
}

void write_file(const std::string& path, const Treebank& tb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize(tb);
}

}  // namespace vyakarana::conllu
