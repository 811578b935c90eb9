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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vyakarana::conllu {

/// Thrown for malformed CoNLL-U input. `line()` is 1-based within the
/// parsed text; the message reads `[path:]line N: detail`.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& detail,
             const std::string& path = "");

  std::size_t line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

/// The FEATS column. Keys are unique; insertion order is not significant
/// because serialization sorts keys case-insensitively.
class MorphFeatures {
 public:
  MorphFeatures() = default;

  /// Parses `Key=Value|Key=Value` or `_`.
  static MorphFeatures parse(std::string_view column);

  std::optional<std::string> get(std::string_view key) const;
  bool has(std::string_view key) const { return get(key).has_value(); }
  void set(std::string_view key, std::string_view value);
  void erase(std::string_view key);
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }

  std::string to_string() const;

  const std::vector<std::pair<std::string, std::string>>& items() const {
    return items_;
  }

  friend bool operator==(const MorphFeatures&, const MorphFeatures&) = default;

 private:
  // Kept sorted by case-insensitive key.
  std::vector<std::pair<std::string, std::string>> items_;
};

struct Token {
  int id = 0;
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos;
  MorphFeatures feats;
  int head = 0;
  std::string deprel;
  std::string deps = "_";  // opaque
  std::string misc = "_";

  friend bool operator==(const Token&, const Token&) = default;
};

/// A multiword-token range line (`3-4`) or empty-node line (`3.1`), kept
/// verbatim. `before_token` is the number of basic tokens preceding it.
struct ExtraLine {
  std::size_t before_token = 0;
  std::string raw;

  friend bool operator==(const ExtraLine&, const ExtraLine&) = default;
};

struct Comment {
  enum class Kind { kSentId, kText, kOther };
  Kind kind = Kind::kOther;
  std::string raw;  // verbatim for kOther

  friend bool operator==(const Comment&, const Comment&) = default;
};

struct Sentence {
  std::string sent_id;
  std::optional<std::string> text;
  std::vector<Token> tokens;
  // Comment lines in file order; sent_id/text entries are rendered from the
  // fields above so they stay correct when those are edited.
  std::vector<Comment> comments;
  std::vector<ExtraLine> extra_lines;

  std::size_t size() const { return tokens.size(); }

  /// Sets sent_id, adding a `# sent_id` comment if there was none.
  void set_sent_id(std::string id);
  /// Sets text, adding a `# text` comment if there was none.
  void set_text(std::string value);

  /// Space-joined forms, honoring `SpaceAfter=No` in MISC.
  std::string render_text() const;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

enum class Split { kTrain, kDev, kTest };

std::string_view split_name(Split split);
Split parse_split(std::string_view name);
/// Guesses the split from a UD-style file name (`hi_hdtb-ud-dev.conllu`).
std::optional<Split> split_from_path(std::string_view path);

struct Treebank {
  Split split = Split::kTrain;
  std::vector<Sentence> sentences;
  std::string source_path;
  // Sentences dropped by head-forest validation, as "line N: reason".
  std::vector<std::string> warnings;

  std::size_t token_count() const;
};

struct ParseOptions {
  // When set, head-forest violations raise instead of skipping the sentence.
  bool strict = false;
};

/// Checks ids are 1..n, heads in range, at least one root and no cycles.
/// Returns an error message, or nothing when the sentence is a valid forest.
std::optional<std::string> check_forest(const Sentence& sentence);

Treebank parse(std::string_view text, const ParseOptions& options = {});
Treebank read_file(const std::string& path, const ParseOptions& options = {});

std::string serialize(const Treebank& treebank);
std::string serialize(const Sentence& sentence);
void write_file(const std::string& path, const Treebank& treebank);

}  // namespace vyakarana::conllu
