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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vyakarana/conllu.h"

namespace vyakarana::tasks {

enum class Task { kPos, kStdp, kGcm, kSva };

std::string_view task_name(Task t);  // "POS", "STDP", "GCM", "SVA"
Task parse_task(std::string_view name);
bool is_token_level(Task t);

/// One labeled unit. `token_index` is the 1-based CoNLL-U id.
struct TaskExample {
  Task task = Task::kPos;
  std::string sent_id;
  std::optional<int> token_index;
  std::optional<int> prefix_len;
  std::string label;
  conllu::Split split = conllu::Split::kTrain;
  std::string text;

  /// Key of the embedding record carrying this example's vectors:
  /// `sent_id` or, for SVA, `sent_id#prefix_len`.
  std::string record_key() const;

  friend bool operator==(const TaskExample&, const TaskExample&) = default;
};

/// UD Case literal -> case label, e.g. `Acc,Dat` -> `dative-accusative`.
using CaseMapping = std::map<std::string, std::string, std::less<>>;

/// TSV rows `ud_value<TAB>label`; `#` lines are comments.
CaseMapping parse_case_mapping(std::string_view tsv);
CaseMapping load_case_mapping(const std::string& path);
/// The seven Hindi case labels.
CaseMapping default_case_mapping();

struct TaskOptions {
  CaseMapping case_mapping = default_case_mapping();
  // SVA targets AUX tokens as well as VERB.
  bool sva_include_aux = false;
  // Count nodes instead of edges on the longest path (star = 2).
  bool depth_counts_nodes = false;
};

/// Edges on the longest token-to-root path; a lone root has depth 0.
/// Throws std::invalid_argument on heads that do not form a forest.
int tree_depth(const conllu::Sentence& sentence);

std::vector<TaskExample> build_pos(const conllu::Treebank& tb);
std::vector<TaskExample> build_stdp(const conllu::Treebank& tb,
                                    const TaskOptions& options = {});

struct GcmStats {
  std::size_t skipped_unmapped_case = 0;  // Case present but not in mapping
};
std::vector<TaskExample> build_gcm(const conllu::Treebank& tb,
                                   const TaskOptions& options = {},
                                   GcmStats* stats = nullptr);

std::vector<TaskExample> build_sva(const conllu::Treebank& tb,
                                   const TaskOptions& options = {});

std::vector<TaskExample> build(Task task, const conllu::Treebank& tb,
                               const TaskOptions& options = {});

/// SVA label for Gender/Number codes, e.g. ("Fem", "Plur") ->
/// "feminine-plural". Nothing for other values.
std::optional<std::string> sva_label(std::string_view gender,
                                     std::string_view number);

std::map<std::string, std::size_t> label_histogram(
    std::span<const TaskExample> examples);

/// One JSON object per line:
/// {task, split, sent_id, token_index?, prefix_len?, label, text}.
std::string to_jsonl(std::span<const TaskExample> examples);
std::vector<TaskExample> parse_jsonl(std::string_view text);
std::vector<TaskExample> read_jsonl(const std::string& path);

}  // namespace vyakarana::tasks
