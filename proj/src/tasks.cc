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

#include "vyakarana/tasks.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace vyakarana::tasks {

std::string_view task_name(Task t) {
  switch (t) {
    case Task::kPos:
      return "POS";
    case Task::kStdp:
      return "STDP";
    case Task::kGcm:
      return "GCM";
    case Task::kSva:
      return "SVA";
  }
  return "POS";
}

Task parse_task(std::string_view name) {
  for (Task t : {Task::kPos, Task::kStdp, Task::kGcm, Task::kSva}) {
    if (task_name(t) == name) return t;
  }
  throw std::invalid_argument("unknown task '" + std::string(name) + "'");
}

bool is_token_level(Task t) { return t == Task::kPos || t == Task::kGcm; }

std::string TaskExample::record_key() const {
  if (task == Task::kSva && prefix_len) {
    return sent_id + "#" + std::to_string(*prefix_len);
  }
  return sent_id;
}

CaseMapping parse_case_mapping(std::string_view tsv) {
  CaseMapping mapping;
  std::istringstream in{std::string(tsv)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw std::invalid_argument("case mapping line " +
                                  std::to_string(lineno) +
                                  ": expected ud_value<TAB>label");
    }
    mapping[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return mapping;
}

CaseMapping load_case_mapping(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_case_mapping(buf.str());
}

CaseMapping default_case_mapping() {
  return parse_case_mapping(
      "Acc\taccusative\n"
      "Nom\tnominative\n"
      "Acc,Ine\taccusative-inessive\n"
      "Acc,Dat\tdative-accusative\n"
      "Acc,Erg\tergative-accusative\n"
      "Acc,Gen\tgenitive-accusative\n"
      "Acc,Ins\tinstrumental-accusative\n");
}

int tree_depth(const conllu::Sentence& sentence) {
  const auto& tokens = sentence.tokens;
  const int n = static_cast<int>(tokens.size());
  if (n == 0) throw std::invalid_argument("empty sentence has no depth");
  // depth[i] for token id i; -1 unknown, -2 on the current walk.
  std::vector<int> depth(n + 1, -1);
  int best = 0;
  std::vector<int> walk;
  for (int start = 1; start <= n; ++start) {
    walk.clear();
    int cur = start;
    while (cur != 0 && depth[cur] == -1) {
      depth[cur] = -2;
      walk.push_back(cur);
      const int head = tokens[cur - 1].head;
      if (head < 0 || head > n) {
        throw std::invalid_argument("head out of range in '" +
                                    sentence.sent_id + "'");
      }
      cur = head;
    }
    if (cur != 0 && depth[cur] == -2) {
      throw std::invalid_argument("cyclic heads in '" + sentence.sent_id +
                                  "'");
    }
    int d = cur == 0 ? -1 : depth[cur];
    for (auto it = walk.rbegin(); it != walk.rend(); ++it) {
      depth[*it] = ++d;
    }
    best = std::max(best, depth[start]);
  }
  return best;
}

namespace {

std::string joined_forms(const conllu::Sentence& s, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count && i < s.tokens.size(); ++i) {
    if (i) out += ' ';
    out += s.tokens[i].form;
  }
  return out;
}

TaskExample base(Task task, const conllu::Treebank& tb,
                 const conllu::Sentence& s) {
  TaskExample ex;
  ex.task = task;
  ex.sent_id = s.sent_id;
  ex.split = tb.split;
  return ex;
}

}  // namespace

std::vector<TaskExample> build_pos(const conllu::Treebank& tb) {
  std::vector<TaskExample> out;
  out.reserve(tb.token_count());
  for (const auto& s : tb.sentences) {
    const std::string text = joined_forms(s, s.tokens.size());
    for (const auto& t : s.tokens) {
      TaskExample ex = base(Task::kPos, tb, s);
      ex.token_index = t.id;
      ex.label = t.upos;
      ex.text = text;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

std::vector<TaskExample> build_stdp(const conllu::Treebank& tb,
                                    const TaskOptions& options) {
  std::vector<TaskExample> out;
  out.reserve(tb.sentences.size());
  for (const auto& s : tb.sentences) {
    TaskExample ex = base(Task::kStdp, tb, s);
    const int depth = tree_depth(s) + (options.depth_counts_nodes ? 1 : 0);
    ex.label = std::to_string(depth);
    ex.text = joined_forms(s, s.tokens.size());
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<TaskExample> build_gcm(const conllu::Treebank& tb,
                                   const TaskOptions& options,
                                   GcmStats* stats) {
  std::vector<TaskExample> out;
  for (const auto& s : tb.sentences) {
    const std::string text = joined_forms(s, s.tokens.size());
    for (const auto& t : s.tokens) {
      auto c = t.feats.get("Case");
      if (!c) continue;
      auto label = options.case_mapping.find(*c);
      if (label == options.case_mapping.end()) {
        if (stats) ++stats->skipped_unmapped_case;
        continue;
      }
      TaskExample ex = base(Task::kGcm, tb, s);
      ex.token_index = t.id;
      ex.label = label->second;
      ex.text = text;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

std::optional<std::string> sva_label(std::string_view gender,
                                     std::string_view number) {
  std::string g, n;
  if (gender == "Masc") g = "masculine";
  if (gender == "Fem") g = "feminine";
  if (number == "Sing") n = "singular";
  if (number == "Plur") n = "plural";
  if (g.empty() || n.empty()) return std::nullopt;
  return g + "-" + n;
}

std::vector<TaskExample> build_sva(const conllu::Treebank& tb,
                                   const TaskOptions& options) {
  std::vector<TaskExample> out;
  for (const auto& s : tb.sentences) {
    for (const auto& t : s.tokens) {
      const bool target =
          t.upos == "VERB" || (options.sva_include_aux && t.upos == "AUX");
      if (!target || t.id <= 1) continue;
      auto g = t.feats.get("Gender");
      auto n = t.feats.get("Number");
      if (!g || !n) continue;
      auto label = sva_label(*g, *n);
      if (!label) continue;
      TaskExample ex = base(Task::kSva, tb, s);
      ex.token_index = t.id;
      ex.prefix_len = t.id - 1;
      ex.label = *label;
      ex.text = joined_forms(s, static_cast<std::size_t>(t.id - 1));
      out.push_back(std::move(ex));
    }
  }
  return out;
}

std::vector<TaskExample> build(Task task, const conllu::Treebank& tb,
                               const TaskOptions& options) {
  switch (task) {
    case Task::kPos:
      return build_pos(tb);
    case Task::kStdp:
      return build_stdp(tb, options);
    case Task::kGcm:
      return build_gcm(tb, options);
    case Task::kSva:
      return build_sva(tb, options);
  }
  return {};
}

std::map<std::string, std::size_t> label_histogram(
    std::span<const TaskExample> examples) {
  std::map<std::string, std::size_t> hist;
  for (const auto& ex : examples) ++hist[ex.label];
  return hist;
}

std::string to_jsonl(std::span<const TaskExample> examples) {
  std::string out;
  for (const auto& ex : examples) {
    nlohmann::ordered_json j;
    j["task"] = task_name(ex.task);
    j["split"] = conllu::split_name(ex.split);
    j["sent_id"] = ex.sent_id;
    if (ex.token_index) j["token_index"] = *ex.token_index;
    if (ex.prefix_len) j["prefix_len"] = *ex.prefix_len;
    j["label"] = ex.label;
    j["text"] = ex.text;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<TaskExample> parse_jsonl(std::string_view text) {
  std::vector<TaskExample> out;
  std::size_t pos = 0;
  std::size_t lineno = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos
                                     ? std::string_view::npos
                                     : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      TaskExample ex;
      ex.task = parse_task(j.at("task").get<std::string>());
      ex.split = conllu::parse_split(j.at("split").get<std::string>());
      ex.sent_id = j.at("sent_id").get<std::string>();
      if (j.contains("token_index")) ex.token_index = j["token_index"].get<int>();
      if (j.contains("prefix_len")) ex.prefix_len = j["prefix_len"].get<int>();
      ex.label = j.at("label").get<std::string>();
      ex.text = j.value("text", "");
      out.push_back(std::move(ex));
    } catch (const std::exception& e) {
      throw std::runtime_error("task file line " + std::to_string(lineno) +
                               ": " + e.what());
    }
  }
  return out;
}

std::vector<TaskExample> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_jsonl(buf.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace vyakarana::tasks
