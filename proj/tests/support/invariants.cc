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

#include "support/invariants.h"

#include <algorithm>
#include <deque>

namespace vyakarana::testing {

std::vector<std::string> cg_violations(const conllu::Sentence& source,
                                       const cg::CgSentence& cg,
                                       const cg::SubstitutionIndex& index,
                                       const cg::GenerationConfig& config) {
  std::vector<std::string> out;
  const auto& a = source.tokens;
  const auto& b = cg.sentence.tokens;
  const std::string where = cg.sentence.sent_id + ": ";
  if (a.size() != b.size()) {
    out.push_back(where + "token count changed");
    return out;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string at = where + "token " + std::to_string(i + 1) + ": ";
    if (a[i].upos != b[i].upos) out.push_back(at + "upos changed");
    if (a[i].head != b[i].head) out.push_back(at + "head changed");
    if (a[i].deprel != b[i].deprel) out.push_back(at + "deprel changed");
    const bool content =
        morph::is_content(morph::classify(a[i], config.schema));
    if (!content && a[i].form != b[i].form) {
      // Only lexicon-driven adposition agreement may touch a function word.
      const bool adjusted =
          std::find(cg.adjusted_adpositions.begin(),
                    cg.adjusted_adpositions.end(),
                    i) != cg.adjusted_adpositions.end();
      auto entry = config.adposition_lexicon.find(a[i].form);
      const bool legal = adjusted && a[i].upos == "ADP" &&
                         entry != config.adposition_lexicon.end() &&
                         (b[i].form == entry->second.masc ||
                          b[i].form == entry->second.fem);
      if (!legal) out.push_back(at + "function word form changed");
    }
  }

  for (const auto& slot : cg.slots) {
    const auto i = slot.position;
    const std::string at = where + "slot " + std::to_string(i + 1) + ": ";
    if (slot.fallback) {
      if (b[i].form != a[i].form) out.push_back(at + "fallback changed the form");
      continue;
    }
    auto original = a[i].feats.get("Gender");
    auto filled = b[i].feats.get("Gender");
    switch (cg.variant) {
      case morph::GenderVariant::kSame:
        if (original != filled) out.push_back(at + "SAME changed gender");
        break;
      case morph::GenderVariant::kOpposite:
        if ((original == "Masc" && filled != "Fem") ||
            (original == "Fem" && filled != "Masc")) {
          out.push_back(at + "OPPOSITE did not flip gender");
        }
        break;
      case morph::GenderVariant::kMasculine:
        if (filled == "Fem") out.push_back(at + "feminine slot in MASCULINE");
        break;
      case morph::GenderVariant::kFeminine:
        if (filled == "Masc") out.push_back(at + "masculine slot in FEMININE");
        break;
    }
    const auto key = morph::feature_key(b[i], config.schema);
    const auto expected = morph::coerce_gender(
        morph::feature_key(a[i], config.schema), cg.variant);
    if (!(key == expected)) out.push_back(at + "filled key " + key.to_string() +
                                          " != target " + expected.to_string());
    if (!index.position(expected, b[i].form)) {
      out.push_back(at + "donor '" + b[i].form + "' not in pool " +
                    expected.to_string());
    }
    if (b[i].form == a[i].form) out.push_back(at + "donor equals original");
  }
  return out;
}

int bfs_depth(const conllu::Sentence& sentence) {
  const std::size_t n = sentence.tokens.size();
  std::vector<std::vector<std::size_t>> children(n + 1);
  for (const auto& t : sentence.tokens) {
    children[static_cast<std::size_t>(t.head)].push_back(
        static_cast<std::size_t>(t.id));
  }
  std::vector<int> level(n + 1, -1);
  std::deque<std::size_t> queue;
  for (std::size_t root : children[0]) {
    level[root] = 0;
    queue.push_back(root);
  }
  int deepest = 0;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    deepest = std::max(deepest, level[v]);
    for (std::size_t c : children[v]) {
      level[c] = level[v] + 1;
      queue.push_back(c);
    }
  }
  return deepest;
}

}  // namespace vyakarana::testing
