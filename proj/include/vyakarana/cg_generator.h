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

// Colorless-green treebank generation: every content word of a source
// sentence is replaced by a word from elsewhere in the treebank carrying
// the same grammatical features, under one of four gender variants.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vyakarana/conllu.h"
#include "vyakarana/morph_schema.h"
#include "vyakarana/rng.h"

namespace vyakarana::cg {

enum class DonorScope { kWithinSplit, kWholeTreebank };
enum class Fallback { kKeepOriginal, kDropSentence };

std::string_view donor_scope_name(DonorScope s);
DonorScope parse_donor_scope(std::string_view name);
std::string_view fallback_name(Fallback f);
Fallback parse_fallback(std::string_view name);

struct AdpositionForms {
  std::string masc;
  std::string fem;

  friend bool operator==(const AdpositionForms&,
                         const AdpositionForms&) = default;
};

/// form -> its (masculine, feminine) pair. Both members of a pair map back
/// to the same pair.
using AdpositionLexicon = std::map<std::string, AdpositionForms>;

/// TSV rows `form<TAB>masc_form<TAB>fem_form`; `#` lines are comments.
/// Throws std::invalid_argument when the pairs are not involutive.
AdpositionLexicon parse_adposition_lexicon(std::string_view tsv);
AdpositionLexicon load_adposition_lexicon(const std::string& path);
/// The Hindi genitive alternation (का/की; plural के is left alone).
AdpositionLexicon default_adposition_lexicon();

struct GenerationConfig {
  std::uint64_t seed = 42;
  DonorScope donor_scope = DonorScope::kWholeTreebank;
  Fallback fallback = Fallback::kKeepOriginal;
  AdpositionLexicon adposition_lexicon = default_adposition_lexicon();
  // Reject donors whose form already occurs as a content word of the
  // sentence being filled.
  bool exclude_same_sentence = true;
  morph::SchemaConfig schema;
  unsigned jobs = 1;
};

struct DonorEntry {
  std::string form;
  std::string lemma;
};

class SubstitutionIndex {
 public:
  /// Adds a donor; a repeated (key, form) is ignored.
  void add(const morph::FeatureKey& key, std::string_view form,
           std::string_view lemma);

  /// Empty span when the key has no donors.
  std::span<const DonorEntry> pool(const morph::FeatureKey& key) const;
  /// Position of `form` within pool(key).
  std::optional<std::size_t> position(const morph::FeatureKey& key,
                                      std::string_view form) const;

  std::size_t key_count() const { return pools_.size(); }
  std::size_t entry_count() const;
  bool empty() const { return pools_.empty(); }

  /// Keys in sorted order with their pool sizes.
  std::vector<std::pair<morph::FeatureKey, std::size_t>> sizes() const;

 private:
  struct Pool {
    std::vector<DonorEntry> entries;
    std::unordered_map<std::string, std::size_t> by_form;
  };
  std::map<morph::FeatureKey, Pool> pools_;
};

SubstitutionIndex build_index(std::span<const conllu::Treebank* const> donors,
                              const GenerationConfig& config);

struct Slot {
  std::size_t position = 0;  // 0-based token index
  morph::FeatureKey key;
  std::optional<morph::Gender> original_gender;
  std::string original_form;
};

struct Template {
  conllu::Sentence source;
  std::vector<Slot> slots;
};

Template make_template(const conllu::Sentence& sentence,
                       const morph::SchemaConfig& schema = {});

struct SlotRecord {
  std::size_t position = 0;
  std::string original;
  std::string donor;  // equals `original` when the fallback was used
  bool fallback = false;
  std::optional<morph::Gender> original_gender;
  std::optional<morph::Gender> target_gender;
};

struct CgSentence {
  conllu::Sentence sentence;
  std::string source_sent_id;
  morph::GenderVariant variant = morph::GenderVariant::kSame;
  std::vector<SlotRecord> slots;
  // ADP positions rewritten by adjust_adpositions.
  std::vector<std::size_t> adjusted_adpositions;
};

/// `<source sent_id>-<variant>`
std::string cg_sent_id(std::string_view source_id, morph::GenderVariant v);

/// The per-(sentence, variant) stream the generator uses.
Rng sentence_rng(std::uint64_t seed, std::string_view sent_id,
                 morph::GenderVariant variant);

/// Returns nothing when the drop policy applies to an empty pool.
std::optional<CgSentence> fill(const Template& tmpl,
                               const SubstitutionIndex& index,
                               morph::GenderVariant variant, Rng& rng,
                               const GenerationConfig& config = {});

CgSentence adjust_adpositions(CgSentence cg, const AdpositionLexicon& lexicon);

struct SourceSplits {
  conllu::Treebank train;
  conllu::Treebank dev;
  conllu::Treebank test;
};

struct SplitStats {
  std::size_t source_sentences = 0;
  std::size_t generated = 0;
  std::size_t dropped = 0;
  std::size_t slots = 0;
  std::size_t fallback_slots = 0;
  // Fallback slots whose target gender differed from the original gender;
  // each one leaves the split slightly less balanced.
  std::size_t balance_deficit = 0;
  std::size_t substituted = 0;  // slots whose form actually changed
  std::size_t adjusted_adpositions = 0;
};

struct CgSplit {
  conllu::Treebank treebank;
  std::vector<CgSentence> provenance;
  SplitStats stats;
};

struct CgOutput {
  CgSplit train;  // from source test
  CgSplit dev;    // from source dev
  CgSplit test;   // from source train
  std::size_t index_keys = 0;
  std::size_t index_entries = 0;
};

/// Generates all four variants of one source split into `target`.
CgSplit generate_split(const conllu::Treebank& source, conllu::Split target,
                       const SubstitutionIndex& index,
                       const GenerationConfig& config);

CgOutput generate_cg(const SourceSplits& source, const GenerationConfig& config);

/// One JSON object per line:
/// {source_sent_id, variant, slots: [{pos, orig, donor, fallback}]}.
/// `pos` is the 1-based token id.
std::string provenance_jsonl(std::span<const CgSentence> sentences);

struct GenderCounts {
  std::size_t masc = 0;
  std::size_t fem = 0;

  std::size_t total() const { return masc + fem; }
  /// Nothing when no token is gendered.
  std::optional<double> masc_share() const;
  std::optional<double> fem_share() const;
};

GenderCounts gender_report(const conllu::Treebank& treebank);

/// "70.37%" or "n/a".
std::string format_share(std::optional<double> share);

}  // namespace vyakarana::cg
