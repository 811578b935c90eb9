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

#include "vyakarana/cg_generator.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace vyakarana::cg {

using morph::Gender;
using morph::GenderVariant;

std::string_view donor_scope_name(DonorScope s) {
  return s == DonorScope::kWithinSplit ? "within_split" : "whole_treebank";
}

DonorScope parse_donor_scope(std::string_view name) {
  if (name == "within_split") return DonorScope::kWithinSplit;
  if (name == "whole_treebank") return DonorScope::kWholeTreebank;
  throw std::invalid_argument("unknown donor scope '" + std::string(name) +
                              "'");
}

std::string_view fallback_name(Fallback f) {
  return f == Fallback::kKeepOriginal ? "keep_original" : "drop_sentence";
}

Fallback parse_fallback(std::string_view name) {
  if (name == "keep_original") return Fallback::kKeepOriginal;
  if (name == "drop_sentence") return Fallback::kDropSentence;
  throw std::invalid_argument("unknown fallback '" + std::string(name) + "'");
}

AdpositionLexicon parse_adposition_lexicon(std::string_view tsv) {
  AdpositionLexicon lexicon;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < tsv.size()) {
    auto nl = tsv.find('\n', pos);
    auto line = tsv.substr(pos, nl == std::string_view::npos
                                    ? std::string_view::npos
                                    : nl - pos);
    pos = nl == std::string_view::npos ? tsv.size() : nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    std::array<std::string, 3> cols;
    std::size_t n = 0;
    std::size_t start = 0;
    while (n < 3) {
      auto tab = line.find('\t', start);
      cols[n++] = std::string(line.substr(
          start, tab == std::string_view::npos ? std::string_view::npos
                                               : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (n != 3 || line.find('\t', start) != std::string_view::npos ||
        cols[0].empty() || cols[1].empty() || cols[2].empty()) {
      throw std::invalid_argument("adposition lexicon line " +
                                  std::to_string(lineno) +
                                  ": expected form, masc_form, fem_form");
    }
    if (cols[0] != cols[1] && cols[0] != cols[2]) {
      throw std::invalid_argument(
          "adposition lexicon line " + std::to_string(lineno) + ": '" +
          cols[0] + "' is neither its masculine nor its feminine form");
    }
    lexicon[cols[0]] = AdpositionForms{cols[1], cols[2]};
  }
  for (const auto& [form, pair] : lexicon) {
    for (const auto* other : {&pair.masc, &pair.fem}) {
      auto it = lexicon.find(*other);
      if (it == lexicon.end()) {
        throw std::invalid_argument("adposition lexicon: '" + form +
                                    "' pairs with '" + *other +
                                    "', which has no row of its own");
      }
      if (it->second != pair) {
        throw std::invalid_argument("adposition lexicon: '" + form +
                                    "' and '" + *other +
                                    "' map to different pairs");
      }
    }
  }
  return lexicon;
}

AdpositionLexicon load_adposition_lexicon(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_adposition_lexicon(buf.str());
}

AdpositionLexicon default_adposition_lexicon() {
  return parse_adposition_lexicon(
      "का\tका\tकी\n"
      "की\tका\tकी\n");
}

void SubstitutionIndex::add(const morph::FeatureKey& key,
                            std::string_view form, std::string_view lemma) {
  Pool& pool = pools_[key];
  auto [it, inserted] =
      pool.by_form.try_emplace(std::string(form), pool.entries.size());
  if (inserted) {
    pool.entries.push_back({std::string(form), std::string(lemma)});
  }
}

std::span<const DonorEntry> SubstitutionIndex::pool(
    const morph::FeatureKey& key) const {
  auto it = pools_.find(key);
  if (it == pools_.end()) return {};
  return it->second.entries;
}

std::optional<std::size_t> SubstitutionIndex::position(
    const morph::FeatureKey& key, std::string_view form) const {
  auto it = pools_.find(key);
  if (it == pools_.end()) return std::nullopt;
  auto f = it->second.by_form.find(std::string(form));
  if (f == it->second.by_form.end()) return std::nullopt;
  return f->second;
}

std::size_t SubstitutionIndex::entry_count() const {
  std::size_t n = 0;
  for (const auto& [key, pool] : pools_) n += pool.entries.size();
  return n;
}

std::vector<std::pair<morph::FeatureKey, std::size_t>>
SubstitutionIndex::sizes() const {
  std::vector<std::pair<morph::FeatureKey, std::size_t>> out;
  out.reserve(pools_.size());
  for (const auto& [key, pool] : pools_) {
    out.emplace_back(key, pool.entries.size());
  }
  return out;
}

SubstitutionIndex build_index(std::span<const conllu::Treebank* const> donors,
                              const GenerationConfig& config) {
  SubstitutionIndex index;
  for (const auto* tb : donors) {
    for (const auto& s : tb->sentences) {
      for (const auto& t : s.tokens) {
        if (!morph::is_content(morph::classify(t, config.schema))) continue;
        index.add(morph::feature_key(t, config.schema), t.form, t.lemma);
      }
    }
  }
  return index;
}

Template make_template(const conllu::Sentence& sentence,
                       const morph::SchemaConfig& schema) {
  Template tmpl;
  tmpl.source = sentence;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    const auto& t = sentence.tokens[i];
    if (!morph::is_content(morph::classify(t, schema))) continue;
    Slot slot;
    slot.position = i;
    slot.key = morph::feature_key(t, schema);
    if (auto g = t.feats.get("Gender")) {
      slot.original_gender = morph::parse_gender(*g);
    }
    slot.original_form = t.form;
    tmpl.slots.push_back(std::move(slot));
  }
  return tmpl;
}

std::string cg_sent_id(std::string_view source_id, GenderVariant v) {
  std::string out(source_id);
  out += '-';
  out += morph::variant_name(v);
  return out;
}

Rng sentence_rng(std::uint64_t seed, std::string_view sent_id,
                 GenderVariant variant) {
  return derive_rng(seed, sent_id, static_cast<std::uint64_t>(variant));
}

namespace {

// Draws uniformly from the pool entries whose forms are not in `excluded`.
std::optional<std::size_t> draw(const SubstitutionIndex& index,
                                const morph::FeatureKey& key,
                                std::size_t pool_size,
                                const std::vector<std::string>& excluded,
                                Rng& rng) {
  std::vector<std::size_t> skip;
  skip.reserve(excluded.size());
  for (const auto& form : excluded) {
    if (auto p = index.position(key, form)) skip.push_back(*p);
  }
  std::sort(skip.begin(), skip.end());
  skip.erase(std::unique(skip.begin(), skip.end()), skip.end());
  if (skip.size() >= pool_size) return std::nullopt;
  std::size_t r = uniform_index(rng, pool_size - skip.size());
  for (std::size_t e : skip) {
    if (e <= r) ++r;
  }
  return r;
}

}  // namespace

std::optional<CgSentence> fill(const Template& tmpl,
                               const SubstitutionIndex& index,
                               GenderVariant variant, Rng& rng,
                               const GenerationConfig& config) {
  CgSentence out;
  out.sentence = tmpl.source;
  out.source_sent_id = tmpl.source.sent_id;
  out.variant = variant;
  out.sentence.set_sent_id(cg_sent_id(tmpl.source.sent_id, variant));

  // Forms that should not be drawn while alternatives remain: donors already
  // placed in this sentence and, optionally, the sentence's own content words.
  std::vector<std::string> soft;
  if (config.exclude_same_sentence) {
    for (const auto& slot : tmpl.slots) soft.push_back(slot.original_form);
  }

  for (const auto& slot : tmpl.slots) {
    const morph::FeatureKey target = morph::coerce_gender(slot.key, variant);
    auto pool = index.pool(target);

    std::vector<std::string> excluded = soft;
    excluded.push_back(slot.original_form);
    auto pick = draw(index, target, pool.size(), excluded, rng);
    if (!pick) {
      pick = draw(index, target, pool.size(), {slot.original_form}, rng);
    }

    SlotRecord rec;
    rec.position = slot.position;
    rec.original = slot.original_form;
    rec.original_gender = slot.original_gender;
    rec.target_gender = target.gender;
    auto& token = out.sentence.tokens[slot.position];
    if (!pick) {
      if (config.fallback == Fallback::kDropSentence) return std::nullopt;
      rec.donor = slot.original_form;
      rec.fallback = true;
    } else {
      const DonorEntry& donor = pool[*pick];
      rec.donor = donor.form;
      token.form = donor.form;
      token.lemma = donor.lemma;
      if (target.gender) {
        token.feats.set("Gender", morph::gender_code(*target.gender));
      }
      soft.push_back(donor.form);
    }
    out.slots.push_back(std::move(rec));
  }
  if (out.sentence.text) out.sentence.set_text(out.sentence.render_text());
  return out;
}

CgSentence adjust_adpositions(CgSentence cg, const AdpositionLexicon& lexicon) {
  auto& tokens = cg.sentence.tokens;
  bool changed = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto& t = tokens[i];
    if (t.upos != "ADP" || t.head <= 0) continue;
    auto entry = lexicon.find(t.form);
    if (entry == lexicon.end()) continue;
    const std::size_t target = static_cast<std::size_t>(t.head - 1);
    auto slot = std::find_if(cg.slots.begin(), cg.slots.end(),
                             [&](const SlotRecord& r) {
                               return r.position == target;
                             });
    if (slot == cg.slots.end() || slot->fallback || !slot->target_gender ||
        !slot->original_gender || *slot->target_gender == *slot->original_gender) {
      continue;
    }
    const Gender g = *slot->target_gender;
    const std::string& form =
        g == Gender::kMasc ? entry->second.masc : entry->second.fem;
    if (form == t.form) continue;
    t.form = form;
    t.feats.set("Gender", morph::gender_code(g));
    cg.adjusted_adpositions.push_back(i);
    changed = true;
  }
  if (changed && cg.sentence.text) cg.sentence.set_text(cg.sentence.render_text());
  return cg;
}

CgSplit generate_split(const conllu::Treebank& source, conllu::Split target,
                       const SubstitutionIndex& index,
                       const GenerationConfig& config) {
  const std::size_t n = source.sentences.size();
  std::vector<std::array<std::optional<CgSentence>, 4>> results(n);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const Template tmpl =
          make_template(source.sentences[i], config.schema);
      for (std::size_t v = 0; v < morph::kAllVariants.size(); ++v) {
        const auto variant = morph::kAllVariants[v];
        Rng rng = sentence_rng(config.seed, tmpl.source.sent_id, variant);
        auto cg = fill(tmpl, index, variant, rng, config);
        if (cg) {
          results[i][v] = adjust_adpositions(std::move(*cg),
                                             config.adposition_lexicon);
        }
      }
    }
  };
  const unsigned jobs = std::max(1u, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  CgSplit out;
  out.treebank.split = target;
  out.stats.source_sentences = n;
  for (auto& variants : results) {
    for (auto& cg : variants) {
      if (!cg) {
        ++out.stats.dropped;
        continue;
      }
      ++out.stats.generated;
      out.stats.adjusted_adpositions += cg->adjusted_adpositions.size();
      for (const auto& slot : cg->slots) {
        ++out.stats.slots;
        if (slot.fallback) {
          ++out.stats.fallback_slots;
          if (slot.target_gender != slot.original_gender) {
            ++out.stats.balance_deficit;
          }
        } else if (slot.donor != slot.original) {
          ++out.stats.substituted;
        }
      }
      out.treebank.sentences.push_back(cg->sentence);
      out.provenance.push_back(std::move(*cg));
    }
  }
  return out;
}

CgOutput generate_cg(const SourceSplits& source,
                     const GenerationConfig& config) {
  CgOutput out;
  auto run = [&](const conllu::Treebank& from, conllu::Split to,
                 const SubstitutionIndex& index) {
    return generate_split(from, to, index, config);
  };
  if (config.donor_scope == DonorScope::kWholeTreebank) {
    const std::array<const conllu::Treebank*, 3> all = {
        &source.train, &source.dev, &source.test};
    const SubstitutionIndex index = build_index(all, config);
    out.index_keys = index.key_count();
    out.index_entries = index.entry_count();
    out.train = run(source.test, conllu::Split::kTrain, index);
    out.dev = run(source.dev, conllu::Split::kDev, index);
    out.test = run(source.train, conllu::Split::kTest, index);
  } else {
    for (auto [from, to, slot] :
         {std::tuple{&source.test, conllu::Split::kTrain, &out.train},
          std::tuple{&source.dev, conllu::Split::kDev, &out.dev},
          std::tuple{&source.train, conllu::Split::kTest, &out.test}}) {
      const std::array<const conllu::Treebank*, 1> one = {from};
      const SubstitutionIndex index = build_index(one, config);
      out.index_keys += index.key_count();
      out.index_entries += index.entry_count();
      *slot = run(*from, to, index);
    }
  }
  return out;
}

std::string provenance_jsonl(std::span<const CgSentence> sentences) {
  std::string out;
  for (const auto& cg : sentences) {
    nlohmann::ordered_json line;
    line["source_sent_id"] = cg.source_sent_id;
    line["variant"] = morph::variant_name(cg.variant);
    auto slots = nlohmann::ordered_json::array();
    for (const auto& s : cg.slots) {
      nlohmann::ordered_json slot;
      slot["pos"] = s.position + 1;
      slot["orig"] = s.original;
      slot["donor"] = s.donor;
      slot["fallback"] = s.fallback;
      slots.push_back(std::move(slot));
    }
    line["slots"] = std::move(slots);
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::optional<double> GenderCounts::masc_share() const {
  if (total() == 0) return std::nullopt;
  return static_cast<double>(masc) / static_cast<double>(total());
}

std::optional<double> GenderCounts::fem_share() const {
  if (total() == 0) return std::nullopt;
  return static_cast<double>(fem) / static_cast<double>(total());
}

GenderCounts gender_report(const conllu::Treebank& treebank) {
  GenderCounts counts;
  for (const auto& s : treebank.sentences) {
    for (const auto& t : s.tokens) {
      auto g = t.feats.get("Gender");
      if (!g) continue;
      if (*g == "Masc") ++counts.masc;
      if (*g == "Fem") ++counts.fem;
    }
  }
  return counts;
}

std::string format_share(std::optional<double> share) {
  if (!share) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *share * 100.0);
  return buf;
}

}  // namespace vyakarana::cg
