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

#include <array>
#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "vyakarana/conllu.h"

namespace vyakarana::morph {

enum class PosClass {
  kContentNoun,
  kContentVerb,
  kContentAdjective,
  kContentAdverb,
  kFunction,
};

inline bool is_content(PosClass c) { return c != PosClass::kFunction; }

enum class Gender { kMasc, kFem };
enum class Number { kSing, kPlur };

std::string_view gender_code(Gender g);  // "Masc" / "Fem"
std::optional<Gender> parse_gender(std::string_view code);
Gender flip(Gender g);

enum class GenderVariant { kSame, kOpposite, kMasculine, kFeminine };

inline constexpr std::array<GenderVariant, 4> kAllVariants = {
    GenderVariant::kSame, GenderVariant::kOpposite, GenderVariant::kMasculine,
    GenderVariant::kFeminine};

std::string_view variant_name(GenderVariant v);  // "same", "opposite", ...
GenderVariant parse_variant(std::string_view name);

/// Which grammatical features a content class contributes to its key.
struct FeatureSet {
  bool gender = false;
  bool number = false;
  bool case_ = false;
  bool person = false;
};

struct SchemaConfig {
  bool include_propn = false;
  // Indexed by PosClass (content classes only). Defaults follow the
  // Hindi grammar table: nominal classes carry gender/number/case,
  // verbs carry gender/number/person.
  std::array<FeatureSet, 4> features = {{
      {true, true, true, false},   // noun
      {true, true, false, true},   // verb
      {true, true, true, false},   // adjective
      {true, true, true, false},   // adverb
  }};

  const FeatureSet& features_for(PosClass c) const;
};

/// The substitution key. Absent features stay absent and only match absent.
struct FeatureKey {
  std::string upos;
  std::optional<Gender> gender;
  std::optional<Number> number;
  std::optional<std::string> case_;
  std::optional<int> person;

  friend auto operator<=>(const FeatureKey&, const FeatureKey&) = default;
  friend bool operator==(const FeatureKey&, const FeatureKey&) = default;

  /// e.g. `NOUN|Gender=Masc|Number=Sing|Case=Nom`.
  std::string to_string() const;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

PosClass classify(const conllu::Token& token, const SchemaConfig& config = {});

/// Throws ContractViolation for function-class tokens.
FeatureKey feature_key(const conllu::Token& token,
                       const SchemaConfig& config = {});

/// Genderless keys pass through untouched under every variant.
/// `original_gender` is accepted for symmetry with the slot record; the
/// key's own gender is what gets coerced.
FeatureKey coerce_gender(FeatureKey key, GenderVariant variant,
                         std::optional<Gender> original_gender = std::nullopt);

/// The 17 UD UPOS tags.
inline constexpr std::array<std::string_view, 17> kUposTags = {
    "ADJ",  "ADP",   "ADV", "AUX",   "CCONJ", "DET",  "INTJ", "NOUN", "NUM",
    "PART", "PRON",  "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

}  // namespace vyakarana::morph
