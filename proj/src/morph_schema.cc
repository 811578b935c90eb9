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

#include "vyakarana/morph_schema.h"

namespace vyakarana::morph {

std::string_view gender_code(Gender g) {
  return g == Gender::kMasc ? "Masc" : "Fem";
}

std::optional<Gender> parse_gender(std::string_view code) {
  if (code == "Masc") return Gender::kMasc;
  if (code == "Fem") return Gender::kFem;
  return std::nullopt;
}

Gender flip(Gender g) {
  return g == Gender::kMasc ? Gender::kFem : Gender::kMasc;
}

std::string_view variant_name(GenderVariant v) {
  switch (v) {
    case GenderVariant::kSame:
      return "same";
    case GenderVariant::kOpposite:
      return "opposite";
    case GenderVariant::kMasculine:
      return "masculine";
    case GenderVariant::kFeminine:
      return "feminine";
  }
  return "same";
}

GenderVariant parse_variant(std::string_view name) {
  for (auto v : kAllVariants) {
    if (variant_name(v) == name) return v;
  }
  throw std::invalid_argument("unknown gender variant '" + std::string(name) +
                              "'");
}

const FeatureSet& SchemaConfig::features_for(PosClass c) const {
  if (!is_content(c)) {
    throw ContractViolation("function words have no feature set");
  }
  return features[static_cast<std::size_t>(c)];
}

std::string FeatureKey::to_string() const {
  std::string out = upos;
  if (gender) out += "|Gender=" + std::string(gender_code(*gender));
  if (number) out += *number == Number::kSing ? "|Number=Sing" : "|Number=Plur";
  if (case_) out += "|Case=" + *case_;
  if (person) out += "|Person=" + std::to_string(*person);
  return out;
}

PosClass classify(const conllu::Token& token, const SchemaConfig& config) {
  const auto& u = token.upos;
  if (u == "NOUN") return PosClass::kContentNoun;
  if (u == "VERB") return PosClass::kContentVerb;
  if (u == "ADJ") return PosClass::kContentAdjective;
  if (u == "ADV") return PosClass::kContentAdverb;
  if (u == "PROPN" && config.include_propn) return PosClass::kContentNoun;
  return PosClass::kFunction;
}

FeatureKey feature_key(const conllu::Token& token, const SchemaConfig& config) {
  const PosClass cls = classify(token, config);
  if (!is_content(cls)) {
    throw ContractViolation("feature_key called on function word '" +
                            token.form + "' (" + token.upos + ")");
  }
  const FeatureSet& wanted = config.features_for(cls);
  FeatureKey key;
  key.upos = token.upos;
  if (wanted.gender) {
    if (auto g = token.feats.get("Gender")) key.gender = parse_gender(*g);
  }
  if (wanted.number) {
    if (auto n = token.feats.get("Number")) {
      if (*n == "Sing") key.number = Number::kSing;
      if (*n == "Plur") key.number = Number::kPlur;
    }
  }
  if (wanted.case_) key.case_ = token.feats.get("Case");
  if (wanted.person) {
    if (auto p = token.feats.get("Person")) {
      if (*p == "1" || *p == "2" || *p == "3") key.person = *p->data() - '0';
    }
  }
  return key;
}

FeatureKey coerce_gender(FeatureKey key, GenderVariant variant,
                         std::optional<Gender> /*original_gender*/) {
  if (!key.gender) return key;
  switch (variant) {
    case GenderVariant::kSame:
      break;
    case GenderVariant::kOpposite:
      key.gender = flip(*key.gender);
      break;
    case GenderVariant::kMasculine:
      key.gender = Gender::kMasc;
      break;
    case GenderVariant::kFeminine:
      key.gender = Gender::kFem;
      break;
  }
  return key;
}

}  // namespace vyakarana::morph
