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

#include "vyakarana/config.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace vyakarana {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"paths",
       {"train", "dev", "test", "output_dir", "adposition_lexicon",
        "case_mapping"}},
      {"treebank", {"name", "cg_name"}},
      {"generation",
       {"seed", "donor_scope", "fallback", "exclude_same_sentence"}},
      {"schema", {"include_propn", "noun", "verb", "adjective", "adverb"}},
      {"tasks",
       {"tasks", "treebanks", "sva_include_aux", "depth_counts_nodes"}},
      {"probe",
       {"batch_size", "learning_rate", "beta1", "beta2", "epsilon",
        "max_epochs", "patience", "init_seed", "shuffle_seed",
        "select_best_by_dev", "layers"}},
      {"embeddings", {"train", "dev", "test", "treebank"}},
  };
  return keys;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

template <typename T>
T to_number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    T out;
    if constexpr (std::is_floating_point_v<T>) {
      out = static_cast<T>(std::stod(v, &used));
    } else if constexpr (std::is_signed_v<T>) {
      out = static_cast<T>(std::stoll(v, &used));
    } else {
      if (!v.empty() && v.front() == '-') throw std::invalid_argument(v);
      out = static_cast<T>(std::stoull(v, &used));
    }
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

morph::FeatureSet to_feature_set(const std::string& key,
                                 const std::string& v) {
  morph::FeatureSet fs;
  for (const auto& f : split_list(v)) {
    if (f == "Gender") fs.gender = true;
    else if (f == "Number") fs.number = true;
    else if (f == "Case") fs.case_ = true;
    else if (f == "Person") fs.person = true;
    else throw ConfigError(key + ": unknown feature '" + f + "'");
  }
  return fs;
}

std::string feature_set_text(const morph::FeatureSet& fs) {
  std::vector<std::string> parts;
  if (fs.gender) parts.push_back("Gender");
  if (fs.number) parts.push_back("Number");
  if (fs.case_) parts.push_back("Case");
  if (fs.person) parts.push_back("Person");
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
  return out;
}

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base) / p).lexically_normal().string();
}

void require_exists(const std::string& key, const std::string& path) {
  if (!path.empty() && !fs::exists(path)) {
    throw ConfigError(key + ": no such file '" + path + "'");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  RunConfig c;
  bool seed_seen = false;
  for (const auto& [section, body] : tree) {
    auto known = known_keys().find(section);
    if (known == known_keys().end()) {
      throw ConfigError("unknown config section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      if (!known->second.contains(key)) {
        throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      }
      const std::string v = node.get_value<std::string>();
      const std::string where = section + "." + key;
      if (section == "paths") {
        if (key == "train") c.train = resolve(base_dir, v);
        if (key == "dev") c.dev = resolve(base_dir, v);
        if (key == "test") c.test = resolve(base_dir, v);
        if (key == "output_dir") c.output_dir = resolve(base_dir, v);
        if (key == "adposition_lexicon") c.adposition_lexicon = resolve(base_dir, v);
        if (key == "case_mapping") c.case_mapping = resolve(base_dir, v);
      } else if (section == "treebank") {
        if (key == "name") c.name = v;
        if (key == "cg_name") c.cg_name = v;
      } else if (section == "generation") {
        if (key == "seed") {
          c.generation.seed = to_number<std::uint64_t>(where, v);
          seed_seen = true;
        }
        try {
          if (key == "donor_scope") c.generation.donor_scope = cg::parse_donor_scope(v);
          if (key == "fallback") c.generation.fallback = cg::parse_fallback(v);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(where + ": " + e.what());
        }
        if (key == "exclude_same_sentence") c.generation.exclude_same_sentence = to_bool(where, v);
      } else if (section == "schema") {
        auto& s = c.generation.schema;
        if (key == "include_propn") s.include_propn = to_bool(where, v);
        if (key == "noun") s.features[0] = to_feature_set(where, v);
        if (key == "verb") s.features[1] = to_feature_set(where, v);
        if (key == "adjective") s.features[2] = to_feature_set(where, v);
        if (key == "adverb") s.features[3] = to_feature_set(where, v);
      } else if (section == "tasks") {
        if (key == "tasks") {
          c.tasks.clear();
          for (const auto& t : split_list(v)) {
            try {
              c.tasks.push_back(tasks::parse_task(t));
            } catch (const std::invalid_argument& e) {
              throw ConfigError(where + ": " + e.what());
            }
          }
        }
        if (key == "treebanks") {
          c.task_treebanks = split_list(v);
          for (const auto& t : c.task_treebanks) {
            if (t != "source" && t != "cg") {
              throw ConfigError(where + ": expected source and/or cg, got '" + t + "'");
            }
          }
        }
        if (key == "sva_include_aux") c.task_options.sva_include_aux = to_bool(where, v);
        if (key == "depth_counts_nodes") c.task_options.depth_counts_nodes = to_bool(where, v);
      } else if (section == "probe") {
        auto& h = c.hyper;
        if (key == "batch_size") h.batch_size = to_number<std::size_t>(where, v);
        if (key == "learning_rate") h.learning_rate = to_number<double>(where, v);
        if (key == "beta1") h.beta1 = to_number<double>(where, v);
        if (key == "beta2") h.beta2 = to_number<double>(where, v);
        if (key == "epsilon") h.epsilon = to_number<double>(where, v);
        if (key == "max_epochs") h.max_epochs = to_number<int>(where, v);
        if (key == "patience") h.patience = to_number<int>(where, v);
        if (key == "init_seed") h.init_seed = to_number<std::uint64_t>(where, v);
        if (key == "shuffle_seed") h.shuffle_seed = to_number<std::uint64_t>(where, v);
        if (key == "select_best_by_dev") h.select_best_by_dev = to_bool(where, v);
        if (key == "layers") {
          c.layers.clear();
          for (const auto& l : split_list(v)) {
            c.layers.push_back(to_number<std::uint32_t>(where, l));
          }
        }
      } else if (section == "embeddings") {
        if (key == "train") c.embeddings_train = resolve(base_dir, v);
        if (key == "dev") c.embeddings_dev = resolve(base_dir, v);
        if (key == "test") c.embeddings_test = resolve(base_dir, v);
        if (key == "treebank") c.probe_treebank = v;
      }
    }
  }
  if (!seed_seen) throw ConfigError("generation.seed is required");
  if (c.hyper.batch_size == 0 || c.hyper.max_epochs < 1 || c.hyper.patience < 1) {
    throw ConfigError("probe: batch_size, max_epochs and patience must be positive");
  }

  require_exists("paths.train", c.train);
  require_exists("paths.dev", c.dev);
  require_exists("paths.test", c.test);
  require_exists("paths.adposition_lexicon", c.adposition_lexicon);
  require_exists("paths.case_mapping", c.case_mapping);
  try {
    if (!c.adposition_lexicon.empty()) {
      c.generation.adposition_lexicon = cg::load_adposition_lexicon(c.adposition_lexicon);
    }
    if (!c.case_mapping.empty()) {
      c.task_options.case_mapping = tasks::load_case_mapping(c.case_mapping);
    }
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto dir = fs::path(path).parent_path();
  return parse_config(buf.str(), dir.empty() ? "." : dir.string());
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["paths"] = {{"train", train},
                {"dev", dev},
                {"test", test},
                {"output_dir", output_dir},
                {"adposition_lexicon", adposition_lexicon},
                {"case_mapping", case_mapping}};
  j["treebank"] = {{"name", name}, {"cg_name", cg_name}};
  j["generation"] = {
      {"seed", generation.seed},
      {"donor_scope", cg::donor_scope_name(generation.donor_scope)},
      {"fallback", cg::fallback_name(generation.fallback)},
      {"exclude_same_sentence", generation.exclude_same_sentence}};
  const auto& s = generation.schema;
  j["schema"] = {{"include_propn", s.include_propn},
                 {"noun", feature_set_text(s.features[0])},
                 {"verb", feature_set_text(s.features[1])},
                 {"adjective", feature_set_text(s.features[2])},
                 {"adverb", feature_set_text(s.features[3])}};
  auto task_list = nlohmann::ordered_json::array();
  for (auto t : tasks) task_list.push_back(tasks::task_name(t));
  j["tasks"] = {{"tasks", task_list},
                {"treebanks", task_treebanks},
                {"sva_include_aux", task_options.sva_include_aux},
                {"depth_counts_nodes", task_options.depth_counts_nodes}};
  j["probe"] = hyper.to_json();
  j["probe"]["layers"] = layers;
  j["embeddings"] = {{"train", embeddings_train},
                     {"dev", embeddings_dev},
                     {"test", embeddings_test},
                     {"treebank", probe_treebank}};
  return j;
}

std::string default_config_text() {
  return R"(# vyakarana run configuration. Relative paths resolve against the
# directory holding this file.

[paths]
# Source treebank splits (CoNLL-U).
train = hi_hdtb-ud-train.conllu
dev = hi_hdtb-ud-dev.conllu
test = hi_hdtb-ud-test.conllu
output_dir = out
# TSV form<TAB>masc_form<TAB>fem_form; empty uses the built-in genitive pair.
adposition_lexicon =
# TSV ud_case<TAB>label; empty uses the built-in seven case labels.
case_mapping =

[treebank]
name = HDTB
cg_name = CG-HDTB

[generation]
seed = 42
# whole_treebank | within_split
donor_scope = whole_treebank
# keep_original | drop_sentence
fallback = keep_original
exclude_same_sentence = true

[schema]
include_propn = false
noun = Gender,Number,Case
verb = Gender,Number,Person
adjective = Gender,Number,Case
adverb = Gender,Number,Case

[tasks]
tasks = POS,STDP,GCM,SVA
# source, cg, or both
treebanks = source,cg
sva_include_aux = false
depth_counts_nodes = false

[probe]
batch_size = 256
learning_rate = 0.001
beta1 = 0.9
beta2 = 0.999
epsilon = 1e-08
max_epochs = 20
patience = 3
init_seed = 42
shuffle_seed = 42
select_best_by_dev = false
# Comma-separated layer indices; empty sweeps every layer.
layers =

[embeddings]
# VYKE1 files, one per split, for the treebank named below.
train =
dev =
test =
treebank = CG-HDTB
)";
}

}  // namespace vyakarana
