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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vyakarana/cg_generator.h"
#include "vyakarana/probe.h"
#include "vyakarana/tasks.h"

namespace vyakarana {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a run needs. Relative paths in the file are resolved
/// against the directory containing it.
struct RunConfig {
  // [paths]
  std::string train;
  std::string dev;
  std::string test;
  std::string output_dir = "out";
  std::string adposition_lexicon;  // empty: built-in genitive pair
  std::string case_mapping;        // empty: built-in seven labels

  // [treebank]
  std::string name = "HDTB";
  std::string cg_name = "CG-HDTB";

  cg::GenerationConfig generation;
  tasks::TaskOptions task_options;
  std::vector<tasks::Task> tasks = {tasks::Task::kPos, tasks::Task::kStdp,
                                    tasks::Task::kGcm, tasks::Task::kSva};
  // Which treebanks build-tasks reads: "source", "cg" or both.
  std::vector<std::string> task_treebanks = {"source", "cg"};

  probe::HyperParams hyper;
  std::vector<std::uint32_t> layers;  // empty: all

  // [embeddings]
  std::string embeddings_train;
  std::string embeddings_dev;
  std::string embeddings_test;
  std::string probe_treebank = "CG-HDTB";

  std::string cg_dir() const { return output_dir + "/cg"; }
  std::string tasks_dir() const { return output_dir + "/tasks"; }
  std::string probe_dir() const { return output_dir + "/probe"; }

  nlohmann::ordered_json to_json() const;
};

/// Parses INI-style text (`[section]`, `key = value`, `#` comments).
/// Unknown sections or keys are errors.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// The documented defaults, in the same format parse_config reads.
std::string default_config_text();

}  // namespace vyakarana
