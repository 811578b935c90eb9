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
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vyakarana/tasks.h"

namespace vyakarana::probe {

struct HyperParams {
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_epochs = 20;
  int patience = 3;
  std::uint64_t init_seed = 42;
  std::uint64_t shuffle_seed = 42;
  // Pick the best layer by dev score instead of test score.
  bool select_best_by_dev = false;

  nlohmann::ordered_json to_json() const;
};

/// Borrowed features (rows x dim, row-major) and their labels.
struct Dataset {
  std::span<const float> features;
  std::size_t dim = 0;
  std::span<const std::string> labels;

  std::size_t size() const { return labels.size(); }
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LinearProbe {
  Eigen::MatrixXd weights;  // classes x dim
  Eigen::VectorXd bias;     // classes
  std::vector<std::string> classes;
  std::uint64_t init_seed = 0;

  /// Index into `classes`; ties go to the lower index.
  std::size_t predict_index(std::span<const float> x) const;
  std::vector<std::string> predict(const Dataset& data) const;
};

/// The shared starting point for every probe of a given shape: uniform in
/// +-1/sqrt(dim), drawn from `seed`.
void initialize(Eigen::MatrixXd& weights, Eigen::VectorXd& bias,
                std::size_t classes, std::size_t dim, std::uint64_t seed);

/// Mean softmax cross-entropy over the rows of `x` with targets `y`
/// (class indices). Gradients are written when the pointers are non-null.
double cross_entropy(const Eigen::MatrixXd& weights,
                     const Eigen::VectorXd& bias, const Eigen::MatrixXd& x,
                     std::span<const int> y, Eigen::MatrixXd* grad_weights,
                     Eigen::VectorXd* grad_bias);

struct TrainResult {
  LinearProbe probe;
  int epochs_run = 0;
  int best_epoch = 0;
  double best_dev_f1 = 0.0;
  std::vector<double> dev_curve;  // dev weighted-F1 after each epoch
};

/// Mini-batch Adam on softmax cross-entropy with early stopping on dev
/// weighted-F1; returns the dev-best parameters.
TrainResult train(const Dataset& train_set, const Dataset& dev_set,
                  const HyperParams& hyper = {});

/// Support-weighted mean of per-class F1 over the classes in `golds`.
/// Throws std::invalid_argument on empty or mismatched input.
double weighted_f1(std::span<const std::string> predictions,
                   std::span<const std::string> golds);

/// Share of the most frequent label.
double majority_share(std::span<const std::string> labels);

struct LayerScore {
  std::string task;
  std::uint32_t layer = 0;
  double train_f1 = 0.0;
  double dev_f1 = 0.0;
  double test_f1 = 0.0;
  int epochs = 0;
  double seconds = 0.0;
};

struct TaskSummary {
  std::string task;
  double last = 0.0;
  double best = 0.0;
  std::uint32_t best_layer = 0;
};

struct ProbeReport {
  std::string model;
  std::string treebank;
  std::vector<LayerScore> rows;  // ordered by task, then layer
  bool best_by_dev = false;

  std::vector<TaskSummary> summaries() const;

  /// `task,layer,split,weighted_f1` rows; no timings, so reruns match.
  std::string layer_csv() const;
  nlohmann::ordered_json to_json() const;
  static ProbeReport from_json(const nlohmann::json& j);
};

/// Embedding files and task examples for each split of one treebank.
struct SweepInputs {
  std::string train_embeddings;
  std::string dev_embeddings;
  std::string test_embeddings;
  std::map<tasks::Task, std::vector<tasks::TaskExample>> train;
  std::map<tasks::Task, std::vector<tasks::TaskExample>> dev;
  std::map<tasks::Task, std::vector<tasks::TaskExample>> test;
};

/// Trains one probe per (task, layer). `layers` empty means every layer
/// in the training file.
ProbeReport layer_sweep(const SweepInputs& inputs,
                        std::span<const std::uint32_t> layers,
                        const HyperParams& hyper, std::string treebank_name);

/// "0.8860"
std::string format_score(double score);
/// "0.8955 (5)"
std::string format_best(double score, std::uint32_t layer);

/// Rows are treebank x task, columns model x {last, best}.
std::string table_tsv(std::span<const ProbeReport> reports);

}  // namespace vyakarana::probe
