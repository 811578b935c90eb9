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

#include "vyakarana/probe.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "vyakarana/embedding_store.h"
#include "vyakarana/rng.h"

namespace vyakarana::probe {

namespace {

constexpr std::size_t kEvalChunk = 4096;

Eigen::MatrixXd gather(const Dataset& data, std::span<const std::size_t> rows) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(data.dim));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const float* src = data.features.data() + rows[r] * data.dim;
    for (std::size_t c = 0; c < data.dim; ++c) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = src[c];
    }
  }
  return x;
}

struct Adam {
  Eigen::MatrixXd m_w, v_w;
  Eigen::VectorXd m_b, v_b;
  long step = 0;

  Adam(Eigen::Index classes, Eigen::Index dim)
      : m_w(Eigen::MatrixXd::Zero(classes, dim)),
        v_w(Eigen::MatrixXd::Zero(classes, dim)),
        m_b(Eigen::VectorXd::Zero(classes)),
        v_b(Eigen::VectorXd::Zero(classes)) {}

  void apply(const HyperParams& h, Eigen::MatrixXd& w, Eigen::VectorXd& b,
             const Eigen::MatrixXd& g_w, const Eigen::VectorXd& g_b) {
    ++step;
    const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(step));
    m_w = h.beta1 * m_w + (1.0 - h.beta1) * g_w;
    v_w = h.beta2 * v_w + (1.0 - h.beta2) * g_w.cwiseAbs2();
    m_b = h.beta1 * m_b + (1.0 - h.beta1) * g_b;
    v_b = h.beta2 * v_b + (1.0 - h.beta2) * g_b.cwiseAbs2();
    w.array() -= h.learning_rate * (m_w.array() / c1) /
                 ((v_w.array() / c2).sqrt() + h.epsilon);
    b.array() -= h.learning_rate * (m_b.array() / c1) /
                 ((v_b.array() / c2).sqrt() + h.epsilon);
  }
};

}  // namespace

nlohmann::ordered_json HyperParams::to_json() const {
  nlohmann::ordered_json j;
  j["batch_size"] = batch_size;
  j["learning_rate"] = learning_rate;
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["epsilon"] = epsilon;
  j["max_epochs"] = max_epochs;
  j["patience"] = patience;
  j["init_seed"] = init_seed;
  j["shuffle_seed"] = shuffle_seed;
  j["select_best_by_dev"] = select_best_by_dev;
  j["optimizer"] = "adam";
  j["weight_decay"] = 0.0;
  j["input_standardization"] = false;
  return j;
}

std::size_t LinearProbe::predict_index(std::span<const float> x) const {
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < weights.rows(); ++c) {
    double s = bias(c);
    for (std::size_t k = 0; k < x.size(); ++k) {
      s += weights(c, static_cast<Eigen::Index>(k)) * x[k];
    }
    if (s > best_score) {
      best_score = s;
      best = static_cast<std::size_t>(c);
    }
  }
  return best;
}

std::vector<std::string> LinearProbe::predict(const Dataset& data) const {
  std::vector<std::string> out;
  out.reserve(data.size());
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < data.size(); start += kEvalChunk) {
    const std::size_t end = std::min(data.size(), start + kEvalChunk);
    rows.resize(end - start);
    std::iota(rows.begin(), rows.end(), start);
    const Eigen::MatrixXd x = gather(data, rows);
    const Eigen::MatrixXd logits =
        (x * weights.transpose()).rowwise() + bias.transpose();
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      Eigen::Index arg = 0;
      for (Eigen::Index c = 1; c < logits.cols(); ++c) {
        if (logits(r, c) > logits(r, arg)) arg = c;
      }
      out.push_back(classes[static_cast<std::size_t>(arg)]);
    }
  }
  return out;
}

void initialize(Eigen::MatrixXd& weights, Eigen::VectorXd& bias,
                std::size_t classes, std::size_t dim, std::uint64_t seed) {
  Rng rng = derive_rng(seed, "linear-probe-init",
                       (static_cast<std::uint64_t>(classes) << 32) ^ dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  weights.resize(static_cast<Eigen::Index>(classes),
                 static_cast<Eigen::Index>(dim));
  bias.resize(static_cast<Eigen::Index>(classes));
  for (Eigen::Index c = 0; c < weights.rows(); ++c) {
    for (Eigen::Index k = 0; k < weights.cols(); ++k) {
      weights(c, k) = (2.0 * uniform_unit(rng) - 1.0) * bound;
    }
  }
  for (Eigen::Index c = 0; c < bias.size(); ++c) {
    bias(c) = (2.0 * uniform_unit(rng) - 1.0) * bound;
  }
}

double cross_entropy(const Eigen::MatrixXd& weights,
                     const Eigen::VectorXd& bias, const Eigen::MatrixXd& x,
                     std::span<const int> y, Eigen::MatrixXd* grad_weights,
                     Eigen::VectorXd* grad_bias) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd logits = (x * weights.transpose()).rowwise() + bias.transpose();
  double loss = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double top = logits.row(r).maxCoeff();
    logits.row(r).array() -= top;
    const double log_z = std::log(logits.row(r).array().exp().sum());
    loss -= logits(r, y[static_cast<std::size_t>(r)]) - log_z;
    // Turn the row into softmax probabilities for the gradient.
    logits.row(r) = (logits.row(r).array() - log_z).exp().matrix();
  }
  loss /= static_cast<double>(n);
  if (grad_weights || grad_bias) {
    for (Eigen::Index r = 0; r < n; ++r) {
      logits(r, y[static_cast<std::size_t>(r)]) -= 1.0;
    }
    logits /= static_cast<double>(n);
    if (grad_weights) *grad_weights = logits.transpose() * x;
    if (grad_bias) *grad_bias = logits.colwise().sum().transpose();
  }
  return loss;
}

TrainResult train(const Dataset& train_set, const Dataset& dev_set,
                  const HyperParams& hyper) {
  if (train_set.features.size() != train_set.size() * train_set.dim ||
      dev_set.features.size() != dev_set.size() * dev_set.dim) {
    throw std::invalid_argument("feature buffer does not match labels x dim");
  }
  if (dev_set.size() > 0 && dev_set.dim != train_set.dim) {
    throw std::invalid_argument("train and dev feature dimensions differ");
  }
  if (hyper.batch_size == 0 || hyper.max_epochs < 1) {
    throw std::invalid_argument("batch_size and max_epochs must be positive");
  }
  std::set<std::string> label_set(train_set.labels.begin(),
                                  train_set.labels.end());
  if (label_set.size() < 2) {
    throw TrainingError("training split has " +
                        std::to_string(label_set.size()) +
                        " class(es); a probe needs at least 2");
  }

  TrainResult result;
  LinearProbe& probe = result.probe;
  probe.classes.assign(label_set.begin(), label_set.end());
  probe.init_seed = hyper.init_seed;
  std::unordered_map<std::string, int> class_of;
  for (std::size_t c = 0; c < probe.classes.size(); ++c) {
    class_of[probe.classes[c]] = static_cast<int>(c);
  }
  std::vector<int> targets(train_set.size());
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    targets[i] = class_of.at(train_set.labels[i]);
  }

  Eigen::MatrixXd w;
  Eigen::VectorXd b;
  initialize(w, b, probe.classes.size(), train_set.dim, hyper.init_seed);
  probe.weights = w;
  probe.bias = b;

  const Dataset& monitor = dev_set.size() > 0 ? dev_set : train_set;
  Adam adam(w.rows(), w.cols());
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> batch_targets;
  Eigen::MatrixXd g_w;
  Eigen::VectorXd g_b;
  double best = -1.0;
  int since_best = 0;

  for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    Rng rng = derive_rng(hyper.shuffle_seed, "probe-epoch",
                         static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }
    for (std::size_t start = 0; start < order.size();
         start += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      std::span<const std::size_t> rows(order.data() + start, end - start);
      const Eigen::MatrixXd x = gather(train_set, rows);
      batch_targets.resize(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        batch_targets[r] = targets[rows[r]];
      }
      const double loss = cross_entropy(w, b, x, batch_targets, &g_w, &g_b);
      if (!std::isfinite(loss)) {
        throw TrainingError(
            "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
            std::to_string(start / hyper.batch_size) + " (max |W| = " +
            std::to_string(w.cwiseAbs().maxCoeff()) + ", max |x| = " +
            std::to_string(x.cwiseAbs().maxCoeff()) + ")");
      }
      adam.apply(hyper, w, b, g_w, g_b);
    }

    LinearProbe current{w, b, probe.classes, hyper.init_seed};
    const double f1 = weighted_f1(current.predict(monitor), monitor.labels);
    result.dev_curve.push_back(f1);
    result.epochs_run = epoch;
    if (f1 > best) {
      best = f1;
      result.best_epoch = epoch;
      probe.weights = w;
      probe.bias = b;
      since_best = 0;
    } else if (++since_best >= hyper.patience) {
      break;
    }
  }
  result.best_dev_f1 = best;
  return result;
}

double weighted_f1(std::span<const std::string> predictions,
                   std::span<const std::string> golds) {
  if (golds.empty()) throw std::invalid_argument("weighted_f1 of empty input");
  if (predictions.size() != golds.size()) {
    throw std::invalid_argument("weighted_f1: " +
                                std::to_string(predictions.size()) +
                                " predictions for " +
                                std::to_string(golds.size()) + " golds");
  }
  struct Counts {
    std::size_t tp = 0, predicted = 0, support = 0;
  };
  std::map<std::string_view, Counts> counts;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    ++counts[golds[i]].support;
    ++counts[predictions[i]].predicted;
    if (golds[i] == predictions[i]) ++counts[golds[i]].tp;
  }
  const double n = static_cast<double>(golds.size());
  double total = 0.0;
  for (const auto& [label, c] : counts) {
    if (c.support == 0) continue;
    const double precision =
        c.predicted ? static_cast<double>(c.tp) / c.predicted : 0.0;
    const double recall = static_cast<double>(c.tp) / c.support;
    const double f1 = precision + recall > 0.0
                          ? 2.0 * precision * recall / (precision + recall)
                          : 0.0;
    total += (static_cast<double>(c.support) / n) * f1;
  }
  return total;
}

double majority_share(std::span<const std::string> labels) {
  if (labels.empty()) return 0.0;
  std::map<std::string_view, std::size_t> hist;
  for (const auto& l : labels) ++hist[l];
  std::size_t top = 0;
  for (const auto& [l, n] : hist) top = std::max(top, n);
  return static_cast<double>(top) / static_cast<double>(labels.size());
}

std::vector<TaskSummary> ProbeReport::summaries() const {
  std::vector<TaskSummary> out;
  for (const auto& row : rows) {
    if (out.empty() || out.back().task != row.task) {
      out.push_back({row.task, 0.0, 0.0, 0});
      out.back().best = -1.0;
    }
  }
  for (auto& s : out) {
    std::uint32_t last_layer = 0;
    double best_key = -1.0;
    for (const auto& row : rows) {
      if (row.task != s.task) continue;
      if (row.layer >= last_layer) {
        last_layer = row.layer;
        s.last = row.test_f1;
      }
      const double key = best_by_dev ? row.dev_f1 : row.test_f1;
      if (key > best_key) {
        best_key = key;
        s.best = row.test_f1;
        s.best_layer = row.layer;
      }
    }
  }
  return out;
}

std::string ProbeReport::layer_csv() const {
  std::string out = "task,layer,split,weighted_f1\n";
  char buf[128];
  for (const auto& row : rows) {
    for (auto [split, f1] : {std::pair{"train", row.train_f1},
                             std::pair{"dev", row.dev_f1},
                             std::pair{"test", row.test_f1}}) {
      std::snprintf(buf, sizeof buf, "%s,%u,%s,%.6f\n", row.task.c_str(),
                    row.layer, split, f1);
      out += buf;
    }
  }
  return out;
}

nlohmann::ordered_json ProbeReport::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["treebank"] = treebank;
  j["best_by_dev"] = best_by_dev;
  auto rows_json = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"task", r.task},
                         {"layer", r.layer},
                         {"train_f1", r.train_f1},
                         {"dev_f1", r.dev_f1},
                         {"test_f1", r.test_f1},
                         {"epochs", r.epochs},
                         {"seconds", r.seconds}});
  }
  j["rows"] = std::move(rows_json);
  auto sums = nlohmann::ordered_json::array();
  for (const auto& s : summaries()) {
    sums.push_back({{"task", s.task},
                    {"last", s.last},
                    {"best", s.best},
                    {"best_layer", s.best_layer}});
  }
  j["summary"] = std::move(sums);
  return j;
}

ProbeReport ProbeReport::from_json(const nlohmann::json& j) {
  ProbeReport r;
  r.model = j.at("model").get<std::string>();
  r.treebank = j.at("treebank").get<std::string>();
  r.best_by_dev = j.value("best_by_dev", false);
  for (const auto& row : j.at("rows")) {
    LayerScore s;
    s.task = row.at("task").get<std::string>();
    s.layer = row.at("layer").get<std::uint32_t>();
    s.train_f1 = row.at("train_f1").get<double>();
    s.dev_f1 = row.at("dev_f1").get<double>();
    s.test_f1 = row.at("test_f1").get<double>();
    s.epochs = row.value("epochs", 0);
    s.seconds = row.value("seconds", 0.0);
    r.rows.push_back(std::move(s));
  }
  return r;
}

ProbeReport layer_sweep(const SweepInputs& inputs,
                        std::span<const std::uint32_t> layers,
                        const HyperParams& hyper, std::string treebank_name) {
  ProbeReport report;
  report.treebank = std::move(treebank_name);
  report.best_by_dev = hyper.select_best_by_dev;
  std::vector<std::uint32_t> chosen(layers.begin(), layers.end());
  {
    embeddings::Reader reader(inputs.train_embeddings);
    report.model = reader.header().model_name;
    if (chosen.empty()) {
      chosen.resize(reader.header().num_layers);
      std::iota(chosen.begin(), chosen.end(), 0u);
    }
  }
  for (const auto& [task, train_examples] : inputs.train) {
    auto dev_it = inputs.dev.find(task);
    auto test_it = inputs.test.find(task);
    if (dev_it == inputs.dev.end() || test_it == inputs.test.end()) {
      throw std::invalid_argument("task " + std::string(tasks::task_name(task)) +
                                  " lacks dev or test examples");
    }
    for (std::uint32_t layer : chosen) {
      const auto start = std::chrono::steady_clock::now();
      const auto tr = embeddings::slice(inputs.train_embeddings, train_examples, layer);
      const auto dv = embeddings::slice(inputs.dev_embeddings, dev_it->second, layer);
      const auto te = embeddings::slice(inputs.test_embeddings, test_it->second, layer);
      const Dataset train_set{tr.features, tr.dim, tr.labels};
      const Dataset dev_set{dv.features, dv.dim, dv.labels};
      const Dataset test_set{te.features, te.dim, te.labels};
      TrainResult fit = train(train_set, dev_set, hyper);

      LayerScore row;
      row.task = tasks::task_name(task);
      row.layer = layer;
      row.train_f1 = weighted_f1(fit.probe.predict(train_set), train_set.labels);
      row.dev_f1 = dev_set.size() ? weighted_f1(fit.probe.predict(dev_set), dev_set.labels) : 0.0;
      row.test_f1 = test_set.size() ? weighted_f1(fit.probe.predict(test_set), test_set.labels) : 0.0;
      row.epochs = fit.epochs_run;
      row.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::string format_score(double score) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", score);
  return buf;
}

std::string format_best(double score, std::uint32_t layer) {
  return format_score(score) + " (" + std::to_string(layer) + ")";
}

std::string table_tsv(std::span<const ProbeReport> reports) {
  std::vector<std::string> models;
  std::vector<std::pair<std::string, std::string>> row_keys;
  std::map<std::tuple<std::string, std::string, std::string>, TaskSummary> cells;
  for (const auto& r : reports) {
    if (std::find(models.begin(), models.end(), r.model) == models.end()) {
      models.push_back(r.model);
    }
    for (const auto& s : r.summaries()) {
      std::pair key{r.treebank, s.task};
      if (std::find(row_keys.begin(), row_keys.end(), key) == row_keys.end()) {
        row_keys.push_back(key);
      }
      cells[{r.treebank, s.task, r.model}] = s;
    }
  }
  std::string out = "treebank\ttask";
  for (const auto& m : models) out += "\t" + m + " last\t" + m + " best";
  out += '\n';
  for (const auto& [treebank, task] : row_keys) {
    out += treebank + "\t" + task;
    for (const auto& m : models) {
      auto it = cells.find({treebank, task, m});
      if (it == cells.end()) {
        out += "\t-\t-";
      } else {
        out += "\t" + format_score(it->second.last) + "\t" +
               format_best(it->second.best, it->second.best_layer);
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace vyakarana::probe
