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

#include <doctest.h>

#include <cstring>
#include <map>
#include <set>

#include "support/probe_fixtures.h"
#include "vyakarana/probe.h"
#include "vyakarana/rng.h"

namespace vyakarana::probe {
namespace {

using Labels = std::vector<std::string>;

// Straight from a confusion count, one class at a time.
double f1_oracle(const Labels& pred, const Labels& gold) {
  std::set<std::string> classes(gold.begin(), gold.end());
  double total = 0;
  for (const auto& c : classes) {
    double tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool p = pred[i] == c, g = gold[i] == c;
      tp += p && g;
      fp += p && !g;
      fn += !p && g;
      support += g;
    }
    const double prec = tp + fp > 0 ? tp / (tp + fp) : 0;
    const double rec = tp + fn > 0 ? tp / (tp + fn) : 0;
    const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0;
    total += support / static_cast<double>(gold.size()) * f1;
  }
  return total;
}

TEST_CASE("weighted F1 on the four-item example") {
  Labels gold{"a", "a", "b", "b"}, pred{"a", "b", "b", "b"};
  CHECK(std::abs(weighted_f1(pred, gold) - 11.0 / 15.0) < 1e-9);
  CHECK(weighted_f1(gold, gold) == 1.0);
  Labels none{"c", "c", "c", "c"};
  CHECK(weighted_f1(none, gold) == 0.0);
  CHECK_THROWS_AS(weighted_f1(Labels{}, Labels{}), std::invalid_argument);
  CHECK_THROWS_AS(weighted_f1(Labels{"a"}, gold), std::invalid_argument);
}

TEST_CASE("property: weighted F1 matches the oracle and ignores joint permutation") {
  Rng rng(5);
  const Labels alphabet{"a", "b", "c", "d", "e"};
  for (int round = 0; round < 300; ++round) {
    const std::size_t n = 1 + uniform_index(rng, 40);
    Labels gold(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = alphabet[uniform_index(rng, 4)];
      pred[i] = alphabet[uniform_index(rng, 5)];
    }
    const double score = weighted_f1(pred, gold);
    CHECK(std::abs(score - f1_oracle(pred, gold)) < 1e-12);
    for (std::size_t i = n; i > 1; --i) {
      const auto j = uniform_index(rng, i);
      std::swap(gold[i - 1], gold[j]);
      std::swap(pred[i - 1], pred[j]);
    }
    CHECK(std::abs(weighted_f1(pred, gold) - score) < 1e-12);
  }
}

TEST_CASE("weighted F1 equals accuracy on balanced symmetric confusions") {
  // Two classes, equal support, one mistake each way.
  Labels gold{"a", "a", "a", "b", "b", "b"}, pred{"a", "a", "b", "b", "b", "a"};
  CHECK(std::abs(weighted_f1(pred, gold) - 4.0 / 6.0) < 1e-12);
}

TEST_CASE("majority share") {
  CHECK(majority_share(Labels{"a", "b", "b", "c"}) == 0.5);
}

TEST_CASE("analytic gradients agree with central differences") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CHECK(testing::gradient_check(1 + seed % 7, 2 + seed % 4, 1 + seed % 5, seed) < 1e-4);
  }
}

TEST_CASE("cross entropy stays finite for huge logits") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Constant(2, 1, 1e4);
  w(1, 0) = -1e4;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(1, 1, 10.0);
  std::vector<int> y{1};
  const double loss = cross_entropy(w, b, x, y, nullptr, nullptr);
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(2e5));
}

// Default step size and batch size only move the weights far enough when
// there are enough batches per epoch, hence the large sets below.
TEST_CASE("a separable two-class plane is learned exactly with defaults") {
  auto train_set = testing::gaussian_blobs(20000, 2, 2, 8.0, 1);
  auto dev_set = testing::gaussian_blobs(300, 2, 2, 8.0, 2);
  auto r = train(train_set.view(), dev_set.view());
  CHECK(r.best_dev_f1 == 1.0);
  CHECK(r.epochs_run <= 20);
}

TEST_CASE("separable four-class blobs reach 0.99") {
  auto train_set = testing::gaussian_blobs(20000, 4, 8, 8.0, 3);
  auto dev_set = testing::gaussian_blobs(500, 4, 8, 8.0, 4);
  auto test_set = testing::gaussian_blobs(500, 4, 8, 8.0, 5);
  auto r = train(train_set.view(), dev_set.view());
  auto pred = r.probe.predict(test_set.view());
  CHECK(weighted_f1(pred, test_set.labels) >= 0.99);
}

TEST_CASE("shuffled labels fall to the majority baseline") {
  auto train_set = testing::shuffle_labels(testing::gaussian_blobs(20000, 4, 8, 8.0, 6), 7);
  auto dev_set = testing::shuffle_labels(testing::gaussian_blobs(500, 4, 8, 8.0, 8), 9);
  auto test_set = testing::shuffle_labels(testing::gaussian_blobs(500, 4, 8, 8.0, 10), 11);
  auto r = train(train_set.view(), dev_set.view());
  auto pred = r.probe.predict(test_set.view());
  CHECK(weighted_f1(pred, test_set.labels) <= majority_share(test_set.labels) + 0.05);
}

bool same_bits(const LinearProbe& a, const LinearProbe& b) {
  return a.weights.size() == b.weights.size() &&
         std::memcmp(a.weights.data(), b.weights.data(),
                     sizeof(double) * static_cast<std::size_t>(a.weights.size())) == 0 &&
         std::memcmp(a.bias.data(), b.bias.data(),
                     sizeof(double) * static_cast<std::size_t>(a.bias.size())) == 0;
}

TEST_CASE("identical seeds give bit-identical probes") {
  auto train_set = testing::gaussian_blobs(700, 3, 5, 2.0, 12);
  auto dev_set = testing::gaussian_blobs(200, 3, 5, 2.0, 13);
  auto a = train(train_set.view(), dev_set.view());
  auto b = train(train_set.view(), dev_set.view());
  CHECK(same_bits(a.probe, b.probe));
  CHECK(a.dev_curve == b.dev_curve);

  HyperParams other;
  other.shuffle_seed = 7;
  auto c = train(train_set.view(), dev_set.view(), other);
  CHECK_FALSE(same_bits(a.probe, c.probe));
}

TEST_CASE("training on one class is an error") {
  testing::Blobs one;
  one.dim = 1;
  one.features = {1.f, 2.f};
  one.labels = {"x", "x"};
  CHECK_THROWS_AS(train(one.view(), one.view()), TrainingError);
}

TEST_CASE("classes unseen in training score zero without crashing") {
  auto train_set = testing::gaussian_blobs(300, 2, 3, 6.0, 14);
  auto dev_set = train_set;
  dev_set.labels[0] = "novel";
  auto r = train(train_set.view(), dev_set.view(), testing::quick_hyper());
  auto pred = r.probe.predict(dev_set.view());
  CHECK(pred[0] != "novel");
  CHECK(weighted_f1(pred, dev_set.labels) < 1.0);
}

TEST_CASE("property: duplicating the training set leaves dev F1 within 0.01") {
  auto train_set = testing::gaussian_blobs(20000, 3, 6, 3.0, 15);
  auto dev_set = testing::gaussian_blobs(2000, 3, 6, 3.0, 16);
  auto doubled = train_set;
  doubled.features.insert(doubled.features.end(), train_set.features.begin(),
                          train_set.features.end());
  doubled.labels.insert(doubled.labels.end(), train_set.labels.begin(),
                        train_set.labels.end());
  auto a = train(train_set.view(), dev_set.view());
  auto b = train(doubled.view(), dev_set.view());
  CHECK(std::abs(a.best_dev_f1 - b.best_dev_f1) <= 0.01);
}

TEST_CASE("report cells") {
  CHECK(format_score(0.886) == "0.8860");
  CHECK(format_best(0.89554, 5) == "0.8955 (5)");

  ProbeReport r;
  r.model = "m";
  r.treebank = "CG-HDTB";
  r.rows = {{"POS", 0, 0.5, 0.5, 0.6, 3, 0.1},
            {"POS", 1, 0.7, 0.7, 0.9, 4, 0.1},
            {"POS", 2, 0.8, 0.8, 0.9, 5, 0.1}};
  auto s = r.summaries();
  REQUIRE(s.size() == 1);
  CHECK(s[0].last == 0.9);
  CHECK(s[0].best == 0.9);
  CHECK(s[0].best_layer == 1);  // tie goes to the lower layer
  r.best_by_dev = true;
  CHECK(r.summaries()[0].best_layer == 2);

  CHECK(ProbeReport::from_json(r.to_json()).layer_csv() == r.layer_csv());
  std::vector<ProbeReport> one{r};
  auto tsv = table_tsv(one);
  CHECK(tsv.find("m last") != std::string::npos);
  CHECK(tsv.find("0.9000 (2)") != std::string::npos);
}

}  // namespace
}  // namespace vyakarana::probe
