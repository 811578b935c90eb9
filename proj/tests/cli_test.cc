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

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "support/synthetic.h"
#include "vyakarana/cli.h"
#include "vyakarana/config.h"

namespace vyakarana::cli {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

void put(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST_CASE("ingest of an empty file succeeds with zero counts") {
  testing::TempDir dir("cli");
  put(dir.file("hi_hdtb-ud-dev.conllu"), "");
  auto r = call({"ingest", dir.file("hi_hdtb-ud-dev.conllu")});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("\tdev\t0\t0\t") != std::string::npos);
}

TEST_CASE("malformed input and bad usage map to distinct exit codes") {
  testing::TempDir dir("cli");
  put(dir.file("bad.conllu"), "1\tx\tx\tNOUN\t_\t_\t0\n");
  auto r = call({"ingest", dir.file("bad.conllu")});
  CHECK(r.code == kExitData);
  CHECK(r.err.find("line 1") != std::string::npos);
  CHECK(call({"ingest", dir.file("absent.conllu")}).code == kExitData);
  CHECK(call({"no-such-command"}).code == kExitUsage);
  CHECK(call({}).code == kExitUsage);
  CHECK(call({"generate-cg"}).code == kExitUsage);
}

TEST_CASE("configuration errors") {
  testing::TempDir dir("cli");
  put(dir.file("a.ini"), "[generation]\nseed = 1\n[bogus]\nx = 1\n");
  CHECK_THROWS_AS(load_config(dir.file("a.ini")), ConfigError);
  put(dir.file("b.ini"), "[paths]\noutput_dir = o\n");
  CHECK_THROWS_AS(load_config(dir.file("b.ini")), ConfigError);  // no seed
  put(dir.file("c.ini"), "[generation]\nseed = 1\nfallback = sometimes\n");
  CHECK_THROWS_AS(load_config(dir.file("c.ini")), ConfigError);
  put(dir.file("d.ini"), "[generation]\nseed = 1\n[paths]\ntrain = nowhere.conllu\n");
  CHECK_THROWS_AS(load_config(dir.file("d.ini")), ConfigError);
  auto r = call({"generate-cg", "-c", dir.file("a.ini")});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("bogus") != std::string::npos);
}

TEST_CASE("the printed default configuration parses") {
  auto r = call({"--print-default-config"});
  REQUIRE(r.code == kExitOk);
  testing::TempDir dir("cli");
  // Point the input paths at files that exist.
  for (auto s : {"train", "dev", "test"}) {
    put(dir.file(std::string("hi_hdtb-ud-") + s + ".conllu"), "");
  }
  put(dir.file("default.ini"), r.out);
  auto cfg = load_config(dir.file("default.ini"));
  CHECK(cfg.generation.seed == 42);
  CHECK(cfg.hyper.batch_size == 256);
  CHECK(cfg.hyper.learning_rate == 1e-3);
  CHECK(cfg.tasks.size() == 4);
}

const std::string kPipelineConfig =
    "[paths]\n"
    "train = hi_hdtb-ud-train.conllu\n"
    "dev = hi_hdtb-ud-dev.conllu\n"
    "test = hi_hdtb-ud-test.conllu\n"
    "output_dir = out\n"
    "[generation]\n"
    "seed = 7\n"
    "[probe]\n"
    "batch_size = 32\n"
    "learning_rate = 0.02\n"
    "max_epochs = 4\n"
    "layers = 0,2\n";

TEST_CASE("end-to-end run on a small synthetic treebank") {
  testing::TempDir dir("cli");
  conllu::write_file(dir.file("hi_hdtb-ud-train.conllu"),
                     testing::synthetic_treebank(40, 1, conllu::Split::kTrain, "tr"));
  conllu::write_file(dir.file("hi_hdtb-ud-dev.conllu"),
                     testing::synthetic_treebank(12, 2, conllu::Split::kDev, "dv"));
  conllu::write_file(dir.file("hi_hdtb-ud-test.conllu"),
                     testing::synthetic_treebank(12, 3, conllu::Split::kTest, "te"));
  put(dir.file("run.ini"), kPipelineConfig);
  const auto cfg = dir.file("run.ini");

  auto gen = call({"generate-cg", "-c", cfg, "-j", "2"});
  REQUIRE_MESSAGE(gen.code == kExitOk, gen.err);
  const auto cg_train = slurp(dir.file("out/cg/train.conllu"));
  CHECK_FALSE(cg_train.empty());
  CHECK(slurp(dir.file("out/cg/gender_report.tsv")).find("CG-HDTB\ttrain") !=
        std::string::npos);
  REQUIRE(call({"generate-cg", "-c", cfg}).code == kExitOk);
  CHECK(slurp(dir.file("out/cg/train.conllu")) == cg_train);

  auto tasks_run = call({"build-tasks", "-c", cfg});
  REQUIRE_MESSAGE(tasks_run.code == kExitOk, tasks_run.err);
  CHECK(slurp(dir.file("out/tasks/summary.tsv")).find("CG-HDTB\tSTDP\ttrain\t48") !=
        std::string::npos);

  // Missing embeddings are reported by path.
  put(dir.file("probe.ini"), kPipelineConfig +
                                 "[embeddings]\n"
                                 "train = train.vyke\n"
                                 "dev = dev.vyke\n"
                                 "test = test.vyke\n");
  auto missing = call({"probe-sweep", "-c", dir.file("probe.ini")});
  CHECK(missing.code != kExitOk);
  CHECK(missing.err.find("train.vyke") != std::string::npos);

  for (auto split : {"train", "dev", "test"}) {
    auto tb = conllu::read_file(dir.file(std::string("out/cg/") + split + ".conllu"));
    auto sva = tasks::read_jsonl(dir.file(std::string("out/tasks/CG-HDTB/SVA-") + split + ".jsonl"));
    testing::write_embeddings(dir.file(std::string(split) + ".vyke"), tb, sva, 3, 16, 5);
  }
  auto sweep = call({"probe-sweep", "-c", dir.file("probe.ini")});
  REQUIRE_MESSAGE(sweep.code == kExitOk, sweep.err);
  const auto stem = dir.file("out/probe/synthetic-encoder_CG-HDTB");
  const auto csv = slurp(stem + ".layers.csv");
  CHECK(csv.rfind("task,layer,split,weighted_f1\n", 0) == 0);
  auto manifest = nlohmann::json::parse(slurp(stem + ".manifest.json"));
  CHECK(manifest["hyperparameters"]["learning_rate"] == 0.02);
  CHECK(manifest["hyperparameters"]["batch_size"] == 32);
  CHECK(manifest["layers"] == nlohmann::json::array({0, 2}));

  REQUIRE(call({"probe-sweep", "-c", dir.file("probe.ini")}).code == kExitOk);
  CHECK(slurp(stem + ".layers.csv") == csv);

  auto one = call({"probe-train", "-c", dir.file("probe.ini"), "--task", "POS",
                   "--layer", "1"});
  CHECK(one.code == kExitOk);
  CHECK(call({"probe-train", "-c", dir.file("probe.ini"), "--task", "XPOS",
              "--layer", "1"}).code == kExitUsage);

  auto table = call({"report", stem + ".report.json", "-o", dir.file("table.tsv")});
  REQUIRE(table.code == kExitOk);
  const auto tsv = slurp(dir.file("table.tsv"));
  CHECK(tsv.find("synthetic-encoder last") != std::string::npos);
  CHECK(tsv.find("CG-HDTB\tPOS") != std::string::npos);
}

TEST_CASE("report on a single toy row") {
  testing::TempDir dir("cli");
  put(dir.file("toy.report.json"),
      R"({"model":"toy","treebank":"HDTB","best_by_dev":false,"rows":[)"
      R"({"task":"POS","layer":0,"train_f1":0.5,"dev_f1":0.5,"test_f1":0.25,"epochs":1,"seconds":0.0}]})");
  auto r = call({"report", dir.file("toy.report.json")});
  REQUIRE_MESSAGE(r.code == kExitOk, r.err);
  CHECK(r.out.find("HDTB\tPOS\t0.2500\t0.2500 (0)") != std::string::npos);
  put(dir.file("broken.report.json"), "{");
  CHECK(call({"report", dir.file("broken.report.json")}).code == kExitData);
}

}  // namespace
}  // namespace vyakarana::cli
