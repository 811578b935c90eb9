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

#include "vyakarana/cli.h"

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vyakarana/cg_generator.h"
#include "vyakarana/config.h"
#include "vyakarana/conllu.h"
#include "vyakarana/embedding_store.h"
#include "vyakarana/probe.h"
#include "vyakarana/tasks.h"

namespace vyakarana::cli {

namespace fs = std::filesystem;

namespace {

// Inputs that exist but cannot be used.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr std::array<conllu::Split, 3> kSplits = {
    conllu::Split::kTrain, conllu::Split::kDev, conllu::Split::kTest};

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("error writing " + path.string());
}

conllu::Treebank read_split(const std::string& path, conllu::Split split) {
  if (path.empty()) {
    throw ConfigError("no path configured for the " +
                      std::string(conllu::split_name(split)) + " split");
  }
  auto tb = conllu::read_file(path);
  tb.split = split;
  return tb;
}

void report_warnings(const conllu::Treebank& tb, std::ostream& err) {
  for (const auto& w : tb.warnings) err << tb.source_path << ": " << w << '\n';
}

std::string slug(std::string s) {
  for (auto& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' &&
        c != '.') {
      c = '_';
    }
  }
  return s;
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string config_path;
  unsigned jobs = 1;

  RunConfig config() const {
    if (config_path.empty()) throw ConfigError("--config is required");
    RunConfig c = load_config(config_path);
    c.generation.jobs = jobs;
    return c;
  }
};

int cmd_ingest(Context& ctx, const std::vector<std::string>& files,
               bool strict) {
  ctx.out << "file\tsplit\tsentences\ttokens\tmasculine\tfeminine\tskipped\n";
  for (const auto& path : files) {
    auto tb = conllu::read_file(path, {strict});
    report_warnings(tb, ctx.err);
    auto g = cg::gender_report(tb);
    ctx.out << path << '\t'
            << (conllu::split_from_path(path) ? conllu::split_name(tb.split)
                                              : std::string_view("-"))
            << '\t' << tb.sentences.size() << '\t' << tb.token_count() << '\t'
            << g.masc << " (" << cg::format_share(g.masc_share()) << ")\t"
            << g.fem << " (" << cg::format_share(g.fem_share()) << ")\t"
            << tb.warnings.size() << '\n';
  }
  return kExitOk;
}

std::string gender_row(std::string_view name, const conllu::Treebank& tb) {
  auto g = cg::gender_report(tb);
  std::ostringstream row;
  row << name << '\t' << conllu::split_name(tb.split) << '\t'
      << tb.sentences.size() << '\t' << g.masc << '\t'
      << cg::format_share(g.masc_share()) << '\t' << g.fem << '\t'
      << cg::format_share(g.fem_share()) << '\n';
  return row.str();
}

int cmd_generate(Context& ctx) {
  const RunConfig config = ctx.config();
  cg::SourceSplits source{read_split(config.train, conllu::Split::kTrain),
                          read_split(config.dev, conllu::Split::kDev),
                          read_split(config.test, conllu::Split::kTest)};
  for (const auto* tb : {&source.train, &source.dev, &source.test}) {
    report_warnings(*tb, ctx.err);
  }
  const cg::CgOutput result = cg::generate_cg(source, config.generation);
  const fs::path dir = config.cg_dir();

  std::string gender = "treebank\tsplit\tsentences\tmasculine\tmasculine_pct\tfeminine\tfeminine_pct\n";
  for (const auto* tb : {&source.train, &source.dev, &source.test}) {
    gender += gender_row(config.name, *tb);
  }
  std::string stats =
      "split\tsource_sentences\tgenerated\tdropped\tslots\tsubstituted\t"
      "fallback_slots\tbalance_deficit\tadjusted_adpositions\n";
  for (const auto* split : {&result.train, &result.dev, &result.test}) {
    const auto name = std::string(conllu::split_name(split->treebank.split));
    write_text(dir / (name + ".conllu"), conllu::serialize(split->treebank));
    write_text(dir / (name + ".provenance.jsonl"),
               cg::provenance_jsonl(split->provenance));
    gender += gender_row(config.cg_name, split->treebank);
    const auto& s = split->stats;
    stats += name + '\t' + std::to_string(s.source_sentences) + '\t' +
             std::to_string(s.generated) + '\t' + std::to_string(s.dropped) +
             '\t' + std::to_string(s.slots) + '\t' +
             std::to_string(s.substituted) + '\t' +
             std::to_string(s.fallback_slots) + '\t' +
             std::to_string(s.balance_deficit) + '\t' +
             std::to_string(s.adjusted_adpositions) + '\n';
    if (s.dropped) {
      ctx.err << name << ": dropped " << s.dropped
              << " sentence variant(s) with empty donor pools\n";
    }
    if (s.balance_deficit) {
      ctx.err << name << ": " << s.balance_deficit
              << " slot(s) kept their original gender for lack of donors\n";
    }
  }
  write_text(dir / "gender_report.tsv", gender);
  write_text(dir / "generation_stats.tsv", stats);
  ctx.out << "index: " << result.index_keys << " keys, "
          << result.index_entries << " donor entries\n"
          << gender << '\n'
          << stats;
  return kExitOk;
}

int cmd_build_tasks(Context& ctx) {
  const RunConfig config = ctx.config();
  std::string summary = "treebank\ttask\tsplit\texamples\n";
  std::string labels = "treebank\ttask\tsplit\tlabel\tcount\n";
  for (const auto& which : config.task_treebanks) {
    const bool is_cg = which == "cg";
    const std::string name = is_cg ? config.cg_name : config.name;
    for (auto split : kSplits) {
      const std::string split_name(conllu::split_name(split));
      std::string path;
      if (is_cg) {
        path = config.cg_dir() + "/" + split_name + ".conllu";
        if (!fs::exists(path)) {
          throw DataError("missing " + path + " (run generate-cg first)");
        }
      } else {
        path = split == conllu::Split::kTrain ? config.train
               : split == conllu::Split::kDev ? config.dev
                                              : config.test;
      }
      const auto tb = read_split(path, split);
      report_warnings(tb, ctx.err);
      for (auto task : config.tasks) {
        tasks::GcmStats gcm_stats;
        const auto examples =
            task == tasks::Task::kGcm
                ? tasks::build_gcm(tb, config.task_options, &gcm_stats)
                : tasks::build(task, tb, config.task_options);
        const std::string task_name(tasks::task_name(task));
        write_text(fs::path(config.tasks_dir()) / slug(name) /
                       (task_name + "-" + split_name + ".jsonl"),
                   tasks::to_jsonl(examples));
        summary += name + '\t' + task_name + '\t' + split_name + '\t' +
                   std::to_string(examples.size()) + '\n';
        for (const auto& [label, count] : tasks::label_histogram(examples)) {
          labels += name + '\t' + task_name + '\t' + split_name + '\t' + label +
                    '\t' + std::to_string(count) + '\n';
        }
        if (gcm_stats.skipped_unmapped_case) {
          ctx.err << name << " " << split_name << ": skipped "
                  << gcm_stats.skipped_unmapped_case
                  << " token(s) with unmapped Case values\n";
        }
      }
    }
  }
  write_text(fs::path(config.tasks_dir()) / "summary.tsv", summary);
  write_text(fs::path(config.tasks_dir()) / "labels.tsv", labels);
  ctx.out << summary;
  return kExitOk;
}

probe::SweepInputs sweep_inputs(const RunConfig& config,
                                const std::vector<tasks::Task>& task_list) {
  probe::SweepInputs in;
  in.train_embeddings = config.embeddings_train;
  in.dev_embeddings = config.embeddings_dev;
  in.test_embeddings = config.embeddings_test;
  for (const auto* p : {&in.train_embeddings, &in.dev_embeddings,
                        &in.test_embeddings}) {
    if (p->empty()) throw ConfigError("embeddings.train/dev/test must all be set");
    if (!fs::exists(*p)) throw DataError("missing embedding file " + *p);
  }
  const fs::path dir = fs::path(config.tasks_dir()) / slug(config.probe_treebank);
  for (auto task : task_list) {
    for (auto split : kSplits) {
      const fs::path path = dir / (std::string(tasks::task_name(task)) + "-" +
                                   std::string(conllu::split_name(split)) +
                                   ".jsonl");
      if (!fs::exists(path)) {
        throw DataError("missing task file " + path.string() +
                        " (run build-tasks first)");
      }
      auto examples = tasks::read_jsonl(path.string());
      auto& slot = split == conllu::Split::kTrain ? in.train
                   : split == conllu::Split::kDev ? in.dev
                                                  : in.test;
      slot[task] = std::move(examples);
    }
  }
  return in;
}

void write_report(const RunConfig& config, const probe::ProbeReport& report,
                  const std::string& stem, std::ostream& out) {
  const fs::path dir = config.probe_dir();
  write_text(dir / (stem + ".report.json"), report.to_json().dump(2) + "\n");
  write_text(dir / (stem + ".layers.csv"), report.layer_csv());
  nlohmann::ordered_json manifest;
  manifest["model"] = report.model;
  manifest["treebank"] = report.treebank;
  manifest["hyperparameters"] = config.hyper.to_json();
  manifest["layers"] = config.layers;
  manifest["config"] = config.to_json();
  write_text(dir / (stem + ".manifest.json"), manifest.dump(2) + "\n");
  out << "task\tlayer\ttrain_f1\tdev_f1\ttest_f1\tepochs\n";
  for (const auto& r : report.rows) {
    out << r.task << '\t' << r.layer << '\t' << probe::format_score(r.train_f1)
        << '\t' << probe::format_score(r.dev_f1) << '\t'
        << probe::format_score(r.test_f1) << '\t' << r.epochs << '\n';
  }
}

int cmd_probe_train(Context& ctx, const std::string& task_name,
                    std::uint32_t layer) {
  const RunConfig config = ctx.config();
  tasks::Task task;
  try {
    task = tasks::parse_task(task_name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto inputs = sweep_inputs(config, {task});
  const std::array<std::uint32_t, 1> layers = {layer};
  const auto report = probe::layer_sweep(inputs, layers, config.hyper,
                                         config.probe_treebank);
  write_report(config, report,
               slug(report.model) + "_" + slug(config.probe_treebank) + "_" +
                   task_name + "_layer" + std::to_string(layer),
               ctx.out);
  return kExitOk;
}

int cmd_probe_sweep(Context& ctx) {
  const RunConfig config = ctx.config();
  const auto inputs = sweep_inputs(config, config.tasks);
  const auto report = probe::layer_sweep(inputs, config.layers, config.hyper,
                                         config.probe_treebank);
  write_report(config, report,
               slug(report.model) + "_" + slug(config.probe_treebank), ctx.out);
  ctx.out << '\n' << probe::table_tsv(std::span(&report, 1));
  return kExitOk;
}

int cmd_report(Context& ctx, const std::vector<std::string>& files,
               const std::string& output) {
  std::vector<probe::ProbeReport> reports;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw DataError("missing report file " + f);
    try {
      reports.push_back(probe::ProbeReport::from_json(nlohmann::json::parse(in)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(f + ": " + e.what());
    }
  }
  const std::string table = probe::table_tsv(reports);
  if (output.empty()) {
    ctx.out << table;
  } else {
    write_text(output, table);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Colorless-green treebanks, syntactic probing tasks and "
               "layer-wise linear probes.",
               "vyakarana"};
  app.require_subcommand(0, 1);
  // Let global options such as --jobs follow the subcommand too.
  app.fallthrough();
  Context ctx{out, err, {}, 1};
  bool print_default = false;
  app.add_flag("--print-default-config", print_default,
               "Print the default configuration and exit");
  app.add_option("--jobs,-j", ctx.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);

  std::function<int()> action;

  std::vector<std::string> ingest_files;
  bool strict = false;
  auto* ingest = app.add_subcommand("ingest", "Parse CoNLL-U files and print counts");
  ingest->add_option("files", ingest_files, "CoNLL-U files")->required();
  ingest->add_flag("--strict", strict, "Fail on sentences with invalid trees");
  ingest->callback([&] { action = [&] { return cmd_ingest(ctx, ingest_files, strict); }; });

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config,-c", ctx.config_path, "Run configuration")
        ->required();
  };

  auto* gen = app.add_subcommand("generate-cg", "Generate the colorless-green treebank");
  add_config(gen);
  gen->callback([&] { action = [&] { return cmd_generate(ctx); }; });

  auto* build = app.add_subcommand("build-tasks", "Build POS/STDP/GCM/SVA datasets");
  add_config(build);
  build->callback([&] { action = [&] { return cmd_build_tasks(ctx); }; });

  std::string task_name;
  std::uint32_t layer = 0;
  auto* ptrain = app.add_subcommand("probe-train", "Train one probe for a task and layer");
  add_config(ptrain);
  ptrain->add_option("--task", task_name, "POS, STDP, GCM or SVA")->required();
  ptrain->add_option("--layer", layer, "Layer index")->required();
  ptrain->callback([&] { action = [&] { return cmd_probe_train(ctx, task_name, layer); }; });

  auto* sweep = app.add_subcommand("probe-sweep", "Probe every configured task and layer");
  add_config(sweep);
  sweep->callback([&] { action = [&] { return cmd_probe_sweep(ctx); }; });

  std::vector<std::string> report_files;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Merge sweep reports into a last/best table");
  report->add_option("reports", report_files, "*.report.json files")->required();
  report->add_option("--output,-o", report_out, "Write the TSV here instead of stdout");
  report->callback([&] { action = [&] { return cmd_report(ctx, report_files, report_out); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (print_default) {
    out << default_config_text();
    return kExitOk;
  }
  if (!action) {
    err << app.help();
    return kExitUsage;
  }
  try {
    return action();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const conllu::ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitData;
  } catch (const embeddings::FormatError& e) {
    err << "embedding file error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace vyakarana::cli
