// tools/intentforge_cli.cpp

// Copyright 2026  The intentforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "intentforge/pipeline.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace intentforge;

namespace {

// Settings keys that a bare flag sets for every stage at once.
const std::set<std::string> kPerStageKeys = {"epochs", "batch_m", "lr", "tau",
                                             "eta",    "alpha",   "knn_k"};

struct Options {
  std::string config;
  Settings flags;
  std::vector<std::string> sets;
  int stage = 0;
  std::string assignments;
};

void AddFlag(CLI::App *app, Options &opts, const std::string &flag,
             const std::string &key, const std::string &help) {
  app->add_option_function<std::string>(
      flag, [&opts, key](const std::string &v) { opts.flags[key] = v; }, help);
}

void AddCommonFlags(CLI::App *app, Options &opts) {
  app->add_option("--config", opts.config, "key=value config file");
  AddFlag(app, opts, "--corpus", "corpus", "target dialogue corpus (JSON lines)");
  AddFlag(app, opts, "--labeled", "labeled", "labeled corpus for stage 2");
  AddFlag(app, opts, "--embeddings", "embeddings", "precomputed embeddings file");
  AddFlag(app, opts, "--heldout", "heldout", "labeled held-out corpus for task 2");
  AddFlag(app, opts, "--init", "init", "starting checkpoint");
  AddFlag(app, opts, "--out", "out", "output directory");
  AddFlag(app, opts, "--seed", "seed", "random seed (default 42)");
  AddFlag(app, opts, "--k", "k", "number of clusters, or 'auto'");
  AddFlag(app, opts, "--k-min", "k_min", "smallest k for selection");
  AddFlag(app, opts, "--k-max", "k_max", "largest k for selection");
  AddFlag(app, opts, "--task", "task", "evaluation task, 1 or 2");
  AddFlag(app, opts, "--tau", "tau", "contrastive temperature");
  AddFlag(app, opts, "--knn-k", "knn_k", "neighbors per utterance in stage 2");
  AddFlag(app, opts, "--eta", "eta", "clustering loss weight in stage 3");
  AddFlag(app, opts, "--batch-m", "batch_m", "batch size");
  AddFlag(app, opts, "--epochs", "epochs", "training epochs");
  AddFlag(app, opts, "--lr", "lr", "learning rate");
  app->add_option("--set", opts.sets, "extra key=value setting (repeatable)");
}

PipelineConfig ResolveConfig(const Options &opts) {
  Settings settings;
  if (!opts.config.empty()) settings = ReadSettingsFile(opts.config);
  for (const auto &entry : opts.sets) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error("config: --set expects key=value, got '" + entry + "'");
    settings[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  // A bare flag beats per-stage values from the config file.
  for (const auto &[key, value] : opts.flags) {
    if (kPerStageKeys.count(key))
      for (const char *prefix : {"stage1.", "stage2.", "stage3."})
        settings.erase(prefix + key);
    settings[key] = value;
  }
  return PipelineConfig::FromSettings(settings);
}

fs::path OutDir(const PipelineConfig &cfg) {
  if (cfg.out_dir.empty()) throw Error("missing --out");
  fs::create_directories(cfg.out_dir);
  return cfg.out_dir;
}

template <typename Writer>
void WriteTo(const fs::path &path, Writer &&writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  writer(out);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

const std::string &Require(const std::string &value, const char *flag) {
  if (value.empty()) throw Error(std::string("missing ") + flag);
  return value;
}

std::vector<Utterance> TargetItems(const PipelineConfig &cfg) {
  const Corpus corpus = ReadCorpusFile(Require(cfg.corpus, "--corpus"));
  return cfg.task == 2 ? SelectTask2Utterances(corpus) : SelectTask1Utterances(corpus);
}

std::vector<std::string> TextsOf(const std::vector<Utterance> &items) {
  std::vector<std::string> texts;
  for (const auto &u : items) texts.push_back(u.text);
  return texts;
}

std::vector<std::string> IdsOf(const std::vector<Utterance> &items) {
  std::vector<std::string> ids;
  for (const auto &u : items) ids.push_back(u.id);
  return ids;
}

int RunIngest(const PipelineConfig &cfg) {
  const Corpus corpus = ReadCorpusFile(Require(cfg.corpus, "--corpus"));
  nlohmann::ordered_json summary;
  summary["dialogues"] = corpus.dialogues.size();
  summary["utterances"] = corpus.NumUtterances();
  summary["dropped_turns"] = corpus.dropped_turns;
  summary["task1_utterances"] = SelectTask1Utterances(corpus).size();
  summary["task2_utterances"] = SelectTask2Utterances(corpus).size();
  summary["consecutive_pairs"] = ConsecutivePairs(corpus).size();
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int RunTrain(const PipelineConfig &cfg, int stage) {
  const std::string name = "stage " + std::to_string(stage);
  const fs::path out = OutDir(cfg);
  try {
    EncoderParams params =
        cfg.init.empty()
            ? InitParams(cfg.seed, cfg.feature_dim, cfg.hidden_dim, cfg.embed_dim)
            : LoadCheckpoint(cfg.init).params;
    Checkpoint checkpoint;
    TrainLog log;
    if (stage == 1) {
      const Corpus corpus = ReadCorpusFile(Require(cfg.corpus, "--corpus"));
      params = TrainStage1(corpus, std::move(params), cfg.stage1_train, &log);
    } else if (stage == 2) {
      const Corpus labeled = ReadCorpusFile(Require(cfg.labeled, "--labeled"));
      const auto items = SelectTask1Utterances(labeled);
      std::vector<std::string> labels;
      for (const auto &u : items) labels.push_back(PrimaryIntent(u));
      params = TrainStage2(TextsOf(items), labels, std::move(params),
                           cfg.stage2_train, &log);
    } else {
      const auto texts = TextsOf(TargetItems(cfg));
      std::size_t k = 0;
      if (cfg.k) {
        k = *cfg.k;
      } else {
        const auto points = Embed(params, texts).values;
        const auto n = static_cast<std::size_t>(points.rows());
        if (n < 3) throw Error("need at least 3 utterances to choose k");
        k = SelectK(points, std::min(cfg.k_min, n - 1), std::min(cfg.k_max, n - 1),
                    cfg.seed, cfg.restarts)
                .chosen_k;
      }
      auto result = TrainStage3(texts, k, std::move(params), cfg.stage3_train, &log);
      params = std::move(result.params);
      checkpoint.centroids = std::move(result.centroids);
    }
    checkpoint.params = std::move(params);
    SaveCheckpoint(checkpoint, (out / "checkpoint.txt").string());
    if (!cfg.corpus.empty()) {
      const auto items = TargetItems(cfg);
      const auto embeddings = Embed(checkpoint.params, TextsOf(items), IdsOf(items));
      WriteTo(out / "embeddings.txt",
              [&](std::ostream &o) { WriteEmbeddings(embeddings, o); });
    }
    for (std::size_t e = 0; e < log.epoch_loss.size(); ++e)
      std::cout << "epoch " << e + 1 << " loss " << log.epoch_loss[e] << '\n';
  } catch (const Error &e) {
    throw Error(name + ": " + e.what());
  }
  return 0;
}

EmbeddingMatrix LoadPoints(const PipelineConfig &cfg) {
  if (!cfg.embeddings.empty()) return LoadEmbeddings(cfg.embeddings);
  const auto items = TargetItems(cfg);
  const EncoderParams params =
      cfg.init.empty()
          ? InitParams(cfg.seed, cfg.feature_dim, cfg.hidden_dim, cfg.embed_dim)
          : LoadCheckpoint(cfg.init).params;
  return Embed(params, TextsOf(items), IdsOf(items));
}

int RunCluster(const PipelineConfig &cfg) {
  try {
    const auto points = LoadPoints(cfg);
    if (!cfg.k) throw Error("missing --k (use select-k to choose one)");
    const auto model = KMeans(points.values, *cfg.k, cfg.seed, cfg.restarts);
    const fs::path out = OutDir(cfg);
    WriteTo(out / "assignments.csv", [&](std::ostream &o) {
      WriteAssignmentsCsv(points.ids, model.assignments, o);
    });
    std::cout << "k " << *cfg.k << " inertia " << model.inertia << '\n';
  } catch (const Error &e) {
    throw Error(std::string("cluster: ") + e.what());
  }
  return 0;
}

int RunSelectK(const PipelineConfig &cfg) {
  try {
    const auto points = LoadPoints(cfg);
    const auto result = SelectK(points.values, cfg.k_min, cfg.k_max, cfg.seed, cfg.restarts);
    if (!cfg.out_dir.empty())
      WriteTo(OutDir(cfg) / "k_selection.csv",
              [&](std::ostream &o) { WriteKSelectionCsv(result, o); });
    WriteKSelectionCsv(result, std::cout);
    std::cout << "chosen k " << result.chosen_k << '\n';
  } catch (const Error &e) {
    throw Error(std::string("select-k: ") + e.what());
  }
  return 0;
}

std::pair<std::vector<std::string>, std::vector<int>> LoadAssignments(
    const std::string &path) {
  std::ifstream in(Require(path, "--assignments"));
  if (!in) throw Error("cannot open '" + path + "'");
  return ReadAssignmentsCsv(in);
}

int RunEvaluate(const PipelineConfig &cfg, const std::string &assignments_path) {
  try {
    const auto [ids, clusters] = LoadAssignments(assignments_path);
    const auto items = TargetItems(cfg);
    std::unordered_map<std::string, const Utterance *> by_id;
    for (const auto &u : items) by_id[u.id] = &u;
    MetricsReport report;
    if (cfg.task == 1) {
      std::vector<std::string> refs;
      for (const auto &id : ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw Error("no reference intent for '" + id + "'");
        refs.push_back(PrimaryIntent(*it->second));
      }
      report = Evaluate(clusters, refs, "task1");
    } else {
      std::map<int, std::vector<std::string>> groups;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto it = by_id.find(ids[i]);
        if (it == by_id.end()) throw Error("unknown utterance '" + ids[i] + "'");
        groups[clusters[i]].push_back(it->second->text);
      }
      std::vector<std::vector<std::string>> induced;
      for (auto &[cluster, texts] : groups) induced.push_back(std::move(texts));
      const auto heldout =
          SelectTask1Utterances(ReadCorpusFile(Require(cfg.heldout, "--heldout")));
      std::vector<std::string> refs;
      for (const auto &u : heldout) refs.push_back(PrimaryIntent(u));
      const EncoderParams params = LoadCheckpoint(Require(cfg.init, "--init")).params;
      report = Task2Eval(induced, TextsOf(heldout), refs, params);
    }
    if (!cfg.out_dir.empty())
      WriteTo(OutDir(cfg) / "metrics.json",
              [&](std::ostream &o) { WriteReportJson(report, o); });
    WriteReportJson(report, std::cout);
  } catch (const Error &e) {
    throw Error(std::string("evaluate: ") + e.what());
  }
  return 0;
}

int RunProject(const PipelineConfig &cfg, const std::string &assignments_path) {
  try {
    const auto points = LoadPoints(cfg);
    std::vector<int> clusters(points.rows(), 0);
    if (!assignments_path.empty()) {
      const auto [ids, assigned] = LoadAssignments(assignments_path);
      std::unordered_map<std::string, int> by_id;
      for (std::size_t i = 0; i < ids.size(); ++i) by_id[ids[i]] = assigned[i];
      for (std::size_t i = 0; i < points.ids.size(); ++i) {
        const auto it = by_id.find(points.ids[i]);
        if (it == by_id.end()) throw Error("no assignment for '" + points.ids[i] + "'");
        clusters[i] = it->second;
      }
    }
    const fs::path out = OutDir(cfg);
    WriteTo(out / "projection.csv", [&](std::ostream &o) {
      WriteProjectionCsv(points.ids, Project2d(points.values), clusters, o);
    });
  } catch (const Error &e) {
    throw Error(std::string("project: ") + e.what());
  }
  return 0;
}

int RunPipelineCommand(const PipelineConfig &cfg) {
  const auto result = RunPipeline(cfg);
  std::cout << "k " << result.k << " silhouette " << result.silhouette << '\n';
  if (result.report) WriteReportJson(*result.report, std::cout);
  return 0;
}

int RunAblate(const PipelineConfig &cfg) {
  const auto rows = RunAblation(cfg);
  WriteAblationCsv(rows, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Intent induction from dialogue transcripts with staged contrastive training"};
  app.require_subcommand(1);

  struct Command {
    const char *name;
    const char *help;
  };
  const Command commands[] = {
      {"ingest", "parse a corpus and print its statistics"},
      {"train", "run one training stage and save a checkpoint"},
      {"cluster", "k-means over embeddings"},
      {"select-k", "choose k by mean silhouette"},
      {"evaluate", "score assignments against reference intents"},
      {"project", "2-D principal-component projection of embeddings"},
      {"pipeline", "train, cluster and evaluate end to end"},
      {"ablate", "run the four cumulative stage configurations"},
  };
  std::map<std::string, Options> options;
  std::map<std::string, CLI::App *> subs;
  for (const auto &c : commands) {
    auto *sub = app.add_subcommand(c.name, c.help);
    auto &opts = options[c.name];
    AddCommonFlags(sub, opts);
    subs[c.name] = sub;
  }
  subs["train"]->add_option("--stage", options["train"].stage, "stage to train")
      ->required()
      ->check(CLI::Range(1, 3));
  subs["evaluate"]->add_option("--assignments", options["evaluate"].assignments,
                               "assignments CSV")->required();
  subs["project"]->add_option("--assignments", options["project"].assignments,
                              "assignments CSV to color points");

  CLI11_PARSE(app, argc, argv);

  std::string active;
  for (const auto &[name, sub] : subs)
    if (sub->parsed()) active = name;
  try {
    const Options &opts = options[active];
    const PipelineConfig cfg = ResolveConfig(opts);
    if (active == "ingest") return RunIngest(cfg);
    if (active == "train") return RunTrain(cfg, opts.stage);
    if (active == "cluster") return RunCluster(cfg);
    if (active == "select-k") return RunSelectK(cfg);
    if (active == "evaluate") return RunEvaluate(cfg, opts.assignments);
    if (active == "project") return RunProject(cfg, opts.assignments);
    if (active == "pipeline") return RunPipelineCommand(cfg);
    if (active == "ablate") return RunAblate(cfg);
  } catch (const std::exception &e) {
    std::cerr << "intentforge " << active << ": error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
