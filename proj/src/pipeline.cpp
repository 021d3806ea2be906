// src/pipeline.cpp

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

#include "intentforge/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <unordered_map>

#include "intentforge/io_util.hpp"
#include "json.hpp"

namespace intentforge {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kGlobalKeys = {
    "corpus",  "labeled", "embeddings",  "heldout",    "init",
    "out",     "task",    "stage1",      "stage2",     "stage3",
    "k",       "k_min",   "k_max",       "restarts",   "seed",
    "feature_dim", "hidden_dim", "embed_dim"};

const std::set<std::string> kStageKeys = {
    "epochs", "batch_m", "lr",           "tau",          "eta",
    "alpha",  "knn_k",   "augment.kind", "augment.rate", "neighborhood.refresh"};

std::size_t ToCount(const std::string &key, const std::string &value) {
  const auto v = ParseDouble(value);
  if (!v || *v < 0 || *v != std::floor(*v))
    throw Error("config: '" + key + "' expects a non-negative integer, got '" +
                value + "'");
  return static_cast<std::size_t>(*v);
}

double ToReal(const std::string &key, const std::string &value) {
  const auto v = ParseDouble(value);
  if (!v) throw Error("config: '" + key + "' expects a number, got '" + value + "'");
  return *v;
}

bool ToBool(const std::string &key, const std::string &value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw Error("config: '" + key + "' expects true or false, got '" + value + "'");
}

std::uint64_t ToSeed(const std::string &key, const std::string &value) {
  std::uint64_t seed = 0;
  const char *end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, seed);
  if (value.empty() || ec != std::errc() || ptr != end)
    throw Error("config: '" + key + "' expects an unsigned integer, got '" +
                value + "'");
  return seed;
}

void ApplyStageKey(TrainConfig &cfg, const std::string &key,
                   const std::string &full_key, const std::string &value) {
  if (key == "epochs") cfg.epochs = ToCount(full_key, value);
  else if (key == "batch_m") cfg.batch_m = ToCount(full_key, value);
  else if (key == "lr") cfg.lr = ToReal(full_key, value);
  else if (key == "tau") cfg.tau = ToReal(full_key, value);
  else if (key == "eta") cfg.eta = ToReal(full_key, value);
  else if (key == "alpha") cfg.alpha = ToReal(full_key, value);
  else if (key == "knn_k") cfg.knn_k = ToCount(full_key, value);
  else if (key == "augment.kind") cfg.augment.kind = ParseAugmentKind(value);
  else if (key == "augment.rate") cfg.augment.rate = ToReal(full_key, value);
  else if (key == "neighborhood.refresh") cfg.refresh = ParseNeighborRefresh(value);
}

void AddStageSettings(Settings &out, const std::string &prefix,
                      const TrainConfig &cfg) {
  out[prefix + "epochs"] = std::to_string(cfg.epochs);
  out[prefix + "batch_m"] = std::to_string(cfg.batch_m);
  out[prefix + "lr"] = FormatDouble(cfg.lr);
  out[prefix + "tau"] = FormatDouble(cfg.tau);
  out[prefix + "eta"] = FormatDouble(cfg.eta);
  out[prefix + "alpha"] = FormatDouble(cfg.alpha);
  out[prefix + "knn_k"] = std::to_string(cfg.knn_k);
  out[prefix + "augment.kind"] = AugmentKindName(cfg.augment.kind);
  out[prefix + "augment.rate"] = FormatDouble(cfg.augment.rate);
  out[prefix + "neighborhood.refresh"] = NeighborRefreshName(cfg.refresh);
}

// Wraps a step so its errors name the step.
template <typename Fn>
auto Step(const std::string &name, Fn &&fn) {
  try {
    return fn();
  } catch (const Error &e) {
    const std::string what = e.what();
    if (what.rfind(name + ":", 0) == 0) throw;
    throw Error(name + ": " + what);
  }
}

template <typename Writer>
void WriteFile(const fs::path &path, Writer &&writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  writer(out);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::vector<std::string> Texts(const std::vector<Utterance> &utterances) {
  std::vector<std::string> out;
  out.reserve(utterances.size());
  for (const auto &u : utterances) out.push_back(u.text);
  return out;
}

std::vector<std::string> Ids(const std::vector<Utterance> &utterances) {
  std::vector<std::string> out;
  out.reserve(utterances.size());
  for (const auto &u : utterances) out.push_back(u.id);
  return out;
}

std::size_t ChooseK(const PipelineConfig &config, const Eigen::MatrixXd &points,
                    std::optional<KSelectionResult> *selection) {
  if (config.k) return *config.k;
  const std::size_t n = static_cast<std::size_t>(points.rows());
  if (n < 3) throw Error("select-k: need at least 3 items to choose k");
  const std::size_t k_max = std::min(config.k_max, n - 1);
  const std::size_t k_min = std::min(config.k_min, k_max);
  auto result = SelectK(points, k_min, k_max, config.seed, config.restarts);
  const std::size_t k = result.chosen_k;
  if (selection) *selection = std::move(result);
  return k;
}

}  // namespace

Settings ParseSettings(std::istream &in) {
  Settings settings;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const auto body = Trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("expected 'key=value'", line_no);
    const std::string key(Trim(body.substr(0, eq)));
    if (key.empty()) throw ParseError("empty key", line_no);
    settings[key] = std::string(Trim(body.substr(eq + 1)));
  }
  return settings;
}

Settings ReadSettingsFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  return ParseSettings(in);
}

void MergeSettings(Settings &into, const Settings &from) {
  for (const auto &[key, value] : from) into[key] = value;
}

void WriteSettings(const Settings &settings, std::ostream &out) {
  for (const auto &[key, value] : settings) out << key << '=' << value << '\n';
}

PipelineConfig PipelineConfig::FromSettings(const Settings &settings) {
  PipelineConfig cfg;
  cfg.stage1_train.stage = Stage::kConsecutive;
  cfg.stage2_train.stage = Stage::kNeighbor;
  cfg.stage3_train.stage = Stage::kJoint;
  cfg.stage3_train.epochs = 20;
  TrainConfig *stages[] = {&cfg.stage1_train, &cfg.stage2_train, &cfg.stage3_train};

  std::optional<bool> toggles[3];
  // Unprefixed keys first so that stageN.* keys override them.
  for (const auto &[key, value] : settings) {
    if (kStageKeys.count(key)) {
      for (auto *stage : stages) ApplyStageKey(*stage, key, key, value);
      continue;
    }
    if (key.rfind("stage", 0) == 0 && key.size() > 7 && key[6] == '.') continue;
    if (!kGlobalKeys.count(key)) throw Error("config: unknown key '" + key + "'");
    if (key == "corpus") cfg.corpus = value;
    else if (key == "labeled") cfg.labeled = value;
    else if (key == "embeddings") cfg.embeddings = value;
    else if (key == "heldout") cfg.heldout = value;
    else if (key == "init") cfg.init = value;
    else if (key == "out") cfg.out_dir = value;
    else if (key == "task") {
      cfg.task = static_cast<int>(ToCount(key, value));
      if (cfg.task != 1 && cfg.task != 2) throw Error("config: 'task' must be 1 or 2");
    } else if (key == "stage1") toggles[0] = ToBool(key, value);
    else if (key == "stage2") toggles[1] = ToBool(key, value);
    else if (key == "stage3") toggles[2] = ToBool(key, value);
    else if (key == "k") {
      if (value.empty() || value == "auto") cfg.k.reset();
      else cfg.k = ToCount(key, value);
    } else if (key == "k_min") cfg.k_min = ToCount(key, value);
    else if (key == "k_max") cfg.k_max = ToCount(key, value);
    else if (key == "restarts") cfg.restarts = ToCount(key, value);
    else if (key == "seed") cfg.seed = ToSeed(key, value);
    else if (key == "feature_dim") cfg.feature_dim = ToCount(key, value);
    else if (key == "hidden_dim") cfg.hidden_dim = ToCount(key, value);
    else if (key == "embed_dim") cfg.embed_dim = ToCount(key, value);
  }
  for (const auto &[key, value] : settings) {
    if (!(key.rfind("stage", 0) == 0 && key.size() > 7 && key[6] == '.')) continue;
    const char which = key[5];
    const std::string sub = key.substr(7);
    if (which < '1' || which > '3' || !kStageKeys.count(sub))
      throw Error("config: unknown key '" + key + "'");
    ApplyStageKey(*stages[which - '1'], sub, key, value);
  }

  // Imported embeddings cannot be fine-tuned, so stages default to off.
  const bool default_on = cfg.embeddings.empty();
  cfg.stage1 = toggles[0].value_or(default_on);
  cfg.stage2 = toggles[1].value_or(default_on);
  cfg.stage3 = toggles[2].value_or(default_on);
  for (auto *stage : stages) {
    stage->seed = cfg.seed;
    stage->restarts = cfg.restarts;
  }
  return cfg;
}

Settings PipelineConfig::ToSettings() const {
  Settings out;
  out["corpus"] = corpus;
  out["labeled"] = labeled;
  out["embeddings"] = embeddings;
  out["heldout"] = heldout;
  out["init"] = init;
  out["out"] = out_dir;
  out["task"] = std::to_string(task);
  out["stage1"] = stage1 ? "true" : "false";
  out["stage2"] = stage2 ? "true" : "false";
  out["stage3"] = stage3 ? "true" : "false";
  out["k"] = k ? std::to_string(*k) : "auto";
  out["k_min"] = std::to_string(k_min);
  out["k_max"] = std::to_string(k_max);
  out["restarts"] = std::to_string(restarts);
  out["seed"] = std::to_string(seed);
  out["feature_dim"] = std::to_string(feature_dim);
  out["hidden_dim"] = std::to_string(hidden_dim);
  out["embed_dim"] = std::to_string(embed_dim);
  AddStageSettings(out, "stage1.", stage1_train);
  AddStageSettings(out, "stage2.", stage2_train);
  AddStageSettings(out, "stage3.", stage3_train);
  return out;
}

PipelineResult RunPipeline(const PipelineConfig &config) {
  if (config.corpus.empty() && config.embeddings.empty())
    throw Error("pipeline: need --corpus or --embeddings");
  if (!config.embeddings.empty() && (config.stage1 || config.stage2 || config.stage3))
    throw Error("pipeline: training stages need corpus text and cannot run on "
                "imported embeddings; disable stage1/stage2/stage3");
  if (!config.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec || !fs::is_directory(config.out_dir))
      throw Error("pipeline: cannot create output directory '" + config.out_dir + "'");
  }

  PipelineResult result;
  std::optional<Corpus> corpus;
  if (!config.corpus.empty())
    corpus = Step("ingest", [&] { return ReadCorpusFile(config.corpus); });

  // Items to cluster, with references where the corpus provides them.
  std::vector<Utterance> items;
  std::vector<std::string> references;
  if (corpus) {
    items = config.task == 1 ? SelectTask1Utterances(*corpus)
                             : SelectTask2Utterances(*corpus);
    if (items.empty())
      throw Error(std::string("ingest: corpus has no task-") +
                  std::to_string(config.task) + " utterances");
  }

  if (!config.embeddings.empty()) {
    if (config.task != 1)
      throw Error("evaluate: task 2 needs the encoder and cannot use imported embeddings");
    result.embeddings = Step("ingest", [&] { return LoadEmbeddings(config.embeddings); });
    result.ids = result.embeddings.ids;
    if (corpus) {
      std::unordered_map<std::string, std::string> intent_of;
      for (const auto &u : items) intent_of[u.id] = PrimaryIntent(u);
      for (const auto &id : result.ids) {
        auto it = intent_of.find(id);
        if (it == intent_of.end()) {
          references.clear();
          break;
        }
        references.push_back(it->second);
      }
    }
  } else {
    const auto texts = Texts(items);
    EncoderParams params =
        config.init.empty()
            ? InitParams(config.seed, config.feature_dim, config.hidden_dim,
                         config.embed_dim)
            : Step("init", [&] { return LoadCheckpoint(config.init).params; });
    std::optional<Eigen::MatrixXd> centroids;
    if (config.stage1)
      params = Step("stage 1", [&] {
        return TrainStage1(*corpus, std::move(params), config.stage1_train);
      });
    if (config.stage2) {
      params = Step("stage 2", [&] {
        if (config.labeled.empty())
          throw Error("needs a labeled corpus (--labeled)");
        const Corpus labeled = ReadCorpusFile(config.labeled);
        const auto labeled_items = SelectTask1Utterances(labeled);
        std::vector<std::string> labels;
        for (const auto &u : labeled_items) labels.push_back(PrimaryIntent(u));
        return TrainStage2(Texts(labeled_items), labels, std::move(params),
                           config.stage2_train);
      });
    }
    if (config.stage3) {
      auto stage3 = Step("stage 3", [&] {
        const std::size_t k =
            ChooseK(config, Embed(params, texts).values, nullptr);
        return TrainStage3(texts, k, std::move(params), config.stage3_train);
      });
      params = std::move(stage3.params);
      centroids = std::move(stage3.centroids);
    }
    result.embeddings = Embed(params, texts, Ids(items));
    result.ids = result.embeddings.ids;
    result.checkpoint = Checkpoint{std::move(params), std::move(centroids)};
    if (config.task == 1)
      for (const auto &u : items) references.push_back(PrimaryIntent(u));
  }

  const Eigen::MatrixXd &points = result.embeddings.values;
  result.k = Step("select-k", [&] { return ChooseK(config, points, &result.k_selection); });
  const ClusterModel model = Step("cluster", [&] {
    return KMeans(points, result.k, config.seed, config.restarts);
  });
  result.assignments = model.assignments;
  const std::set<int> distinct(model.assignments.begin(), model.assignments.end());
  result.silhouette = distinct.size() >= 2 ? Silhouette(points, model.assignments) : 0.0;

  if (config.task == 1 && !references.empty()) {
    result.report = Step("evaluate", [&] {
      return Evaluate(result.assignments, references, "task1");
    });
  } else if (config.task == 2 && !config.heldout.empty()) {
    result.report = Step("evaluate", [&] {
      const auto heldout = SelectTask1Utterances(ReadCorpusFile(config.heldout));
      if (heldout.empty()) throw Error("held-out corpus has no labeled utterances");
      std::vector<std::vector<std::string>> induced(result.k);
      for (std::size_t i = 0; i < items.size(); ++i)
        induced[static_cast<std::size_t>(result.assignments[i])].push_back(items[i].text);
      induced.erase(std::remove_if(induced.begin(), induced.end(),
                                   [](const auto &g) { return g.empty(); }),
                    induced.end());
      std::vector<std::string> refs;
      for (const auto &u : heldout) refs.push_back(PrimaryIntent(u));
      return Task2Eval(induced, Texts(heldout), refs, result.checkpoint->params);
    });
  }

  if (config.out_dir.empty()) return result;

  const fs::path out(config.out_dir);
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
  auto record = [&](const std::string &name) {
    outputs[name] = FileDigest((out / name).string());
  };
  Step("write", [&] {
    if (result.checkpoint) {
      WriteFile(out / "checkpoint.txt",
                [&](std::ostream &o) { WriteCheckpoint(*result.checkpoint, o); });
      record("checkpoint.txt");
    }
    WriteFile(out / "assignments.csv", [&](std::ostream &o) {
      WriteAssignmentsCsv(result.ids, result.assignments, o);
    });
    record("assignments.csv");
    if (result.k_selection) {
      WriteFile(out / "k_selection.csv",
                [&](std::ostream &o) { WriteKSelectionCsv(*result.k_selection, o); });
      record("k_selection.csv");
    }
    if (result.report) {
      WriteFile(out / "metrics.json",
                [&](std::ostream &o) { WriteReportJson(*result.report, o); });
      record("metrics.json");
    }
    if (result.ids.size() >= 2) {
      WriteFile(out / "projection.csv", [&](std::ostream &o) {
        WriteProjectionCsv(result.ids, Project2d(points), result.assignments, o);
      });
      record("projection.csv");
    }
    const Settings settings = config.ToSettings();
    WriteFile(out / "config.txt", [&](std::ostream &o) { WriteSettings(settings, o); });

    nlohmann::ordered_json manifest;
    manifest["tool"] = "intentforge";
    manifest["seed"] = config.seed;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto &[key, value] : settings) cfg[key] = value;
    manifest["config"] = std::move(cfg);
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    for (const auto *path : {&config.corpus, &config.labeled, &config.embeddings,
                             &config.heldout, &config.init})
      if (!path->empty()) inputs[*path] = FileDigest(*path);
    manifest["inputs"] = std::move(inputs);
    manifest["k"] = result.k;
    manifest["outputs"] = outputs;
    WriteFile(out / "run.json", [&](std::ostream &o) { o << manifest.dump(2) << '\n'; });
    return 0;
  });
  return result;
}

std::vector<AblationRow> RunAblation(const PipelineConfig &config) {
  struct Variant {
    const char *name;
    const char *stages;
    bool s1, s2, s3;
  };
  const Variant variants[] = {
      {"baseline", "none", false, false, false},
      {"stage1", "1", true, false, false},
      {"stage1_2", "1+2", true, true, false},
      {"stage1_2_3", "1+2+3", true, true, true},
  };
  std::vector<AblationRow> rows;
  for (const auto &v : variants) {
    PipelineConfig variant = config;
    variant.stage1 = v.s1;
    variant.stage2 = v.s2;
    variant.stage3 = v.s3;
    if (!config.out_dir.empty())
      variant.out_dir = (fs::path(config.out_dir) / v.name).string();
    rows.push_back({v.name, v.stages, RunPipeline(variant)});
  }
  if (!config.out_dir.empty())
    WriteFile(fs::path(config.out_dir) / "ablation.csv",
              [&](std::ostream &o) { WriteAblationCsv(rows, o); });
  return rows;
}

void WriteAblationCsv(std::span<const AblationRow> rows, std::ostream &out) {
  out << "variant,stages,k,acc,nmi,ari,precision,recall,f1,silhouette\n";
  for (const auto &row : rows) {
    const auto &r = row.result;
    out << row.variant << ',' << row.stages << ',' << r.k;
    if (r.report) {
      for (double v : {r.report->acc, r.report->nmi, r.report->ari,
                       r.report->precision, r.report->recall, r.report->f1})
        out << ',' << FormatDouble(v);
    } else {
      out << ",,,,,,";
    }
    out << ',' << FormatDouble(r.silhouette) << '\n';
  }
}

Projection Project2d(const Eigen::MatrixXd &points) {
  if (points.rows() < 2) throw Error("project: need at least two points");
  const Eigen::MatrixXd centered = points.rowwise() - points.colwise().mean();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(points.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw Error("project: eigen-decomposition failed");
  const Eigen::Index d = cov.rows();
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(d, 2);
  // Eigenvalues come in ascending order.
  for (Eigen::Index c = 0; c < std::min<Eigen::Index>(2, d); ++c) {
    Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - c);
    Eigen::Index largest = 0;
    v.cwiseAbs().maxCoeff(&largest);
    if (v[largest] < 0) v = -v;
    basis.col(c) = v;
  }
  return {centered * basis};
}

void WriteProjectionCsv(std::span<const std::string> ids,
                        const Projection &projection,
                        std::span<const int> assignments, std::ostream &out) {
  out << "utterance_id,x,y,cluster\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    out << ids[i] << ',' << FormatDouble(projection.coords(row, 0)) << ','
        << FormatDouble(projection.coords(row, 1)) << ',' << assignments[i] << '\n';
  }
}

std::string FileDigest(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(bytes)));
  return buf;
}

}  // namespace intentforge
