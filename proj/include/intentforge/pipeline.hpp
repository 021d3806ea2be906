// include/intentforge/pipeline.hpp

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

#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "intentforge/metrics.hpp"
#include "intentforge/trainer.hpp"

namespace intentforge {

/// Flat key=value settings. Keys applying to every stage (tau, lr, epochs,
/// batch_m, knn_k, eta, alpha, augment.kind, augment.rate,
/// neighborhood.refresh) may be prefixed with "stage1.", "stage2." or
/// "stage3." to target a single stage; prefixed keys win regardless of order.
using Settings = std::map<std::string, std::string>;

/// Parses "key = value" lines; '#' starts a comment. Throws ParseError.
Settings ParseSettings(std::istream &in);
Settings ReadSettingsFile(const std::string &path);
/// Later entries overwrite earlier ones.
void MergeSettings(Settings &into, const Settings &from);
void WriteSettings(const Settings &settings, std::ostream &out);

struct PipelineConfig {
  std::string corpus;      // target dialogues (clustered, stage 1 and 3 input)
  std::string labeled;     // labeled same-domain dialogues for stage 2
  std::string embeddings;  // precomputed embeddings instead of the encoder
  std::string heldout;     // labeled held-out utterances for task 2
  std::string init;        // optional starting checkpoint
  std::string out_dir;
  int task = 1;
  bool stage1 = true;
  bool stage2 = true;
  bool stage3 = true;
  TrainConfig stage1_train;
  TrainConfig stage2_train;
  TrainConfig stage3_train;
  std::optional<std::size_t> k;
  std::size_t k_min = 2;
  std::size_t k_max = 30;
  std::size_t restarts = kDefaultRestarts;
  std::uint64_t seed = 42;
  std::size_t feature_dim = kDefaultFeatureDim;
  std::size_t hidden_dim = kDefaultHiddenDim;
  std::size_t embed_dim = kDefaultEmbedDim;

  /// Resolves settings over the defaults. Throws Error for unknown keys or
  /// malformed values.
  static PipelineConfig FromSettings(const Settings &settings);
  /// Every resolved key, suitable for WriteSettings and the run manifest.
  Settings ToSettings() const;
};

struct PipelineResult {
  std::vector<std::string> ids;
  EmbeddingMatrix embeddings;
  std::vector<int> assignments;
  std::size_t k = 0;
  std::optional<KSelectionResult> k_selection;
  std::optional<MetricsReport> report;
  double silhouette = 0.0;
  std::optional<Checkpoint> checkpoint;
};

/// Runs the enabled stages in order, picks k by silhouette when it is not
/// fixed, clusters with k-means and evaluates against references when they
/// are available. When out_dir is set, writes checkpoint.txt,
/// assignments.csv, k_selection.csv, metrics.json, projection.csv,
/// config.txt and run.json there. Errors carry the failing step's name.
PipelineResult RunPipeline(const PipelineConfig &config);

struct AblationRow {
  std::string variant;
  std::string stages;
  PipelineResult result;
};

/// The four cumulative stage configurations: none, {1}, {1,2}, {1,2,3}.
/// Each variant writes its artifacts to <out_dir>/<variant>/ and the summary
/// goes to <out_dir>/ablation.csv.
std::vector<AblationRow> RunAblation(const PipelineConfig &config);
void WriteAblationCsv(std::span<const AblationRow> rows, std::ostream &out);

struct Projection {
  Eigen::MatrixXd coords;  // n x 2
};

/// Projection onto the top two principal components of the centered rows.
/// Each component's largest-magnitude loading is made positive. Throws Error
/// when n < 2.
Projection Project2d(const Eigen::MatrixXd &points);

/// "utterance_id,x,y,cluster" with a header row.
void WriteProjectionCsv(std::span<const std::string> ids,
                        const Projection &projection,
                        std::span<const int> assignments, std::ostream &out);

/// Hex FNV-1a digest of a file's bytes, used in run manifests.
std::string FileDigest(const std::string &path);

}  // namespace intentforge
