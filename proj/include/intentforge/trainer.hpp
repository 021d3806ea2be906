// include/intentforge/trainer.hpp

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

#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "intentforge/augment.hpp"
#include "intentforge/cluster.hpp"
#include "intentforge/corpus.hpp"
#include "intentforge/encoder.hpp"
#include "intentforge/error.hpp"
#include "intentforge/neighborhood.hpp"

namespace intentforge {

enum class Stage { kConsecutive = 1, kNeighbor = 2, kJoint = 3 };

enum class NeighborRefresh { kOnce, kPerEpoch };

NeighborRefresh ParseNeighborRefresh(std::string_view name);
const char *NeighborRefreshName(NeighborRefresh refresh);

struct TrainConfig {
  Stage stage = Stage::kConsecutive;
  std::size_t epochs = 10;
  std::size_t batch_m = 32;
  double lr = 1e-3;
  double tau = 0.1;
  double eta = 10.0;   // weight of the clustering loss, joint stage only
  double alpha = 1.0;  // Student's-t degrees of freedom, joint stage only
  std::size_t knn_k = 5;
  NeighborRefresh refresh = NeighborRefresh::kOnce;
  std::size_t restarts = kDefaultRestarts;  // centroid initialization
  std::uint64_t seed = 42;
  // An empty substitution vocabulary is filled from the training texts.
  AugmentConfig augment;

  void Validate() const;
};

/// Per-epoch mean batch loss, for diagnostics.
struct TrainLog {
  std::vector<double> epoch_loss;
};

/// Encoder head plus the trainable cluster centers of the joint stage.
struct JointParams {
  EncoderParams encoder;
  Eigen::MatrixXd centroids;  // k x embed

  std::vector<ParamBlock> Blocks();
  std::vector<ConstParamBlock> Blocks() const;
};

template <typename Params>
std::vector<double> Flatten(const Params &params) {
  std::vector<double> flat;
  for (const auto &block : params.Blocks())
    flat.insert(flat.end(), block.values.begin(), block.values.end());
  return flat;
}

template <typename Params>
void Unflatten(std::span<const double> flat, Params &params) {
  std::size_t offset = 0;
  for (auto &block : params.Blocks()) {
    if (offset + block.values.size() > flat.size())
      throw Error("unflatten: parameter vector too short");
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                block.values.size(), block.values.begin());
    offset += block.values.size();
  }
  if (offset != flat.size()) throw Error("unflatten: parameter vector too long");
}

/// Adam moments, one buffer per parameter block.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
};

/// One bias-corrected Adam update of `params` in place. Gradients must have
/// the same block layout; a non-finite gradient throws Error naming the block
/// before anything is modified.
template <typename Params>
void OptimizerStep(Params &params, const Params &grads, AdamState &state,
                   double lr) {
  auto blocks = params.Blocks();
  const auto grad_blocks = grads.Blocks();
  if (blocks.size() != grad_blocks.size())
    throw Error("optimizer: gradient block count mismatch");
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].values.size() != grad_blocks[b].values.size())
      throw Error("optimizer: shape mismatch in block '" + blocks[b].name + "'");
    for (double g : grad_blocks[b].values)
      if (!std::isfinite(g))
        throw Error("optimizer: non-finite gradient in block '" +
                    grad_blocks[b].name + "'");
  }
  if (state.first.empty()) {
    for (const auto &block : blocks) {
      state.first.emplace_back(block.values.size(), 0.0);
      state.second.emplace_back(block.values.size(), 0.0);
    }
  }
  if (state.first.size() != blocks.size())
    throw Error("optimizer: state does not match parameter layout");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(state.beta1, t);
  const double correct2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto values = blocks[b].values;
    const auto g = grad_blocks[b].values;
    auto &m = state.first[b];
    auto &v = state.second[b];
    for (std::size_t i = 0; i < values.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correct1;
      const double v_hat = v[i] / correct2;
      values[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

/// Largest relative error between central differences and `analytic` over a
/// random subsample of at most `samples` coordinates (all when fewer), using
/// |a - n| / max(|a|, |n|, 1e-8).
double FiniteDiffCheck(
    const std::function<double(std::span<const double>)> &loss_at,
    std::span<const double> params, std::span<const double> analytic, double h,
    std::uint64_t seed = 0, std::size_t samples = 64);

// Batch objectives shared by the training loops and the gradient checks.

struct EncoderLossGrad {
  double loss = 0.0;
  EncoderParams grad;
};

/// Adjacency-driven contrastive loss of one augmented batch (2M view texts in
/// slot-partner layout) and its gradient w.r.t. the head.
EncoderLossGrad NeighborBatchLoss(const EncoderParams &params,
                                  std::span<const std::string> view_texts,
                                  const AdjacencyMatrix &adjacency, double tau);

/// Partner-only contrastive loss over 2M texts laid out as pairs.
EncoderLossGrad PairBatchLoss(const EncoderParams &params,
                              std::span<const std::string> pair_texts,
                              double tau);

struct JointLossGrad {
  double loss = 0.0;
  double instance_loss = 0.0;
  double cluster_loss = 0.0;
  JointParams grad;
};

/// Joint objective of one batch: instance contrastive loss on the 2B
/// augmented views plus eta times the KL clustering loss of the B original
/// texts against the fixed `target` rows (B x k).
JointLossGrad JointBatchLoss(const JointParams &params,
                             std::span<const std::string> view_texts,
                             std::span<const std::string> original_texts,
                             const Eigen::MatrixXd &target, double tau,
                             double eta, double alpha);

/// Consecutive-utterance stage: batches of M adjacent-turn pairs, each pair
/// being the positive of the other and every other row a negative. Throws
/// Error when the corpus has no consecutive pair.
EncoderParams TrainStage1(const Corpus &corpus, EncoderParams params,
                          const TrainConfig &config, TrainLog *log = nullptr);

/// Neighbor / same-intent stage over labeled utterances. An empty label marks
/// an unlabeled utterance. Throws Error when n <= knn_k.
EncoderParams TrainStage2(std::span<const std::string> texts,
                          std::span<const std::string> labels,
                          EncoderParams params, const TrainConfig &config,
                          TrainLog *log = nullptr);

struct Stage3Result {
  EncoderParams params;
  Eigen::MatrixXd centroids;
};

/// Joint contrastive + clustering stage on unlabeled target utterances.
/// Centroids start from k-means on the incoming embeddings; the target
/// distribution is recomputed at the start of every epoch.
Stage3Result TrainStage3(std::span<const std::string> texts, std::size_t k,
                         EncoderParams params, const TrainConfig &config,
                         TrainLog *log = nullptr);

// Checkpoints: "#intentforge-ckpt v1", then for each block a
// "<name> <rows> <cols>" line followed by `rows` lines of values.

struct Checkpoint {
  EncoderParams params;
  std::optional<Eigen::MatrixXd> centroids;
};

void WriteCheckpoint(const Checkpoint &checkpoint, std::ostream &out);
Checkpoint ReadCheckpoint(std::istream &in);
void SaveCheckpoint(const Checkpoint &checkpoint, const std::string &path);
Checkpoint LoadCheckpoint(const std::string &path);

}  // namespace intentforge
