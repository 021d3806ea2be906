// src/trainer.cpp

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

#include "intentforge/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "intentforge/contrastive.hpp"
#include "intentforge/io_util.hpp"

namespace intentforge {

namespace {

std::vector<std::size_t> Shuffled(std::size_t n, std::mt19937_64 &rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  return order;
}

// Batches of `m` consecutive entries of `order`; a trailing batch with fewer
// than two items is dropped.
std::vector<std::vector<std::size_t>> Batches(const std::vector<std::size_t> &order,
                                              std::size_t m) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < order.size(); start += m) {
    const std::size_t end = std::min(order.size(), start + m);
    if (end - start < 2) break;
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

AugmentConfig ResolveAugment(const AugmentConfig &config,
                             std::span<const std::string> texts) {
  AugmentConfig out = config;
  if (out.kind == AugmentKind::kSubstitute && out.vocab.empty())
    out.vocab = BuildVocab(texts);
  if (out.kind == AugmentKind::kSubstitute && out.vocab.empty())
    out.kind = AugmentKind::kIdentity;
  out.Validate();
  return out;
}

void RecordEpoch(TrainLog *log, double sum, std::size_t batches) {
  if (log) log->epoch_loss.push_back(batches ? sum / static_cast<double>(batches) : 0.0);
}

std::string StageName(Stage stage) {
  switch (stage) {
    case Stage::kConsecutive: return "stage 1";
    case Stage::kNeighbor: return "stage 2";
    case Stage::kJoint: return "stage 3";
  }
  return "stage";
}

}  // namespace

NeighborRefresh ParseNeighborRefresh(std::string_view name) {
  if (name == "once") return NeighborRefresh::kOnce;
  if (name == "per_epoch") return NeighborRefresh::kPerEpoch;
  throw Error("unknown neighborhood refresh '" + std::string(name) +
              "' (expected once or per_epoch)");
}

const char *NeighborRefreshName(NeighborRefresh refresh) {
  return refresh == NeighborRefresh::kOnce ? "once" : "per_epoch";
}

void TrainConfig::Validate() const {
  const std::string where = StageName(stage) + ": ";
  if (batch_m < 2) throw Error(where + "batch_m must be at least 2");
  if (!(lr > 0.0)) throw Error(where + "lr must be positive");
  if (!(tau > 0.0)) throw Error(where + "tau must be positive");
  if (!(eta >= 0.0)) throw Error(where + "eta must be non-negative");
  if (!(alpha > 0.0)) throw Error(where + "alpha must be positive");
  if (knn_k == 0) throw Error(where + "knn_k must be positive");
  if (restarts == 0) throw Error(where + "restarts must be positive");
  if (!(augment.rate >= 0.0 && augment.rate <= 1.0))
    throw Error(where + "augment rate must lie in [0, 1]");
}

std::vector<ParamBlock> JointParams::Blocks() {
  auto blocks = encoder.Blocks();
  blocks.push_back({"centroids",
                    std::span<double>(centroids.data(),
                                      static_cast<std::size_t>(centroids.size())),
                    centroids.rows(), centroids.cols()});
  return blocks;
}

std::vector<ConstParamBlock> JointParams::Blocks() const {
  auto blocks = encoder.Blocks();
  blocks.push_back(
      {"centroids",
       std::span<const double>(centroids.data(),
                               static_cast<std::size_t>(centroids.size())),
       centroids.rows(), centroids.cols()});
  return blocks;
}

double FiniteDiffCheck(
    const std::function<double(std::span<const double>)> &loss_at,
    std::span<const double> params, std::span<const double> analytic, double h,
    std::uint64_t seed, std::size_t samples) {
  if (!(h > 0.0)) throw Error("finite_diff_check: h must be positive");
  if (params.size() != analytic.size())
    throw Error("finite_diff_check: gradient size mismatch");
  std::vector<std::size_t> coords(params.size());
  std::iota(coords.begin(), coords.end(), 0);
  if (coords.size() > samples) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < samples; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, coords.size() - 1);
      std::swap(coords[i], coords[pick(rng)]);
    }
    coords.resize(samples);
  }
  std::vector<double> point(params.begin(), params.end());
  double worst = 0.0;
  for (std::size_t c : coords) {
    const double saved = point[c];
    point[c] = saved + h;
    const double up = loss_at(point);
    point[c] = saved - h;
    const double down = loss_at(point);
    point[c] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic[c];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

EncoderLossGrad NeighborBatchLoss(const EncoderParams &params,
                                  std::span<const std::string> view_texts,
                                  const AdjacencyMatrix &adjacency, double tau) {
  const HeadActivations acts =
      Forward(params, FeaturizeBatch(view_texts, params.feature_dim()));
  const LossAndGrad lg = ContrastiveLossAndGrad(acts.output, adjacency, tau);
  return {lg.loss.total, Backward(params, acts, lg.grad)};
}

EncoderLossGrad PairBatchLoss(const EncoderParams &params,
                              std::span<const std::string> pair_texts,
                              double tau) {
  return NeighborBatchLoss(params, pair_texts,
                           PartnerAdjacency(pair_texts.size() / 2), tau);
}

JointLossGrad JointBatchLoss(const JointParams &params,
                             std::span<const std::string> view_texts,
                             std::span<const std::string> original_texts,
                             const Eigen::MatrixXd &target, double tau,
                             double eta, double alpha) {
  const auto views = static_cast<Eigen::Index>(view_texts.size());
  const auto originals = static_cast<Eigen::Index>(original_texts.size());
  if (target.rows() != originals || target.cols() != params.centroids.rows())
    throw Error("joint loss: target distribution has the wrong shape");

  std::vector<std::string> all(view_texts.begin(), view_texts.end());
  all.insert(all.end(), original_texts.begin(), original_texts.end());
  const HeadActivations acts =
      Forward(params.encoder, FeaturizeBatch(all, params.encoder.feature_dim()));

  const LossAndGrad instance =
      InstanceClLossAndGrad(acts.output.topRows(views), tau);
  const ClusterLossGrad cluster = ClusterLossAndGrad(
      acts.output.bottomRows(originals), params.centroids, target, alpha);

  Eigen::MatrixXd grad_out(acts.output.rows(), acts.output.cols());
  grad_out.topRows(views) = instance.grad;
  grad_out.bottomRows(originals) = eta * cluster.grad_points;

  JointLossGrad out;
  out.instance_loss = instance.loss.total;
  out.cluster_loss = cluster.loss;
  out.loss = CombineStage3Loss(out.instance_loss, out.cluster_loss, eta);
  out.grad.encoder = Backward(params.encoder, acts, grad_out);
  out.grad.centroids = eta * cluster.grad_centroids;
  return out;
}

EncoderParams TrainStage1(const Corpus &corpus, EncoderParams params,
                          const TrainConfig &config, TrainLog *log) {
  config.Validate();
  const auto pairs = ConsecutivePairs(corpus);
  if (pairs.empty())
    throw Error("stage 1: corpus has no consecutive utterance pairs");
  std::mt19937_64 rng(config.seed);
  AdamState adam;
  std::vector<std::string> texts;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double sum = 0.0;
    const auto batches = Batches(Shuffled(pairs.size(), rng), config.batch_m);
    for (const auto &batch : batches) {
      texts.clear();
      for (std::size_t p : batch) {
        texts.push_back(pairs[p].first->text);
        texts.push_back(pairs[p].second->text);
      }
      const auto lg = PairBatchLoss(params, texts, config.tau);
      OptimizerStep(params, lg.grad, adam, config.lr);
      sum += lg.loss;
    }
    RecordEpoch(log, sum, batches.size());
  }
  return params;
}

EncoderParams TrainStage2(std::span<const std::string> texts,
                          std::span<const std::string> labels,
                          EncoderParams params, const TrainConfig &config,
                          TrainLog *log) {
  config.Validate();
  const std::size_t n = texts.size();
  if (!labels.empty() && labels.size() != n)
    throw Error("stage 2: texts and labels differ in length");
  if (n <= config.knn_k)
    throw Error("stage 2: need more than knn_k=" + std::to_string(config.knn_k) +
                " utterances, got " + std::to_string(n));
  std::map<std::string, int> label_ids;
  std::vector<LabelId> label_of(n);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].empty()) continue;
    auto [it, inserted] =
        label_ids.emplace(labels[i], static_cast<int>(label_ids.size()));
    label_of[i] = it->second;
  }
  const AugmentConfig augment = ResolveAugment(config.augment, texts);
  std::mt19937_64 rng(config.seed);
  AdamState adam;
  NeighborhoodIndex index;
  std::vector<std::string> views;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (epoch == 0 || config.refresh == NeighborRefresh::kPerEpoch)
      index = Knn(Embed(params, texts), config.knn_k);
    double sum = 0.0;
    const auto batches = Batches(Shuffled(n, rng), config.batch_m);
    for (const auto &batch : batches) {
      const BatchPlan plan = PlanBatch(index, batch, label_of, rng);
      views.clear();
      for (std::size_t s = 0; s < plan.size(); ++s) {
        views.push_back(Augment(texts[plan.members[s]], augment, rng));
        views.push_back(Augment(texts[plan.sampled_neighbor[s]], augment, rng));
      }
      const auto lg =
          NeighborBatchLoss(params, views, BuildAdjacency(plan), config.tau);
      OptimizerStep(params, lg.grad, adam, config.lr);
      sum += lg.loss;
    }
    RecordEpoch(log, sum, batches.size());
  }
  return params;
}

Stage3Result TrainStage3(std::span<const std::string> texts, std::size_t k,
                         EncoderParams params, const TrainConfig &config,
                         TrainLog *log) {
  config.Validate();
  const std::size_t n = texts.size();
  if (k < 1 || k > n)
    throw Error("stage 3: k=" + std::to_string(k) + " is invalid for " +
                std::to_string(n) + " utterances");
  JointParams joint{std::move(params), {}};
  joint.centroids =
      KMeans(Embed(joint.encoder, texts).values, k, config.seed, config.restarts)
          .centroids;
  const AugmentConfig augment = ResolveAugment(config.augment, texts);
  std::mt19937_64 rng(config.seed);
  AdamState adam;
  std::vector<std::string> views, originals;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const Eigen::MatrixXd target = TargetDistribution(
        SoftAssign(Embed(joint.encoder, texts).values, joint.centroids,
                   config.alpha)
            .q);
    double sum = 0.0;
    const auto batches = Batches(Shuffled(n, rng), config.batch_m);
    for (const auto &batch : batches) {
      views.clear();
      originals.clear();
      Eigen::MatrixXd batch_target(static_cast<Eigen::Index>(batch.size()),
                                   target.cols());
      for (std::size_t b = 0; b < batch.size(); ++b) {
        const std::string &text = texts[batch[b]];
        views.push_back(Augment(text, augment, rng));
        views.push_back(Augment(text, augment, rng));
        originals.push_back(text);
        batch_target.row(static_cast<Eigen::Index>(b)) =
            target.row(static_cast<Eigen::Index>(batch[b]));
      }
      const auto lg = JointBatchLoss(joint, views, originals, batch_target,
                                     config.tau, config.eta, config.alpha);
      OptimizerStep(joint, lg.grad, adam, config.lr);
      sum += lg.loss;
    }
    RecordEpoch(log, sum, batches.size());
  }
  return {std::move(joint.encoder), std::move(joint.centroids)};
}

namespace {

void WriteBlock(const ConstParamBlock &block, std::ostream &out) {
  out << block.name << ' ' << block.rows << ' ' << block.cols << '\n';
  // Eigen storage is column-major; the file is row-major.
  for (Eigen::Index r = 0; r < block.rows; ++r) {
    for (Eigen::Index c = 0; c < block.cols; ++c) {
      if (c) out << ' ';
      out << FormatDouble(block.values[static_cast<std::size_t>(c * block.rows + r)]);
    }
    out << '\n';
  }
}

}  // namespace

void WriteCheckpoint(const Checkpoint &checkpoint, std::ostream &out) {
  out << "#intentforge-ckpt v1\n";
  for (const auto &block : checkpoint.params.Blocks()) WriteBlock(block, out);
  if (checkpoint.centroids) {
    const auto &c = *checkpoint.centroids;
    WriteBlock({"centroids",
                std::span<const double>(c.data(), static_cast<std::size_t>(c.size())),
                c.rows(), c.cols()},
               out);
  }
}

Checkpoint ReadCheckpoint(std::istream &in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!Trim(line).empty()) return true;
    }
    return false;
  };
  if (!next_line() || Trim(line) != "#intentforge-ckpt v1")
    throw ParseError("missing '#intentforge-ckpt v1' header", line_no);
  std::map<std::string, Eigen::MatrixXd> blocks;
  while (next_line()) {
    const auto head = SplitWhitespace(line);
    if (head.size() != 3) throw ParseError("expected '<name> <rows> <cols>'", line_no);
    const auto rows = ParseDouble(head[1]);
    const auto cols = ParseDouble(head[2]);
    if (!rows || !cols || *rows < 0 || *cols < 0)
      throw ParseError("invalid block dimensions", line_no);
    // `head` views `line`, which the row reads below overwrite.
    const std::string name(head[0]);
    if (blocks.count(name)) throw ParseError("duplicate block '" + name + "'", line_no);
    if (name != "w1" && name != "b1" && name != "w2" && name != "b2" && name != "centroids")
      throw ParseError("unknown block '" + name + "'", line_no);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(*rows), static_cast<Eigen::Index>(*cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (!next_line()) throw ParseError("truncated block '" + name + "'", line_no);
      const auto tokens = SplitWhitespace(line);
      if (static_cast<Eigen::Index>(tokens.size()) != m.cols())
        throw ParseError("wrong number of values in block '" + name + "'", line_no);
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const auto v = ParseDouble(tokens[static_cast<std::size_t>(c)]);
        if (!v) throw ParseError("non-numeric value", line_no);
        m(r, c) = *v;
      }
    }
    blocks[name] = std::move(m);
  }
  auto take = [&](const char *name) -> const Eigen::MatrixXd & {
    auto it = blocks.find(name);
    if (it == blocks.end()) throw ParseError(std::string("missing block '") + name + "'", 0);
    return it->second;
  };
  auto take_vector = [&](const char *name) -> Eigen::VectorXd {
    const auto &m = take(name);
    if (m.cols() != 1) throw ParseError(std::string("block '") + name + "' must have one column", 0);
    return m.col(0);
  };
  Checkpoint ckpt;
  ckpt.params.w1 = take("w1");
  ckpt.params.b1 = take_vector("b1");
  ckpt.params.w2 = take("w2");
  ckpt.params.b2 = take_vector("b2");
  const auto &p = ckpt.params;
  if (p.b1.size() != p.w1.rows() || p.w2.cols() != p.w1.rows() ||
      p.b2.size() != p.w2.rows())
    throw ParseError("inconsistent encoder block shapes", 0);
  if (auto it = blocks.find("centroids"); it != blocks.end()) {
    if (it->second.cols() != p.w2.rows())
      throw ParseError("centroid dimension does not match the encoder", 0);
    ckpt.centroids = it->second;
  }
  return ckpt;
}

void SaveCheckpoint(const Checkpoint &checkpoint, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint '" + path + "'");
  WriteCheckpoint(checkpoint, out);
}

Checkpoint LoadCheckpoint(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint '" + path + "'");
  return ReadCheckpoint(in);
}

}  // namespace intentforge
