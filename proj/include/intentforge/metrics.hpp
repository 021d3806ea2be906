// include/intentforge/metrics.hpp

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
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "intentforge/encoder.hpp"
#include "intentforge/error.hpp"

namespace intentforge {

/// counts[c][r] = number of items predicted c whose reference is r. Rows and
/// columns follow the sorted order of the original label values.
struct ContingencyTable {
  std::vector<std::vector<std::int64_t>> counts;
  std::vector<std::string> cluster_labels;
  std::vector<std::string> reference_labels;
  std::int64_t n = 0;

  std::size_t num_clusters() const { return cluster_labels.size(); }
  std::size_t num_references() const { return reference_labels.size(); }
};

/// Table built directly from counts; labels default to "0", "1", ...
ContingencyTable TableFromCounts(std::vector<std::vector<std::int64_t>> counts);

namespace detail {
template <typename T>
std::string LabelString(const T &value) {
  if constexpr (std::is_convertible_v<const T &, std::string>)
    return std::string(value);
  else
    return std::to_string(value);
}
}  // namespace detail

template <typename P, typename R>
ContingencyTable Contingency(std::span<const P> pred, std::span<const R> ref) {
  if (pred.size() != ref.size())
    throw Error("contingency: prediction and reference lengths differ (" +
                std::to_string(pred.size()) + " vs " +
                std::to_string(ref.size()) + ")");
  if (pred.empty()) throw Error("contingency: no items");
  std::map<P, std::size_t> rows;
  std::map<R, std::size_t> cols;
  for (const auto &p : pred) rows.emplace(p, 0);
  for (const auto &r : ref) cols.emplace(r, 0);
  ContingencyTable table;
  for (auto &[label, index] : rows) {
    index = table.cluster_labels.size();
    table.cluster_labels.push_back(detail::LabelString(label));
  }
  for (auto &[label, index] : cols) {
    index = table.reference_labels.size();
    table.reference_labels.push_back(detail::LabelString(label));
  }
  table.counts.assign(rows.size(), std::vector<std::int64_t>(cols.size(), 0));
  for (std::size_t i = 0; i < pred.size(); ++i)
    ++table.counts[rows[pred[i]]][cols[ref[i]]];
  table.n = static_cast<std::int64_t>(pred.size());
  return table;
}

template <typename P, typename R>
ContingencyTable Contingency(const std::vector<P> &pred,
                             const std::vector<R> &ref) {
  return Contingency(std::span<const P>(pred), std::span<const R>(ref));
}

/// One-to-one cluster -> reference matching.
struct Alignment {
  // cluster_to_reference[c] is a reference column, or -1 when unmatched.
  std::vector<int> cluster_to_reference;
  std::int64_t matched_mass = 0;

  std::vector<std::pair<int, int>> Pairs() const;
};

/// Solves the square assignment problem maximizing total weight (Hungarian
/// algorithm with potentials, O(n^3)). Returns row -> column.
std::vector<int> MaxWeightAssignment(
    const std::vector<std::vector<std::int64_t>> &weights);

/// Matching of size min(C, R) that maximizes matched mass. Among optimal
/// matchings the one whose sequence (m(0), m(1), ...) is lexicographically
/// smallest wins, with "unmatched" ordered after every reference.
Alignment HungarianAlign(const ContingencyTable &table);

double Accuracy(const ContingencyTable &table);
double Accuracy(const ContingencyTable &table, const Alignment &alignment);

/// 2 I(pred; ref) / (H(pred) + H(ref)) in nats; 1 when both entropies are 0.
double Nmi(const ContingencyTable &table);

/// Adjusted Rand index from pair counts. Throws Error when n < 2.
double Ari(const ContingencyTable &table);

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Macro average over reference intents under the Hungarian alignment;
/// unmatched references contribute zeros.
PrecisionRecallF1 Prf(const ContingencyTable &table, const Alignment &alignment);
PrecisionRecallF1 Prf(const ContingencyTable &table);

struct MetricsReport {
  std::string task;
  std::int64_t n = 0;
  double acc = 0.0;
  double nmi = 0.0;
  double ari = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // (cluster label, reference label) for every matched pair.
  std::vector<std::pair<std::string, std::string>> alignment;
};

MetricsReport Evaluate(const ContingencyTable &table, const std::string &task);

template <typename P, typename R>
MetricsReport Evaluate(const std::vector<P> &pred, const std::vector<R> &ref,
                       const std::string &task = "task1") {
  return Evaluate(Contingency(pred, ref), task);
}

/// {task, n, acc, nmi, ari, precision, recall, f1, alignment: [{cluster,
/// intent}]}, keys in that order, followed by a newline.
void WriteReportJson(const MetricsReport &report, std::ostream &out);

// Open intent induction: induced intents are represented by sample
// utterances and scored through a classifier on held-out labeled utterances.

/// Index of the centroid with the highest cosine to each row (ties to the
/// lower index). Each centroid is the mean of its group's sample rows.
std::vector<int> NearestCentroidPredict(
    std::span<const Eigen::MatrixXd> sample_groups,
    const Eigen::MatrixXd &heldout);

MetricsReport Task2EvalEmbeddings(std::span<const Eigen::MatrixXd> sample_groups,
                                  const Eigen::MatrixXd &heldout,
                                  const std::vector<std::string> &references);

/// Embeds samples and held-out texts with `params` and scores the nearest
/// centroid predictions. Throws Error for fewer than two induced intents or an
/// intent without samples.
MetricsReport Task2Eval(const std::vector<std::vector<std::string>> &induced,
                        const std::vector<std::string> &heldout_texts,
                        const std::vector<std::string> &heldout_references,
                        const EncoderParams &params);

}  // namespace intentforge
