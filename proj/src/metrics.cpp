// src/metrics.cpp

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

#include "intentforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace intentforge {

namespace {

using Weights = std::vector<std::vector<std::int64_t>>;

// Best total weight over the sub-table restricted to active rows and columns,
// zero-padded to square.
std::int64_t OptimalMass(const Weights &w, const std::vector<bool> &row_active,
                         const std::vector<bool> &col_active) {
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < row_active.size(); ++i)
    if (row_active[i]) rows.push_back(i);
  for (std::size_t j = 0; j < col_active.size(); ++j)
    if (col_active[j]) cols.push_back(j);
  const std::size_t size = std::max(rows.size(), cols.size());
  if (size == 0) return 0;
  Weights sub(size, std::vector<std::int64_t>(size, 0));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) sub[i][j] = w[rows[i]][cols[j]];
  const auto assignment = MaxWeightAssignment(sub);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < size; ++i)
    total += sub[i][static_cast<std::size_t>(assignment[i])];
  return total;
}

double Comb2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

ContingencyTable TableFromCounts(std::vector<std::vector<std::int64_t>> counts) {
  ContingencyTable table;
  const std::size_t cols = counts.empty() ? 0 : counts.front().size();
  for (const auto &row : counts) {
    if (row.size() != cols) throw Error("contingency: ragged count table");
    for (auto c : row) {
      if (c < 0) throw Error("contingency: negative count");
      table.n += c;
    }
  }
  for (std::size_t i = 0; i < counts.size(); ++i)
    table.cluster_labels.push_back(std::to_string(i));
  for (std::size_t j = 0; j < cols; ++j)
    table.reference_labels.push_back(std::to_string(j));
  table.counts = std::move(counts);
  return table;
}

std::vector<std::pair<int, int>> Alignment::Pairs() const {
  std::vector<std::pair<int, int>> out;
  for (std::size_t c = 0; c < cluster_to_reference.size(); ++c)
    if (cluster_to_reference[c] >= 0)
      out.emplace_back(static_cast<int>(c), cluster_to_reference[c]);
  return out;
}

std::vector<int> MaxWeightAssignment(const Weights &weights) {
  const std::size_t n = weights.size();
  for (const auto &row : weights)
    if (row.size() != n) throw Error("assignment: weight matrix is not square");
  // Min-cost formulation on cost = -weight; arrays are 1-based, column 0 is a
  // virtual source.
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<std::int64_t> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      std::int64_t delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const std::int64_t cur = -weights[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (std::size_t j = 1; j <= n; ++j)
    if (match[j] != 0) row_to_col[match[j] - 1] = static_cast<int>(j - 1);
  return row_to_col;
}

Alignment HungarianAlign(const ContingencyTable &table) {
  const std::size_t rows = table.num_clusters();
  const std::size_t cols = table.num_references();
  const Weights &w = table.counts;
  std::vector<bool> row_active(rows, true), col_active(cols, true);
  const std::int64_t best = OptimalMass(w, row_active, col_active);

  // Fix clusters one at a time to the smallest reference that still admits an
  // optimal completion.
  Alignment alignment;
  alignment.cluster_to_reference.assign(rows, -1);
  std::int64_t fixed = 0;
  std::size_t rows_left = rows, cols_left = cols;
  for (std::size_t c = 0; c < rows; ++c) {
    row_active[c] = false;
    --rows_left;
    bool placed = false;
    for (std::size_t r = 0; r < cols && !placed; ++r) {
      if (!col_active[r]) continue;
      col_active[r] = false;
      if (fixed + w[c][r] + OptimalMass(w, row_active, col_active) == best) {
        alignment.cluster_to_reference[c] = static_cast<int>(r);
        fixed += w[c][r];
        --cols_left;
        placed = true;
      } else {
        col_active[r] = true;
      }
    }
    // Leaving c unmatched is only allowed while the remaining clusters can
    // still cover every remaining reference.
    if (!placed && rows_left < cols_left)
      throw Error("hungarian_align: no optimal completion found");
  }
  alignment.matched_mass = fixed;
  return alignment;
}

double Accuracy(const ContingencyTable &table, const Alignment &alignment) {
  return static_cast<double>(alignment.matched_mass) /
         static_cast<double>(table.n);
}

double Accuracy(const ContingencyTable &table) {
  return Accuracy(table, HungarianAlign(table));
}

double Nmi(const ContingencyTable &table) {
  const double n = static_cast<double>(table.n);
  std::vector<double> row_sum(table.num_clusters(), 0.0);
  std::vector<double> col_sum(table.num_references(), 0.0);
  for (std::size_t c = 0; c < row_sum.size(); ++c)
    for (std::size_t r = 0; r < col_sum.size(); ++r) {
      row_sum[c] += static_cast<double>(table.counts[c][r]);
      col_sum[r] += static_cast<double>(table.counts[c][r]);
    }
  auto entropy = [n](const std::vector<double> &sums) {
    double h = 0.0;
    for (double s : sums)
      if (s > 0.0) h -= (s / n) * std::log(s / n);
    return h;
  };
  const double h_pred = entropy(row_sum);
  const double h_ref = entropy(col_sum);
  if (h_pred == 0.0 && h_ref == 0.0) return 1.0;
  if (h_pred == 0.0 || h_ref == 0.0) return 0.0;
  double mi = 0.0;
  for (std::size_t c = 0; c < row_sum.size(); ++c)
    for (std::size_t r = 0; r < col_sum.size(); ++r) {
      const double nij = static_cast<double>(table.counts[c][r]);
      if (nij > 0.0) mi += (nij / n) * std::log(nij * n / (row_sum[c] * col_sum[r]));
    }
  return std::clamp(2.0 * mi / (h_pred + h_ref), 0.0, 1.0);
}

double Ari(const ContingencyTable &table) {
  if (table.n < 2) throw Error("ari: need at least two items");
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  std::vector<double> col_sum(table.num_references(), 0.0);
  for (std::size_t c = 0; c < table.num_clusters(); ++c) {
    double row = 0.0;
    for (std::size_t r = 0; r < table.num_references(); ++r) {
      const double nij = static_cast<double>(table.counts[c][r]);
      index += Comb2(nij);
      row += nij;
      col_sum[r] += nij;
    }
    sum_rows += Comb2(row);
  }
  for (double s : col_sum) sum_cols += Comb2(s);
  const double expected = sum_rows * sum_cols / Comb2(static_cast<double>(table.n));
  const double max_index = (sum_rows + sum_cols) / 2.0;
  if (max_index == expected) {
    // Both partitions are all-singletons or all-one-cluster.
    return index == max_index ? 1.0 : 0.0;
  }
  return (index - expected) / (max_index - expected);
}

PrecisionRecallF1 Prf(const ContingencyTable &table, const Alignment &alignment) {
  const std::size_t refs = table.num_references();
  std::vector<double> cluster_size(table.num_clusters(), 0.0);
  std::vector<double> ref_size(refs, 0.0);
  for (std::size_t c = 0; c < table.num_clusters(); ++c)
    for (std::size_t r = 0; r < refs; ++r) {
      cluster_size[c] += static_cast<double>(table.counts[c][r]);
      ref_size[r] += static_cast<double>(table.counts[c][r]);
    }
  PrecisionRecallF1 out;
  for (const auto &[c, r] : alignment.Pairs()) {
    const auto cu = static_cast<std::size_t>(c);
    const auto ru = static_cast<std::size_t>(r);
    const double hit = static_cast<double>(table.counts[cu][ru]);
    const double p = cluster_size[cu] > 0.0 ? hit / cluster_size[cu] : 0.0;
    const double rc = ref_size[ru] > 0.0 ? hit / ref_size[ru] : 0.0;
    out.precision += p;
    out.recall += rc;
    out.f1 += (p + rc) > 0.0 ? 2.0 * p * rc / (p + rc) : 0.0;
  }
  out.precision /= static_cast<double>(refs);
  out.recall /= static_cast<double>(refs);
  out.f1 /= static_cast<double>(refs);
  return out;
}

PrecisionRecallF1 Prf(const ContingencyTable &table) {
  return Prf(table, HungarianAlign(table));
}

MetricsReport Evaluate(const ContingencyTable &table, const std::string &task) {
  const Alignment alignment = HungarianAlign(table);
  MetricsReport report;
  report.task = task;
  report.n = table.n;
  report.acc = Accuracy(table, alignment);
  report.nmi = Nmi(table);
  report.ari = table.n >= 2 ? Ari(table) : 1.0;
  const auto prf = Prf(table, alignment);
  report.precision = prf.precision;
  report.recall = prf.recall;
  report.f1 = prf.f1;
  for (const auto &[c, r] : alignment.Pairs())
    report.alignment.emplace_back(table.cluster_labels[static_cast<std::size_t>(c)],
                                  table.reference_labels[static_cast<std::size_t>(r)]);
  return report;
}

void WriteReportJson(const MetricsReport &report, std::ostream &out) {
  nlohmann::ordered_json doc;
  doc["task"] = report.task;
  doc["n"] = report.n;
  doc["acc"] = report.acc;
  doc["nmi"] = report.nmi;
  doc["ari"] = report.ari;
  doc["precision"] = report.precision;
  doc["recall"] = report.recall;
  doc["f1"] = report.f1;
  auto pairs = nlohmann::ordered_json::array();
  for (const auto &[cluster, intent] : report.alignment)
    pairs.push_back({{"cluster", cluster}, {"intent", intent}});
  doc["alignment"] = std::move(pairs);
  out << doc.dump(2) << '\n';
}

std::vector<int> NearestCentroidPredict(
    std::span<const Eigen::MatrixXd> sample_groups,
    const Eigen::MatrixXd &heldout) {
  if (sample_groups.size() < 2)
    throw Error("task2: need at least two induced intents");
  Eigen::MatrixXd centroids(static_cast<Eigen::Index>(sample_groups.size()),
                            heldout.cols());
  for (std::size_t g = 0; g < sample_groups.size(); ++g) {
    const auto &group = sample_groups[g];
    if (group.rows() == 0)
      throw Error("task2: induced intent " + std::to_string(g) +
                  " has no sample utterances");
    if (group.cols() != heldout.cols())
      throw Error("task2: sample and held-out dimensions differ");
    Eigen::RowVectorXd mean = group.colwise().mean();
    const double norm = mean.norm();
    if (norm > 0.0) mean /= norm;
    centroids.row(static_cast<Eigen::Index>(g)) = mean;
  }
  // Row norms do not change the per-row argmax, so dot products suffice.
  const Eigen::MatrixXd scores = heldout * centroids.transpose();
  std::vector<int> predictions(static_cast<std::size_t>(heldout.rows()));
  for (Eigen::Index i = 0; i < heldout.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index g = 1; g < scores.cols(); ++g)
      if (scores(i, g) > scores(i, best)) best = g;
    predictions[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return predictions;
}

MetricsReport Task2EvalEmbeddings(std::span<const Eigen::MatrixXd> sample_groups,
                                  const Eigen::MatrixXd &heldout,
                                  const std::vector<std::string> &references) {
  const auto predictions = NearestCentroidPredict(sample_groups, heldout);
  return Evaluate(predictions, references, "task2");
}

MetricsReport Task2Eval(const std::vector<std::vector<std::string>> &induced,
                        const std::vector<std::string> &heldout_texts,
                        const std::vector<std::string> &heldout_references,
                        const EncoderParams &params) {
  if (induced.size() < 2) throw Error("task2: need at least two induced intents");
  std::vector<Eigen::MatrixXd> groups;
  for (std::size_t g = 0; g < induced.size(); ++g) {
    if (induced[g].empty())
      throw Error("task2: induced intent " + std::to_string(g) +
                  " has no sample utterances");
    groups.push_back(Embed(params, induced[g]).values);
  }
  const auto heldout = Embed(params, heldout_texts).values;
  return Task2EvalEmbeddings(groups, heldout, heldout_references);
}

}  // namespace intentforge
