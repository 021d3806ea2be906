// src/neighborhood.cpp

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

#include "intentforge/neighborhood.hpp"

#include <algorithm>
#include <numeric>

#include "intentforge/error.hpp"

namespace intentforge {

NeighborhoodIndex Knn(const EmbeddingMatrix &embeddings, std::size_t k) {
  const std::size_t n = embeddings.rows();
  if (k == 0 || k >= n)
    throw Error("knn: K must satisfy 1 <= K < n (K=" + std::to_string(k) +
                ", n=" + std::to_string(n) + ")");
  const Eigen::MatrixXd sims = embeddings.values * embeddings.values.transpose();
  NeighborhoodIndex index;
  index.k = k;
  index.neighbors.resize(n);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    candidates.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) candidates.push_back(j);
    const auto row = static_cast<Eigen::Index>(i);
    auto closer = [&](std::size_t a, std::size_t b) {
      const double sa = sims(row, static_cast<Eigen::Index>(a));
      const double sb = sims(row, static_cast<Eigen::Index>(b));
      return sa != sb ? sa > sb : a < b;
    };
    std::partial_sort(candidates.begin(),
                      candidates.begin() + static_cast<std::ptrdiff_t>(k),
                      candidates.end(), closer);
    index.neighbors[i].assign(candidates.begin(),
                              candidates.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return index;
}

void WriteNeighborhood(const NeighborhoodIndex &index,
                       std::span<const std::string> ids, std::ostream &out) {
  for (std::size_t i = 0; i < index.neighbors.size(); ++i) {
    out << ids[i] << '\t';
    for (std::size_t j = 0; j < index.neighbors[i].size(); ++j)
      out << (j ? " " : "") << ids[index.neighbors[i][j]];
    out << '\n';
  }
}

BatchPlan PlanBatch(const NeighborhoodIndex &index,
                    std::span<const std::size_t> member_ids,
                    std::span<const LabelId> labels, std::mt19937_64 &rng) {
  BatchPlan plan;
  plan.members.assign(member_ids.begin(), member_ids.end());
  std::uniform_int_distribution<std::size_t> pick(0, index.k - 1);
  for (std::size_t member : plan.members) {
    if (member >= index.neighbors.size())
      throw Error("plan_batch: member index out of range");
    plan.sampled_neighbor.push_back(index.neighbors[member][pick(rng)]);
    plan.labels.push_back(labels.empty() ? LabelId{} : labels[member]);
  }
  return plan;
}

void AdjacencyMatrix::Link(std::size_t a, std::size_t b) {
  if (a == b) return;
  bits_[a * size_ + b] = 1;
  bits_[b * size_ + a] = 1;
}

std::size_t AdjacencyMatrix::RowCount(std::size_t a) const {
  return static_cast<std::size_t>(
      std::count(bits_.begin() + static_cast<std::ptrdiff_t>(a * size_),
                 bits_.begin() + static_cast<std::ptrdiff_t>((a + 1) * size_), 1));
}

AdjacencyMatrix BuildAdjacency(const BatchPlan &plan) {
  const std::size_t m = plan.size();
  AdjacencyMatrix adj(2 * m);
  auto utterance = [&](std::size_t view) {
    return view % 2 == 0 ? plan.members[view / 2]
                         : plan.sampled_neighbor[view / 2];
  };
  for (std::size_t a = 0; a < 2 * m; ++a) {
    for (std::size_t b = a + 1; b < 2 * m; ++b) {
      const std::size_t sa = a / 2, sb = b / 2;
      bool positive = sa == sb;
      const auto &la = plan.labels[sa];
      const auto &lb = plan.labels[sb];
      positive = positive || (la && lb && *la == *lb);
      const std::size_t ua = utterance(a), ub = utterance(b);
      for (std::size_t s = 0; !positive && s < m; ++s) {
        const std::size_t x = plan.members[s], y = plan.sampled_neighbor[s];
        positive = (ua == x && ub == y) || (ua == y && ub == x);
      }
      if (positive) adj.Link(a, b);
    }
  }
  return adj;
}

AdjacencyMatrix PartnerAdjacency(std::size_t num_pairs) {
  AdjacencyMatrix adj(2 * num_pairs);
  for (std::size_t i = 0; i < num_pairs; ++i) adj.Link(2 * i, 2 * i + 1);
  return adj;
}

}  // namespace intentforge
