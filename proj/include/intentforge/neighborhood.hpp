// include/intentforge/neighborhood.hpp

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

#include <cstddef>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include "intentforge/encoder.hpp"

namespace intentforge {

/// Label id per item; std::nullopt marks an unlabeled item.
using LabelId = std::optional<int>;

/// Exact top-K neighbor lists by inner product.
struct NeighborhoodIndex {
  std::size_t k = 0;
  // neighbors[i] holds exactly k indices, most similar first, never i itself.
  std::vector<std::vector<std::size_t>> neighbors;
};

/// For each row, the K other rows with the largest inner product, ties broken
/// towards the lower index. Throws Error unless 1 <= K < n.
NeighborhoodIndex Knn(const EmbeddingMatrix &embeddings, std::size_t k);

/// Writes "<id>\t<neighbor ids>" lines, space-separated neighbors.
void WriteNeighborhood(const NeighborhoodIndex &index,
                       std::span<const std::string> ids, std::ostream &out);

/// One minibatch of anchors, each paired with one sampled neighbor.
///
/// The augmented batch built from a plan has 2M rows laid out as
/// [x_1, x'_1, x_2, x'_2, ...]: row 2i is slot i's anchor view and row 2i+1
/// its neighbor view.
struct BatchPlan {
  std::vector<std::size_t> members;
  std::vector<std::size_t> sampled_neighbor;
  std::vector<LabelId> labels;  // per slot; applies to both of its views

  std::size_t size() const { return members.size(); }
};

/// Draws one neighbor uniformly from each member's neighbor list. `labels` is
/// indexed by item (empty means all unlabeled).
BatchPlan PlanBatch(const NeighborhoodIndex &index,
                    std::span<const std::size_t> member_ids,
                    std::span<const LabelId> labels, std::mt19937_64 &rng);

/// Symmetric 0/1 matrix over the 2M augmented views of a batch.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(std::size_t size)
      : size_(size), bits_(size * size, 0) {}

  std::size_t size() const { return size_; }
  bool operator()(std::size_t a, std::size_t b) const {
    return bits_[a * size_ + b] != 0;
  }
  /// Sets (a, b) and (b, a). Diagonal requests are ignored.
  void Link(std::size_t a, std::size_t b);
  std::size_t RowCount(std::size_t a) const;

  bool operator==(const AdjacencyMatrix &) const = default;

 private:
  std::size_t size_ = 0;
  std::vector<unsigned char> bits_;
};

/// Positive relations for a planned batch: views a != b are linked when they
/// belong to the same slot, when their slots carry the same non-null label,
/// or when one view's utterance is the sampled neighbor of the other's
/// (some slot s has {members[s], sampled_neighbor[s]} = {u_a, u_b}).
AdjacencyMatrix BuildAdjacency(const BatchPlan &plan);

/// Adjacency with only the slot partners (2i, 2i+1) linked.
AdjacencyMatrix PartnerAdjacency(std::size_t num_pairs);

}  // namespace intentforge
