// include/intentforge/contrastive.hpp

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
#include <vector>

#include <Eigen/Dense>

#include "intentforge/neighborhood.hpp"

namespace intentforge {

struct ContrastiveConfig {
  double tau = 0.1;
  std::size_t batch_m = 32;
};

struct LossReport {
  double total = 0.0;               // mean of per_instance
  std::vector<double> per_instance;  // one term per batch row
};

struct LossAndGrad {
  LossReport loss;
  Eigen::MatrixXd grad;  // d total / d rows, same shape as the input
};

/// Multi-positive contrastive loss over a batch of 2M rows.
///
/// For row i with positive set C_i (row i of `adjacency`):
///   l_i = -(1/|C_i|) sum_{j in C_i} log softmax_{k != i}(s_ik / tau)_j,
/// where s_ik is the plain dot product of rows i and k. The total is the mean
/// of l_i. Rows are expected to be unit-norm; the loss itself does not
/// renormalize, so the gradient is with respect to the raw rows. Throws Error
/// for tau <= 0, a size mismatch, or a row without positives.
LossReport ContrastiveLoss(const Eigen::MatrixXd &rows,
                           const AdjacencyMatrix &adjacency, double tau);
Eigen::MatrixXd ContrastiveGrad(const Eigen::MatrixXd &rows,
                                const AdjacencyMatrix &adjacency, double tau);
LossAndGrad ContrastiveLossAndGrad(const Eigen::MatrixXd &rows,
                                   const AdjacencyMatrix &adjacency, double tau);

/// d total / d tau at fixed rows.
double ContrastiveTauGrad(const Eigen::MatrixXd &rows,
                          const AdjacencyMatrix &adjacency, double tau);

/// ContrastiveLoss with only the (2i, 2i+1) partners as positives.
LossReport InstanceClLoss(const Eigen::MatrixXd &rows, double tau);
LossAndGrad InstanceClLossAndGrad(const Eigen::MatrixXd &rows, double tau);

}  // namespace intentforge
