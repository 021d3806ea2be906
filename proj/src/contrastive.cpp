// src/contrastive.cpp

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

#include "intentforge/contrastive.hpp"

#include <cmath>
#include <limits>

#include "intentforge/error.hpp"

namespace intentforge {

namespace {

void CheckInputs(const Eigen::MatrixXd &rows, const AdjacencyMatrix &adjacency,
                 double tau) {
  if (!(tau > 0.0)) throw Error("contrastive loss: tau must be positive");
  if (static_cast<std::size_t>(rows.rows()) != adjacency.size())
    throw Error("contrastive loss: batch has " + std::to_string(rows.rows()) +
                " rows but adjacency is " + std::to_string(adjacency.size()) +
                "x" + std::to_string(adjacency.size()));
  if (rows.rows() < 2) throw Error("contrastive loss: need at least 2 rows");
  for (std::size_t i = 0; i < adjacency.size(); ++i)
    if (adjacency.RowCount(i) == 0)
      throw Error("contrastive loss: row " + std::to_string(i) +
                  " has no positive");
}

// Per-row softmax over k != i of s_ik / tau, with the matching loss term.
// `coeff` receives d l_i / d s_ik, i.e. (p_ik - [k in C_i]/|C_i|) / tau.
double RowTerm(const Eigen::MatrixXd &sims, const AdjacencyMatrix &adjacency,
               double tau, Eigen::Index i, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> coeff) {
  const Eigen::Index n = sims.rows();
  double max_logit = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k)
    if (k != i) max_logit = std::max(max_logit, sims(i, k) / tau);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < n; ++k)
    if (k != i) sum += std::exp(sims(i, k) / tau - max_logit);
  const double lse = max_logit + std::log(sum);

  const auto row = static_cast<std::size_t>(i);
  const double positives = static_cast<double>(adjacency.RowCount(row));
  double positive_logits = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == i) {
      coeff[k] = 0.0;
      continue;
    }
    const bool pos = adjacency(row, static_cast<std::size_t>(k));
    if (pos) positive_logits += sims(i, k) / tau;
    const double p = std::exp(sims(i, k) / tau - lse);
    coeff[k] = (p - (pos ? 1.0 / positives : 0.0)) / tau;
  }
  return lse - positive_logits / positives;
}

}  // namespace

LossAndGrad ContrastiveLossAndGrad(const Eigen::MatrixXd &rows,
                                   const AdjacencyMatrix &adjacency,
                                   double tau) {
  CheckInputs(rows, adjacency, tau);
  const Eigen::Index n = rows.rows();
  const Eigen::MatrixXd sims = rows * rows.transpose();
  Eigen::MatrixXd coeff(n, n);
  LossAndGrad out;
  out.loss.per_instance.resize(static_cast<std::size_t>(n));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double l = RowTerm(sims, adjacency, tau, i, coeff.row(i));
    out.loss.per_instance[static_cast<std::size_t>(i)] = l;
    total += l;
  }
  out.loss.total = total / static_cast<double>(n);
  coeff /= static_cast<double>(n);
  out.grad = (coeff + coeff.transpose()) * rows;
  return out;
}

LossReport ContrastiveLoss(const Eigen::MatrixXd &rows,
                           const AdjacencyMatrix &adjacency, double tau) {
  return ContrastiveLossAndGrad(rows, adjacency, tau).loss;
}

Eigen::MatrixXd ContrastiveGrad(const Eigen::MatrixXd &rows,
                                const AdjacencyMatrix &adjacency, double tau) {
  return ContrastiveLossAndGrad(rows, adjacency, tau).grad;
}

double ContrastiveTauGrad(const Eigen::MatrixXd &rows,
                          const AdjacencyMatrix &adjacency, double tau) {
  CheckInputs(rows, adjacency, tau);
  const Eigen::Index n = rows.rows();
  const Eigen::MatrixXd sims = rows * rows.transpose();
  Eigen::RowVectorXd coeff(n);
  double grad = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    RowTerm(sims, adjacency, tau, i, coeff);
    // coeff_k = d l_i / d s_ik and d s_ik/tau / d tau = -s_ik / tau^2, so
    // d l_i / d tau = sum_k coeff_k * tau * (-s_ik / tau^2).
    for (Eigen::Index k = 0; k < n; ++k) grad -= coeff[k] * sims(i, k) / tau;
  }
  return grad / static_cast<double>(n);
}

LossReport InstanceClLoss(const Eigen::MatrixXd &rows, double tau) {
  return InstanceClLossAndGrad(rows, tau).loss;
}

LossAndGrad InstanceClLossAndGrad(const Eigen::MatrixXd &rows, double tau) {
  if (rows.rows() % 2 != 0)
    throw Error("instance contrastive loss: batch must hold view pairs");
  return ContrastiveLossAndGrad(
      rows, PartnerAdjacency(static_cast<std::size_t>(rows.rows()) / 2), tau);
}

}  // namespace intentforge
