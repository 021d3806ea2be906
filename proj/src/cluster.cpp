// src/cluster.cpp

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

#include "intentforge/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "intentforge/error.hpp"
#include "intentforge/io_util.hpp"

namespace intentforge {

namespace {

// Squared distances from every point to every centroid (n x k).
Eigen::MatrixXd SquaredDistances(const Eigen::MatrixXd &points,
                                 const Eigen::MatrixXd &centroids) {
  Eigen::MatrixXd d(points.rows(), centroids.rows());
  for (Eigen::Index c = 0; c < centroids.rows(); ++c)
    d.col(c) = (points.rowwise() - centroids.row(c)).rowwise().squaredNorm();
  return d;
}

Eigen::MatrixXd PlusPlusInit(const Eigen::MatrixXd &points, std::size_t k,
                             std::mt19937_64 &rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centroids(static_cast<Eigen::Index>(k), points.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centroids.row(0) = points.row(first(rng));
  Eigen::VectorXd nearest =
      (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (std::size_t c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= nearest[i];
        if (target < 0.0 && nearest[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = first(rng);
    }
    centroids.row(static_cast<Eigen::Index>(c)) = points.row(chosen);
    nearest = nearest.cwiseMin(
        (points.rowwise() - points.row(chosen)).rowwise().squaredNorm());
  }
  return centroids;
}

ClusterModel LloydRun(const Eigen::MatrixXd &points, std::size_t k,
                      std::mt19937_64 &rng, std::size_t max_iterations) {
  const Eigen::Index n = points.rows();
  ClusterModel model;
  model.k = k;
  model.centroids = PlusPlusInit(points, k, rng);
  model.assignments.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> next(static_cast<std::size_t>(n));
  Eigen::VectorXd own(n);

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    const Eigen::MatrixXd dist = SquaredDistances(points, model.centroids);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      dist.row(i).minCoeff(&best);  // first minimum on ties
      next[static_cast<std::size_t>(i)] = static_cast<int>(best);
      own[i] = dist(i, best);
    }
    const bool converged = next == model.assignments;
    model.assignments = next;
    model.inertia = own.sum();
    model.inertia_history.push_back(model.inertia);
    if (converged) break;
    if (iter + 1 == max_iterations) break;

    // Mean update; empty clusters take the farthest not-yet-used point.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                                 points.cols());
    std::vector<std::size_t> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = model.assignments[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (std::size_t c = 0; c < k; ++c) {
      const auto row = static_cast<Eigen::Index>(c);
      if (counts[c] > 0) {
        model.centroids.row(row) = sums.row(row) / static_cast<double>(counts[c]);
        continue;
      }
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!used[static_cast<std::size_t>(i)] && (far < 0 || own[i] > own[far]))
          far = i;
      used[static_cast<std::size_t>(far)] = true;
      model.centroids.row(row) = points.row(far);
      own[far] = 0.0;
    }
  }
  return model;
}

}  // namespace

ClusterModel KMeans(const Eigen::MatrixXd &points, std::size_t k,
                    std::uint64_t seed, std::size_t restarts,
                    std::size_t max_iterations) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k == 0 || k > n)
    throw Error("kmeans: k must satisfy 1 <= k <= n (k=" + std::to_string(k) +
                ", n=" + std::to_string(n) + ")");
  if (restarts == 0) throw Error("kmeans: restarts must be positive");
  if (max_iterations == 0) throw Error("kmeans: max_iterations must be positive");
  ClusterModel best;
  for (std::size_t r = 0; r < restarts; ++r) {
    std::mt19937_64 rng(seed + r);
    ClusterModel run = LloydRun(points, k, rng, max_iterations);
    run.restart = r;
    if (r == 0 || run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

double Inertia(const Eigen::MatrixXd &points, const Eigen::MatrixXd &centroids,
               std::span<const int> assignments) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    total += (points.row(i) - centroids.row(assignments[static_cast<std::size_t>(i)]))
                 .squaredNorm();
  return total;
}

std::vector<double> SilhouetteSamples(const Eigen::MatrixXd &points,
                                      std::span<const int> assignments) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (assignments.size() != n)
    throw Error("silhouette: assignments and points differ in length");
  // Dense relabeling keeps arbitrary cluster ids usable as indices.
  std::map<int, std::size_t> dense;
  for (int a : assignments) dense.emplace(a, 0);
  if (dense.size() < 2)
    throw Error("silhouette: need at least two clusters");
  std::size_t next = 0;
  for (auto &entry : dense) entry.second = next++;
  std::vector<std::size_t> label(n);
  std::vector<double> sizes(dense.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    label[i] = dense[assignments[i]];
    sizes[label[i]] += 1.0;
  }

  std::vector<double> scores(n, 0.0);
  std::vector<double> sums(dense.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = label[i];
    if (sizes[own] <= 1.0) continue;
    const Eigen::VectorXd dist =
        (points.rowwise() - points.row(static_cast<Eigen::Index>(i)))
            .rowwise()
            .norm();
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      sums[label[j]] += dist[static_cast<Eigen::Index>(j)];
    const double a = sums[own] / (sizes[own] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c)
      if (c != own) b = std::min(b, sums[c] / sizes[c]);
    const double denom = std::max(a, b);
    scores[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return scores;
}

double Silhouette(const Eigen::MatrixXd &points,
                  std::span<const int> assignments) {
  const auto scores = SilhouetteSamples(points, assignments);
  double total = 0.0;
  for (double s : scores) total += s;
  return total / static_cast<double>(scores.size());
}

KSelectionResult SelectK(const Eigen::MatrixXd &points, std::size_t k_min,
                         std::size_t k_max, std::uint64_t seed,
                         std::size_t restarts) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k_min < 2 || k_min > k_max || k_max + 1 > n)
    throw Error("select_k: need 2 <= k_min <= k_max <= n - 1 (k_min=" +
                std::to_string(k_min) + ", k_max=" + std::to_string(k_max) +
                ", n=" + std::to_string(n) + ")");
  KSelectionResult result;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = k_min; k <= k_max; ++k) {
    const ClusterModel model = KMeans(points, k, seed, restarts);
    const std::set<int> distinct(model.assignments.begin(),
                                 model.assignments.end());
    // Fully duplicated data can leave a single occupied cluster.
    const double score =
        distinct.size() < 2 ? -1.0 : Silhouette(points, model.assignments);
    result.scores[k] = score;
    if (score > best) {
      best = score;
      result.chosen_k = k;
    }
  }
  return result;
}

SoftAssignment SoftAssign(const Eigen::MatrixXd &points,
                          const Eigen::MatrixXd &centroids, double alpha) {
  if (!(alpha > 0.0)) throw Error("soft_assign: alpha must be positive");
  if (points.cols() != centroids.cols())
    throw Error("soft_assign: points and centroids differ in dimension");
  if (!centroids.allFinite()) throw Error("soft_assign: non-finite centroid");
  const Eigen::MatrixXd dist = SquaredDistances(points, centroids);
  SoftAssignment out;
  out.alpha = alpha;
  // Normalize in log space so distant centroids do not underflow the sum.
  Eigen::MatrixXd logw =
      -(alpha + 1.0) / 2.0 * (dist.array() / alpha).log1p().matrix();
  out.q.resize(dist.rows(), dist.cols());
  for (Eigen::Index j = 0; j < dist.rows(); ++j) {
    const double m = logw.row(j).maxCoeff();
    out.q.row(j) = (logw.row(j).array() - m).exp().matrix();
    out.q.row(j) /= out.q.row(j).sum();
  }
  return out;
}

Eigen::MatrixXd TargetDistribution(const Eigen::MatrixXd &q) {
  const Eigen::RowVectorXd freq = q.colwise().sum();
  Eigen::MatrixXd p(q.rows(), q.cols());
  for (Eigen::Index j = 0; j < q.rows(); ++j) {
    for (Eigen::Index k = 0; k < q.cols(); ++k)
      p(j, k) = freq[k] > 0.0 ? q(j, k) * q(j, k) / freq[k] : 0.0;
    p.row(j) /= p.row(j).sum();
  }
  return p;
}

double ClusterLoss(const Eigen::MatrixXd &q, const Eigen::MatrixXd &p) {
  if (q.rows() != p.rows() || q.cols() != p.cols())
    throw Error("cluster_loss: Q and P shapes differ");
  if (q.rows() == 0) throw Error("cluster_loss: empty input");
  double total = 0.0;
  for (Eigen::Index j = 0; j < q.rows(); ++j) {
    for (Eigen::Index k = 0; k < q.cols(); ++k) {
      const double pj = p(j, k);
      if (pj <= 0.0) continue;
      if (q(j, k) <= 0.0)
        throw Error("cluster_loss: q is zero where p is positive");
      total += pj * std::log(pj / q(j, k));
    }
  }
  return total / static_cast<double>(q.rows());
}

ClusterLossGrad ClusterLossAndGrad(const Eigen::MatrixXd &points,
                                   const Eigen::MatrixXd &centroids,
                                   const Eigen::MatrixXd &target,
                                   double alpha) {
  const SoftAssignment soft = SoftAssign(points, centroids, alpha);
  ClusterLossGrad out;
  out.loss = ClusterLoss(soft.q, target);
  const Eigen::Index n = points.rows();
  const Eigen::Index k = centroids.rows();
  const Eigen::MatrixXd dist = SquaredDistances(points, centroids);
  out.grad_points = Eigen::MatrixXd::Zero(n, points.cols());
  out.grad_centroids = Eigen::MatrixXd::Zero(k, points.cols());
  for (Eigen::Index j = 0; j < n; ++j) {
    const double mass = target.row(j).sum();
    for (Eigen::Index c = 0; c < k; ++c) {
      // d loss / d dist_jc through log q_jc = log w_jc - log sum_c' w_jc'.
      const double dlogw = (soft.q(j, c) * mass - target(j, c)) /
                           static_cast<double>(n);
      const double ddist = dlogw * (-(alpha + 1.0) / (2.0 * (alpha + dist(j, c))));
      const Eigen::RowVectorXd diff = points.row(j) - centroids.row(c);
      out.grad_points.row(j) += 2.0 * ddist * diff;
      out.grad_centroids.row(c) -= 2.0 * ddist * diff;
    }
  }
  return out;
}

void WriteAssignmentsCsv(std::span<const std::string> ids,
                         std::span<const int> assignments, std::ostream &out) {
  if (ids.size() != assignments.size())
    throw Error("assignments: ids and clusters differ in length");
  out << "utterance_id,cluster_id\n";
  for (std::size_t i = 0; i < ids.size(); ++i)
    out << ids[i] << ',' << assignments[i] << '\n';
}

std::pair<std::vector<std::string>, std::vector<int>> ReadAssignmentsCsv(
    std::istream &in) {
  std::pair<std::vector<std::string>, std::vector<int>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = Trim(line);
    if (trimmed.empty()) continue;
    if (line_no == 1 && trimmed == "utterance_id,cluster_id") continue;
    const auto comma = trimmed.rfind(',');
    if (comma == std::string_view::npos)
      throw ParseError("expected 'utterance_id,cluster_id'", line_no);
    const auto value = ParseDouble(trimmed.substr(comma + 1));
    if (!value || *value != std::floor(*value))
      throw ParseError("cluster id is not an integer", line_no);
    out.first.emplace_back(trimmed.substr(0, comma));
    out.second.push_back(static_cast<int>(*value));
  }
  return out;
}

void WriteKSelectionCsv(const KSelectionResult &result, std::ostream &out) {
  out << "k,mean_silhouette\n";
  for (const auto &[k, score] : result.scores)
    out << k << ',' << FormatDouble(score) << '\n';
}

}  // namespace intentforge
