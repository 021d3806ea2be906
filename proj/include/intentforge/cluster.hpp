// include/intentforge/cluster.hpp

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
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace intentforge {

inline constexpr std::size_t kDefaultRestarts = 10;
inline constexpr std::size_t kMaxLloydIterations = 300;

struct ClusterModel {
  std::size_t k = 0;
  Eigen::MatrixXd centroids;     // k x d
  std::vector<int> assignments;  // one cluster index per point
  double inertia = 0.0;          // sum of squared distances to own centroid
  // Inertia after every assignment step of the winning restart.
  std::vector<double> inertia_history;
  std::size_t restart = 0;  // index of the winning restart
};

/// k-means with k-means++ seeding and Lloyd iterations.
///
/// Restart r draws from mt19937_64(seed + r). Each run alternates nearest
/// centroid assignment (ties to the lower index) with mean updates until the
/// assignments stop changing or `max_iterations` assignment steps have run.
/// A cluster left empty by an assignment step is reseeded at the point
/// farthest from its current centroid. The run with the lowest inertia wins,
/// ties going to the earlier restart. The returned centroids are the ones the
/// returned assignments were computed against.
///
/// Throws Error when k == 0, k > n or restarts == 0.
ClusterModel KMeans(const Eigen::MatrixXd &points, std::size_t k,
                    std::uint64_t seed, std::size_t restarts = kDefaultRestarts,
                    std::size_t max_iterations = kMaxLloydIterations);

/// Sum over points of the squared Euclidean distance to the assigned centroid.
double Inertia(const Eigen::MatrixXd &points, const Eigen::MatrixXd &centroids,
               std::span<const int> assignments);

/// Per-point silhouette (b - a) / max(a, b) on Euclidean distances; points in
/// singleton clusters score 0. Cluster labels may be any ints. Throws Error
/// when fewer than two distinct clusters are present or sizes mismatch.
std::vector<double> SilhouetteSamples(const Eigen::MatrixXd &points,
                                      std::span<const int> assignments);
double Silhouette(const Eigen::MatrixXd &points,
                  std::span<const int> assignments);

struct KSelectionResult {
  std::size_t chosen_k = 0;
  std::map<std::size_t, double> scores;  // k -> mean silhouette
};

/// Runs KMeans for every k in [k_min, k_max] and keeps the k with the highest
/// mean silhouette (ties to the smaller k). Requires 2 <= k_min <= k_max <= n-1.
KSelectionResult SelectK(const Eigen::MatrixXd &points, std::size_t k_min,
                         std::size_t k_max, std::uint64_t seed,
                         std::size_t restarts = kDefaultRestarts);

// Student's-t soft clustering head used by the joint training stage.

struct SoftAssignment {
  Eigen::MatrixXd q;  // n x k, rows sum to 1
  double alpha = 1.0;
};

/// q_jk proportional to (1 + |e_j - mu_k|^2 / alpha)^(-(alpha + 1) / 2).
SoftAssignment SoftAssign(const Eigen::MatrixXd &points,
                          const Eigen::MatrixXd &centroids, double alpha = 1.0);

/// p_jk = (q_jk^2 / f_k) / sum_k' (q_jk'^2 / f_k'), f_k = sum_j q_jk.
Eigen::MatrixXd TargetDistribution(const Eigen::MatrixXd &q);

/// Mean per-row KL(P || Q), with 0 log 0 = 0. Throws Error when some
/// q_jk == 0 while p_jk > 0, or on a shape mismatch.
double ClusterLoss(const Eigen::MatrixXd &q, const Eigen::MatrixXd &p);

struct ClusterLossGrad {
  double loss = 0.0;
  Eigen::MatrixXd grad_points;     // n x d
  Eigen::MatrixXd grad_centroids;  // k x d
};

/// ClusterLoss(SoftAssign(points, centroids, alpha).q, target) and its
/// gradient with the target held fixed.
ClusterLossGrad ClusterLossAndGrad(const Eigen::MatrixXd &points,
                                   const Eigen::MatrixXd &centroids,
                                   const Eigen::MatrixXd &target,
                                   double alpha = 1.0);

inline double CombineStage3Loss(double instance_loss, double cluster_loss,
                                double eta) {
  return instance_loss + eta * cluster_loss;
}

/// "utterance_id,cluster_id" with a header row.
void WriteAssignmentsCsv(std::span<const std::string> ids,
                         std::span<const int> assignments, std::ostream &out);
/// Returns (ids, assignments) from a file written by WriteAssignmentsCsv.
std::pair<std::vector<std::string>, std::vector<int>> ReadAssignmentsCsv(
    std::istream &in);

/// "k,mean_silhouette" with a header row.
void WriteKSelectionCsv(const KSelectionResult &result, std::ostream &out);

}  // namespace intentforge
