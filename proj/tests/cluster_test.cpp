// tests/cluster_test.cpp

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

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "intentforge/cluster.hpp"
#include "intentforge/error.hpp"
#include "intentforge/synthetic.hpp"
#include "oracles.hpp"

using namespace intentforge;

namespace {

Eigen::MatrixXd Line(std::initializer_list<double> xs) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

Eigen::MatrixXd RandomStochastic(int n, int k, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Eigen::MatrixXd q(n, k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) q(i, j) = u(rng);
    q.row(i) /= q.row(i).sum();
  }
  return q;
}

double Entropy(const Eigen::RowVectorXd &p) {
  double h = 0;
  for (double v : p)
    if (v > 0) h -= v * std::log(v);
  return h;
}

}  // namespace

TEST_CASE("k-means worked examples") {
  const auto exact = KMeans(Line({0, 10}), 2, 42);
  CHECK(exact.inertia == 0.0);

  const auto model = KMeans(Line({0, 1, 9, 10}), 2, 42);
  CHECK(model.inertia == 1.0);
  std::vector<double> centers = {model.centroids(0, 0), model.centroids(1, 0)};
  std::sort(centers.begin(), centers.end());
  CHECK(centers == std::vector<double>{0.5, 9.5});
  CHECK(model.assignments[0] == model.assignments[1]);
  CHECK(model.assignments[2] == model.assignments[3]);
  CHECK(model.assignments[0] != model.assignments[2]);

  CHECK(KMeans(Line({3, 1, 4, 1.5, 9}), 5, 1).inertia == 0.0);
}

TEST_CASE("{0,1,9,10} optimum agrees with exhaustive partition search") {
  const auto pts = Line({0, 1, 9, 10});
  double best = 1e300;
  for (int mask = 1; mask < 15; ++mask) {
    std::vector<int> a(4);
    for (int i = 0; i < 4; ++i) a[i] = (mask >> i) & 1;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 1);
    Eigen::Vector2d n = Eigen::Vector2d::Zero();
    for (int i = 0; i < 4; ++i) {
      c(a[i], 0) += pts(i, 0);
      n[a[i]] += 1;
    }
    c(0, 0) /= n[0];
    c(1, 0) /= n[1];
    best = std::min(best, Inertia(pts, c, a));
  }
  CHECK(best == 1.0);
}

TEST_CASE("inertia never increases and runs are deterministic") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = oracle::RandomUnitRows(60, 4, rng);
    const std::size_t k = 2 + trial % 5;
    const auto a = KMeans(pts, k, 42 + trial, 3);
    const auto b = KMeans(pts, k, 42 + trial, 3);
    CHECK(a.assignments == b.assignments);
    CHECK(a.centroids == b.centroids);
    REQUIRE_FALSE(a.inertia_history.empty());
    for (std::size_t i = 1; i < a.inertia_history.size(); ++i)
      CHECK(a.inertia_history[i] <= a.inertia_history[i - 1] + 1e-12);
    CHECK(a.inertia == doctest::Approx(Inertia(pts, a.centroids, a.assignments)));
  }
}

TEST_CASE("k-means with duplicate points keeps k clusters") {
  const auto pts = Line({1, 1, 1, 1, 5});
  const auto model = KMeans(pts, 2, 0);
  CHECK(model.inertia == 0.0);
}

TEST_CASE("k-means argument checks") {
  CHECK_THROWS_AS(KMeans(Line({1, 2}), 0, 1), Error);
  CHECK_THROWS_AS(KMeans(Line({1, 2}), 3, 1), Error);
  CHECK_THROWS_AS(KMeans(Line({1, 2}), 1, 1, 0), Error);
}

TEST_CASE("silhouette worked examples") {
  const std::vector<int> a = {0, 0, 1, 1};
  // a = 1 everywhere; b = 9.5 at the ends and 8.5 for the inner points.
  const double hand = (8.5 / 9.5 + 7.5 / 8.5) / 2;
  CHECK(Silhouette(Line({0, 1, 9, 10}), a) == doctest::Approx(hand).epsilon(1e-12));
  CHECK(Silhouette(Line({0, 1, 9, 10}), a) == doctest::Approx(0.8885).epsilon(1e-4));
  CHECK(oracle::Silhouette(Line({0, 1, 9, 10}), a) == doctest::Approx(hand).epsilon(1e-12));
  CHECK(Silhouette(Line({0, 0, 50, 50}), a) == 1.0);
  const std::vector<int> labels = {7, 7, -3};
  CHECK(SilhouetteSamples(Line({0, 1, 5}), labels)[2] == 0.0);
  const std::vector<int> one = {0, 0};
  CHECK_THROWS_AS(Silhouette(Line({0, 1}), one), Error);
}

TEST_CASE("silhouette matches the definitional oracle") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> label(0, 3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pts = oracle::RandomUnitRows(25, 3, rng);
    std::vector<int> a(25);
    for (auto &x : a) x = label(rng);
    a[0] = 0;
    a[1] = 1;
    CHECK(std::abs(Silhouette(pts, a) - oracle::Silhouette(pts, a)) < 1e-12);
  }
}

TEST_CASE("random split of one blob scores near zero") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd pts(200, 2);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts(i) = normal(rng);
  std::vector<int> a(200);
  std::bernoulli_distribution coin(0.5);
  for (auto &x : a) x = coin(rng);
  CHECK(std::abs(Silhouette(pts, a)) < 0.15);
}

TEST_CASE("select k") {
  SUBCASE("two 1-D blobs") {
    const auto r = SelectK(Line({0, 0.2, 0.4, 0.1, 20, 20.3, 20.1, 19.8}), 2, 4, 42);
    CHECK(r.chosen_k == 2);
    CHECK(r.scores.size() == 3);
  }
  SUBCASE("three 16-D blobs") {
    const auto pts = MakeBlobs(300, 16, 3, 1.0, 42);
    const auto r = SelectK(pts, 2, 10, 42);
    CHECK(r.chosen_k == 3);
    for (std::size_t k = 2; k <= 10; ++k) CHECK(r.scores.count(k) == 1);
  }
  SUBCASE("single k") {
    CHECK(SelectK(Line({0, 1, 2, 3}), 2, 2, 1).chosen_k == 2);
  }
  CHECK_THROWS_AS(SelectK(Line({0, 1, 2}), 1, 2, 1), Error);
  CHECK_THROWS_AS(SelectK(Line({0, 1, 2}), 2, 3, 1), Error);
}

TEST_CASE("soft assignment") {
  Eigen::MatrixXd centroids(2, 1);
  centroids << 0, 1;
  const auto q = SoftAssign(Line({0}), centroids).q;
  CHECK(q(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(q(0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(SoftAssign(Line({0.5}), centroids).q(0, 0) == doctest::Approx(0.5));
  Eigen::MatrixXd far(2, 1);
  far << 0, 1e6;
  CHECK(SoftAssign(Line({0}), far).q(0, 0) > 1 - 1e-9);
}

TEST_CASE("target distribution") {
  Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(2, 2, 0.5);
  CHECK(TargetDistribution(uniform).isApprox(uniform));
  Eigen::MatrixXd q(2, 2);
  q << 0.9, 0.1, 0.5, 0.5;
  const auto p = TargetDistribution(q);
  const double a = 0.81 / 1.4, b = 0.01 / 0.6;
  CHECK(p(0, 0) == doctest::Approx(a / (a + b)));
  CHECK(p(0, 0) == doctest::Approx(0.972).epsilon(1e-3));
  CHECK(p(0, 1) == doctest::Approx(0.028).epsilon(0.02));
}

TEST_CASE("sharpening and KL properties on random Q") {
  std::mt19937_64 rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = RandomStochastic(8, 2 + trial % 5, rng);
    const auto p = TargetDistribution(q);
    for (Eigen::Index j = 0; j < q.rows(); ++j) CHECK(std::abs(p.row(j).sum() - 1) < 1e-9);
    CHECK(ClusterLoss(q, p) >= 0.0);
    CHECK(ClusterLoss(q, q) == doctest::Approx(0.0));
  }
}

TEST_CASE("sharpening lowers row entropy when cluster frequencies are equal") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + trial % 5;
    const auto base = RandomStochastic(3, k, rng);
    // Every cyclic shift of every row gives equal column sums.
    Eigen::MatrixXd q(3 * k, k);
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < k; ++s)
        for (int c = 0; c < k; ++c) q(r * k + s, (c + s) % k) = base(r, c);
    const auto p = TargetDistribution(q);
    for (Eigen::Index j = 0; j < q.rows(); ++j)
      CHECK(Entropy(p.row(j)) <= Entropy(q.row(j)) + 1e-12);
  }
}

TEST_CASE("frequency normalization can raise a row's entropy") {
  Eigen::MatrixXd q(3, 2);
  q << 0.7, 0.3, 0.9, 0.1, 0.9, 0.1;
  const auto p = TargetDistribution(q);
  CHECK(p(0, 0) == doctest::Approx(0.49 / 2.5 / (0.49 / 2.5 + 0.09 / 0.5)));
  CHECK(Entropy(p.row(0)) > Entropy(q.row(0)));
}

TEST_CASE("cluster loss values") {
  Eigen::MatrixXd p(1, 2), q(1, 2);
  p << 1, 0;
  q << 0.5, 0.5;
  CHECK(ClusterLoss(q, p) == doctest::Approx(std::log(2.0)));
  Eigen::MatrixXd zero(1, 2);
  zero << 1, 0;
  Eigen::MatrixXd target(1, 2);
  target << 0.5, 0.5;
  CHECK_THROWS_AS(ClusterLoss(zero, target), Error);
}

TEST_CASE("cluster loss gradient matches central differences") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5, k = 3, d = 4;
    Eigen::MatrixXd pts(n, d), mu(k, d);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts(i) = normal(rng);
    for (Eigen::Index i = 0; i < mu.size(); ++i) mu(i) = normal(rng);
    const double alpha = trial % 2 ? 1.0 : 2.5;
    const auto target = TargetDistribution(RandomStochastic(n, k, rng));
    const auto g = ClusterLossAndGrad(pts, mu, target, alpha);
    CHECK(g.loss == doctest::Approx(ClusterLoss(SoftAssign(pts, mu, alpha).q, target)));
    const auto num_pts = oracle::NumericGradient(
        [&](const Eigen::VectorXd &x) {
          return ClusterLoss(SoftAssign(x.reshaped(n, d), mu, alpha).q, target);
        },
        pts.reshaped());
    const auto num_mu = oracle::NumericGradient(
        [&](const Eigen::VectorXd &x) {
          return ClusterLoss(SoftAssign(pts, x.reshaped(k, d), alpha).q, target);
        },
        mu.reshaped());
    CHECK((g.grad_points.reshaped() - num_pts).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((g.grad_centroids.reshaped() - num_mu).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("combined objective") {
  CHECK(CombineStage3Loss(0.5, 0.2, 10) == doctest::Approx(2.5));
  CHECK(CombineStage3Loss(0.5, 0.2, 0) == 0.5);
  CHECK(CombineStage3Loss(0.5, 0.0, 10) == 0.5);
}

TEST_CASE("assignment and k-selection files") {
  const std::vector<std::string> ids = {"d:1", "d:2"};
  const std::vector<int> a = {1, 0};
  std::stringstream io;
  WriteAssignmentsCsv(ids, a, io);
  CHECK(io.str() == "utterance_id,cluster_id\nd:1,1\nd:2,0\n");
  const auto [back_ids, back] = ReadAssignmentsCsv(io);
  CHECK(back_ids == ids);
  CHECK(back == a);

  std::istringstream bad("utterance_id,cluster_id\nx,notanumber\n");
  CHECK_THROWS_AS(ReadAssignmentsCsv(bad), Error);

  KSelectionResult r;
  r.chosen_k = 2;
  r.scores = {{2, 0.5}, {3, 0.25}};
  std::ostringstream out;
  WriteKSelectionCsv(r, out);
  CHECK(out.str() == "k,mean_silhouette\n2,0.5\n3,0.25\n");
}
