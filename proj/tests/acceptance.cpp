// tests/acceptance.cpp

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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "corpus_fixture.hpp"
#include "intentforge/cluster.hpp"
#include "intentforge/contrastive.hpp"
#include "intentforge/corpus.hpp"
#include "intentforge/metrics.hpp"
#include "intentforge/pipeline.hpp"
#include "intentforge/synthetic.hpp"
#include "intentforge/trainer.hpp"
#include "oracles.hpp"

using namespace intentforge;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
using Ints = std::vector<int>;
using Labels = std::vector<std::string>;

constexpr std::size_t kAllCoordinates = std::numeric_limits<std::size_t>::max();

// Collects the failures of one criterion.
class Check {
 public:
  void operator()(bool ok, const std::string &what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ = failed_ || !ok;
  }
  bool failed() const { return failed_; }
  std::string Summary() const {
    std::string s;
    for (const auto &f : failures_) s += (s.empty() ? "" : "; ") + f;
    return s;
  }

 private:
  bool failed_ = false;
  std::vector<std::string> failures_;
};

std::string Fmt(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

fs::path TempDir(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / ("intentforge_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string Slurp(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Eigen::MatrixXd Line(std::initializer_list<double> xs) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

Ints RandomLabels(std::size_t n, int k, std::mt19937_64 &rng) {
  std::uniform_int_distribution<int> d(0, k - 1);
  Ints v(n);
  for (auto &x : v) x = d(rng);
  return v;
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

AdjacencyMatrix RandomAdjacency(std::size_t m, std::mt19937_64 &rng) {
  AdjacencyMatrix a = PartnerAdjacency(m);
  std::bernoulli_distribution extra(0.2);
  for (std::size_t i = 0; i < 2 * m; ++i)
    for (std::size_t j = i + 1; j < 2 * m; ++j)
      if (extra(rng)) a.Link(i, j);
  return a;
}

const std::vector<std::string> kWords = {"alpha", "bravo", "charlie", "delta", "echo",
                                         "foxtrot", "golf", "hotel", "india", "juliet"};

std::vector<std::string> RandomTexts(std::size_t n, std::mt19937_64 &rng) {
  std::uniform_int_distribution<std::size_t> word(0, kWords.size() - 1), len(1, 5);
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < n; ++i) {
    std::string t;
    for (std::size_t w = len(rng); w > 0; --w) t += kWords[word(rng)] + " ";
    texts.push_back(t);
  }
  return texts;
}

EncoderParams Jittered(std::uint64_t seed, std::size_t embed) {
  auto p = InitParams(seed, 64, 6, embed);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.1);
  for (auto &b : p.Blocks())
    for (double &v : b.values) v += normal(rng);
  return p;
}

// Relative-error check of a function of a dense matrix.
double MatrixGradError(const std::function<double(const Eigen::MatrixXd &)> &f,
                       const Eigen::MatrixXd &at, const Eigen::MatrixXd &analytic,
                       std::uint64_t seed) {
  const auto rows = at.rows(), cols = at.cols();
  auto loss = [&](std::span<const double> flat) {
    return f(Eigen::Map<const Eigen::MatrixXd>(flat.data(), rows, cols));
  };
  std::vector<double> x(at.data(), at.data() + at.size());
  std::vector<double> g(analytic.data(), analytic.data() + analytic.size());
  return FiniteDiffCheck(loss, x, g, 1e-5, seed, kAllCoordinates);
}

void WriteCorpora(const SyntheticCorpora &corpora, const fs::path &dir) {
  for (const auto &[name, corpus] :
       {std::pair{"target.jsonl", &corpora.target}, std::pair{"labeled.jsonl", &corpora.labeled},
        std::pair{"heldout.jsonl", &corpora.heldout}}) {
    std::ofstream out(dir / name);
    WriteCorpus(*corpus, out);
  }
}

// The synthetic-fixture manifest shared by the ablation and determinism runs.
Settings FixtureManifest(const fs::path &dir) {
  return {{"corpus", (dir / "target.jsonl").string()},
          {"labeled", (dir / "labeled.jsonl").string()},
          {"heldout", (dir / "heldout.jsonl").string()},
          {"seed", "42"},
          {"k", "3"},
          {"augment.kind", "dropout"},
          {"stage3.tau", "0.5"}};
}

// ---------------------------------------------------------------------------

void HungarianCriterion(Check &check) {
  const auto start = Clock::now();
  std::mt19937_64 rng(2025);
  std::uniform_int_distribution<int> dim(1, 6), cell(0, 9);
  for (int trial = 0; trial < 200; ++trial) {
    const int r = dim(rng), c = dim(rng);
    std::vector<std::vector<std::int64_t>> t(r, std::vector<std::int64_t>(c));
    for (auto &row : t)
      for (auto &v : row) v = cell(rng);
    const auto a = HungarianAlign(TableFromCounts(t));
    const auto best = oracle::BruteForceMaxMass(t);
    check(a.matched_mass == best, "table " + std::to_string(trial) + ": mass " +
                                      std::to_string(a.matched_mass) + " vs " +
                                      std::to_string(best));
  }
  const double s = Seconds(start);
  check(s < 5.0, "took " + Fmt(s) + " s");
}

void MetricCriterion(Check &check) {
  auto near = [&](double got, double want, double tol, const std::string &what) {
    check(std::abs(got - want) <= tol, what + " = " + Fmt(got) + ", expected " + Fmt(want));
  };
  const auto t = Contingency(Ints{0, 0, 1, 2}, Labels{"a", "a", "b", "b"});
  near(Accuracy(t), 0.75, 1e-6, "acc");
  const auto prf = Prf(t);
  near(prf.precision, 1.0, 1e-6, "precision");
  near(prf.recall, 0.75, 1e-6, "recall");
  near(prf.f1, 0.8333, 1e-4, "f1");
  near(prf.f1, 5.0 / 6.0, 1e-6, "f1");
  const auto u = Contingency(Ints{0, 0, 1, 1}, Labels{"a", "a", "a", "b"});
  near(Nmi(u), 0.3437, 1e-4, "nmi");
  near(Nmi(u), oracle::Nmi(Ints{0, 0, 1, 1}, Labels{"a", "a", "a", "b"}), 1e-6, "nmi");
  near(Ari(u), 0.0, 1e-6, "ari");
  near(Nmi(Contingency(Ints{0, 0, 1, 1}, Ints{5, 5, 3, 3})), 1.0, 1e-6, "nmi perfect");
  near(Ari(Contingency(Ints{0, 0, 1, 1}, Ints{1, 1, 0, 0})), 1.0, 1e-6, "ari perfect");
  near(Ari(Contingency(Ints{0, 0, 1, 1}, Ints{0, 1, 0, 1})), -0.5, 1e-6, "ari crossed");
  near(Accuracy(Contingency(Ints{0, 0, 1, 1}, Labels{"b", "b", "a", "a"})), 1.0, 1e-6, "acc");

  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> len(2, 50);
  std::uniform_int_distribution<int> k(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = len(rng);
    const Ints p = RandomLabels(n, k(rng), rng), r = RandomLabels(n, k(rng), rng);
    const auto table = Contingency(p, r);
    near(Nmi(table), oracle::Nmi(p, r), 1e-9, "nmi trial " + std::to_string(trial));
    near(Ari(table), oracle::Ari(p, r), 1e-9, "ari trial " + std::to_string(trial));
  }
}

void LossCriterion(Check &check) {
  for (std::size_t m : {2, 4, 8}) {
    const Eigen::MatrixXd rows = Eigen::MatrixXd::Ones(2 * m, 3).rowwise().normalized();
    const auto report = ContrastiveLoss(rows, PartnerAdjacency(m), 1.0);
    for (double l : report.per_instance)
      check(std::abs(l - std::log(2.0 * m - 1)) < 1e-9,
            "M=" + std::to_string(m) + ": l_i = " + Fmt(l));
  }
  Eigen::MatrixXd orth(4, 2);
  orth << 1, 0, 1, 0, 0, 1, 0, 1;
  const double expected = std::log(1 + 2 / std::exp(1.0));
  const double got = ContrastiveLoss(orth, PartnerAdjacency(2), 1.0).total;
  check(std::abs(got - expected) < 1e-6, "orthogonal pairs " + Fmt(got));

  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 2 + trial % 5;
    const Eigen::MatrixXd rows = oracle::RandomUnitRows(2 * m, 3 + trial % 6, rng);
    const auto a = RandomAdjacency(m, rng);
    std::vector<std::vector<int>> bits(2 * m, std::vector<int>(2 * m));
    for (std::size_t i = 0; i < 2 * m; ++i)
      for (std::size_t j = 0; j < 2 * m; ++j) bits[i][j] = a(i, j);
    const double tau = 0.1 + 0.05 * (trial % 10);
    const double mine = ContrastiveLoss(rows, a, tau).total;
    const double ref = oracle::Mean(oracle::ContrastiveTerms(rows, bits, tau));
    check(std::abs(mine - ref) < 1e-9, "batch " + std::to_string(trial) + ": " + Fmt(mine) +
                                           " vs " + Fmt(ref));
  }
}

void GradientCriterion(Check &check) {
  const auto start = Clock::now();
  constexpr double kTol = 1e-4;
  std::mt19937_64 rng(404);
  double worst[4] = {0, 0, 0, 0};

  for (int trial = 0; trial < 50; ++trial) {
    // Stage-2 loss through the encoder head.
    const auto params = Jittered(1000 + trial, 8);
    const std::size_t m = trial % 2 ? 3 : 2;
    const auto texts = RandomTexts(2 * m, rng);
    const auto a = RandomAdjacency(m, rng);
    const auto lg = NeighborBatchLoss(params, texts, a, 0.5);
    auto stage2 = [&](std::span<const double> flat) {
      EncoderParams q = params;
      Unflatten(flat, q);
      return NeighborBatchLoss(q, texts, a, 0.5).loss;
    };
    worst[0] = std::max(worst[0], FiniteDiffCheck(stage2, Flatten(params), Flatten(lg.grad),
                                                   1e-5, trial, kAllCoordinates));

    // Stage-3 instance contrastive loss on the embeddings.
    const Eigen::MatrixXd rows = oracle::RandomUnitRows(2 * m, 5, rng);
    const auto inst = InstanceClLossAndGrad(rows, 0.5);
    worst[1] = std::max(worst[1], MatrixGradError(
                                      [](const Eigen::MatrixXd &x) {
                                        return InstanceClLoss(x, 0.5).total;
                                      },
                                      rows, inst.grad, trial));

    // Cluster KL through Q, w.r.t. points and centroids.
    const int n = 5, k = 3, d = 4;
    Eigen::MatrixXd pts = oracle::RandomUnitRows(n, d, rng);
    Eigen::MatrixXd mu = oracle::RandomUnitRows(k, d, rng);
    const double alpha = trial % 2 ? 1.0 : 2.5;
    const Eigen::MatrixXd target = TargetDistribution(RandomStochastic(n, k, rng));
    const auto kl = ClusterLossAndGrad(pts, mu, target, alpha);
    worst[2] = std::max(worst[2], MatrixGradError(
                                      [&](const Eigen::MatrixXd &x) {
                                        return ClusterLoss(SoftAssign(x, mu, alpha).q, target);
                                      },
                                      pts, kl.grad_points, trial));
    worst[2] = std::max(worst[2], MatrixGradError(
                                      [&](const Eigen::MatrixXd &x) {
                                        return ClusterLoss(SoftAssign(pts, x, alpha).q, target);
                                      },
                                      mu, kl.grad_centroids, trial));

    // Full stage-3 objective, head and centroids.
    JointParams joint{Jittered(2000 + trial, 4), oracle::RandomUnitRows(3, 4, rng)};
    const auto views = RandomTexts(6, rng);
    const auto originals = RandomTexts(3, rng);
    const Eigen::MatrixXd p = TargetDistribution(
        SoftAssign(Embed(joint.encoder, originals).values, joint.centroids).q);
    const auto jg = JointBatchLoss(joint, views, originals, p, 0.5, 10.0, 1.0);
    auto full = [&](std::span<const double> flat) {
      JointParams q = joint;
      Unflatten(flat, q);
      return JointBatchLoss(q, views, originals, p, 0.5, 10.0, 1.0).loss;
    };
    worst[3] = std::max(worst[3], FiniteDiffCheck(full, Flatten(joint), Flatten(jg.grad), 1e-5,
                                                   trial, kAllCoordinates));
  }
  const char *names[4] = {"stage-2 loss", "instance CL", "cluster KL", "stage-3 objective"};
  for (int i = 0; i < 4; ++i)
    check(worst[i] < kTol, std::string(names[i]) + " max rel error " + Fmt(worst[i]));
  const double s = Seconds(start);
  check(s < 30.0, "took " + Fmt(s) + " s");
}

void KMeansCriterion(Check &check) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pts = oracle::RandomUnitRows(80, 4, rng);
    const std::size_t k = 2 + trial % 6;
    const auto a = KMeans(pts, k, 42 + trial, 3);
    const auto b = KMeans(pts, k, 42 + trial, 3);
    check(a.assignments == b.assignments && a.centroids == b.centroids,
          "run " + std::to_string(trial) + " not deterministic");
    for (std::size_t i = 1; i < a.inertia_history.size(); ++i)
      check(a.inertia_history[i] <= a.inertia_history[i - 1],
            "run " + std::to_string(trial) + ": inertia rose at iteration " + std::to_string(i));
  }
  const double inertia = KMeans(Line({0, 1, 9, 10}), 2, 42).inertia;
  check(inertia == 1.0, "{0,1,9,10} inertia " + Fmt(inertia));
}

void SilhouetteCriterion(Check &check) {
  const double s = Silhouette(Line({0, 1, 9, 10}), Ints{0, 0, 1, 1});
  check(std::abs(s - 0.8947) <= 1e-3, "{0,1,9,10} silhouette " + Fmt(s));
  const auto r = SelectK(MakeBlobs(300, 16, 3, 1.0, 42), 2, 10, 42);
  check(r.chosen_k == 3, "3-blob fixture selected k=" + std::to_string(r.chosen_k));
}

void AblationCriterion(Check &check) {
  const auto start = Clock::now();
  const auto dir = TempDir("ablation");
  WriteCorpora(MakeSyntheticCorpora({}), dir);
  auto settings = FixtureManifest(dir);
  settings["out"] = (dir / "out").string();
  const auto rows = RunAblation(PipelineConfig::FromSettings(settings));
  check(rows.size() == 4, "expected 4 variants");
  if (rows.size() != 4) return;
  std::string line;
  for (const auto &row : rows)
    line += row.variant + " acc=" + Fmt(row.result.report->acc) +
            " sil=" + Fmt(row.result.silhouette) + "  ";
  std::cout << "  ablation: " << line << '\n';
  for (std::size_t i = 1; i < rows.size(); ++i)
    check(rows[i].result.report->acc >= rows[i - 1].result.report->acc,
          rows[i].variant + " ACC dropped below " + rows[i - 1].variant);
  check(rows[3].result.report->acc >= 0.95, "final ACC " + Fmt(rows[3].result.report->acc));
  check(rows[3].result.silhouette > rows[2].result.silhouette,
        "stage-3 silhouette " + Fmt(rows[3].result.silhouette) + " <= stage-2 " +
            Fmt(rows[2].result.silhouette));
  const double s = Seconds(start);
  check(s < 300.0, "took " + Fmt(s) + " s");
}

void SccHeadCriterion(Check &check) {
  std::mt19937_64 rng(100);
  auto entropy = [](const Eigen::RowVectorXd &p) {
    double h = 0;
    for (double v : p)
      if (v > 0) h -= v * std::log(v);
    return h;
  };
  std::size_t rows = 0, raised = 0;
  std::string example;
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = RandomStochastic(10, 2 + trial % 6, rng);
    const auto p = TargetDistribution(q);
    for (Eigen::Index j = 0; j < q.rows(); ++j) {
      check(std::abs(p.row(j).sum() - 1) <= 1e-9, "P row sum " + Fmt(p.row(j).sum()));
      ++rows;
      if (entropy(p.row(j)) > entropy(q.row(j)) + 1e-12) {
        if (raised++ == 0)
          example = "trial " + std::to_string(trial) + " row " + std::to_string(j) + ": H(Q)=" +
                    Fmt(entropy(q.row(j))) + " H(P)=" + Fmt(entropy(p.row(j)));
      }
    }
    const double kl = ClusterLoss(q, p);
    check(kl >= 0.0, "KL(P||Q) = " + Fmt(kl));
    check(ClusterLoss(q, q) == 0.0, "KL(Q||Q) = " + Fmt(ClusterLoss(q, q)));
  }
  check(raised == 0, "entropy(P_j) > entropy(Q_j) on " + std::to_string(raised) + " of " +
                         std::to_string(rows) + " rows, first at " + example);
}

void DeterminismCriterion(Check &check) {
  const auto dir = TempDir("determinism");
  WriteCorpora(MakeSyntheticCorpora({}), dir);
  {
    std::ofstream manifest(dir / "manifest.txt");
    WriteSettings(FixtureManifest(dir), manifest);
  }
  std::string outputs[2][2];
  for (int run = 0; run < 2; ++run) {
    const fs::path out = dir / ("run" + std::to_string(run));
    const std::string cmd = std::string(INTENTFORGE_CLI) + " pipeline --config " +
                            (dir / "manifest.txt").string() + " --out " + out.string() +
                            " >/dev/null 2>" + (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    check(status == 0, "run " + std::to_string(run) + " failed: " + Slurp(dir / "stderr.txt"));
    outputs[run][0] = Slurp(out / "metrics.json");
    outputs[run][1] = Slurp(out / "assignments.csv");
  }
  check(!outputs[0][0].empty() && outputs[0][0] == outputs[1][0], "metrics.json differs");
  check(!outputs[0][1].empty() && outputs[0][1] == outputs[1][1], "assignments.csv differs");
}

void CorpusCriterion(Check &check) {
  std::istringstream in(kTenDialogues);
  const auto corpus = ParseCorpus(in);
  auto ids = [](const std::vector<Utterance> &us) {
    std::set<std::string> s;
    for (const auto &u : us) s.insert(u.id);
    return s;
  };
  check(ids(SelectTask1Utterances(corpus)) == kTenDialoguesTask1, "task 1 id set");
  check(ids(SelectTask2Utterances(corpus)) == kTenDialoguesTask2, "task 2 id set");
  std::size_t expected = 0;
  for (const auto &d : corpus.dialogues) expected += d.turns.size() - 1;
  const auto pairs = ConsecutivePairs(corpus).size();
  check(pairs == expected && pairs == kTenDialoguesPairs,
        "pairs " + std::to_string(pairs) + ", sum(T_d - 1) = " + std::to_string(expected));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, void (*)(Check &)>> criteria = {
      {"hungarian alignment vs brute force", HungarianCriterion},
      {"metric oracles", MetricCriterion},
      {"contrastive loss values", LossCriterion},
      {"gradient checks", GradientCriterion},
      {"k-means", KMeansCriterion},
      {"silhouette and k selection", SilhouetteCriterion},
      {"staged ablation", AblationCriterion},
      {"soft clustering head", SccHeadCriterion},
      {"pipeline determinism", DeterminismCriterion},
      {"corpus filters", CorpusCriterion},
  };
  int failed = 0;
  for (const auto &[name, run] : criteria) {
    Check check;
    const auto start = Clock::now();
    try {
      run(check);
    } catch (const std::exception &e) {
      check(false, std::string("exception: ") + e.what());
    }
    const double s = Seconds(start);
    if (check.failed()) {
      ++failed;
      std::cout << "FAIL " << name << " (" << Fmt(s) << " s): " << check.Summary() << '\n';
    } else {
      std::cout << "PASS " << name << " (" << Fmt(s) << " s)\n";
    }
    std::cout.flush();
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
