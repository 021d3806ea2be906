// src/synthetic.cpp

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

#include "intentforge/synthetic.hpp"

#include <array>
#include <random>
#include <string>

#include "intentforge/error.hpp"

namespace intentforge {

namespace {

struct IntentVocab {
  const char *name;
  std::array<const char *, 10> keywords;
};

const IntentVocab kIntents[] = {
    {"BookFlight",
     {"flight", "airline", "boarding", "depart", "airport", "ticket", "seat",
      "layover", "runway", "passport"}},
    {"CheckBalance",
     {"balance", "account", "deposit", "savings", "statement", "checking",
      "withdrawal", "overdraft", "bank", "funds"}},
    {"OrderPizza",
     {"pizza", "pepperoni", "crust", "cheese", "delivery", "topping",
      "mushroom", "slice", "oven", "marinara"}},
    {"ResetPassword",
     {"password", "login", "reset", "locked", "username", "credentials",
      "verification", "email", "security", "recover"}},
    {"ReportOutage",
     {"outage", "power", "electricity", "blackout", "grid", "meter",
      "technician", "transformer", "restore", "lines"}},
};

const char *kFiller[] = {
    "hi",    "hello", "please", "thanks", "i",     "need",  "want",  "to",
    "the",   "a",     "my",    "can",    "you",   "help",  "with",  "today",
    "could", "would", "like",  "just",   "okay",  "so",    "um",    "well",
    "maybe", "right", "now",   "really", "quick", "thing", "some",  "know",
    "sure",  "yes",   "again", "then",   "about", "this",  "that",  "soon"};

// One fixed opener: varied openers drawn independently of the intent give
// consecutive-turn training a random pairing it can memorize instead.
const char *kAgentPrompt = "thanks for calling how can i help you today";
const char *kClosing = "great thank you goodbye";

class Generator {
 public:
  Generator(const SyntheticOptions &options) : options_(options), rng_(options.seed) {}

  Corpus Make(const std::string &prefix, std::size_t per_intent) {
    Corpus corpus;
    std::size_t serial = 0;
    // Interleave intents so that corpus order carries no label signal.
    for (std::size_t i = 0; i < per_intent; ++i) {
      for (std::size_t intent = 0; intent < options_.intents; ++intent) {
        Dialogue d;
        d.id = prefix + "-" + std::to_string(serial++);
        Add(d, Speaker::kAgent, kAgentPrompt, {}, {"Prompt"});
        Add(d, Speaker::kCustomer, Topical(intent), {kIntents[intent].name},
            {"InformIntent"});
        for (std::size_t t = 0; t < options_.followup_turns; ++t)
          Add(d, t % 2 ? Speaker::kCustomer : Speaker::kAgent, Topical(intent), {},
              {"Inform"});
        Add(d, Speaker::kCustomer, kClosing, {}, {"Thank"});
        corpus.dialogues.push_back(std::move(d));
      }
    }
    return corpus;
  }

 private:
  template <std::size_t N>
  const char *Pick(const char *const (&pool)[N]) {
    return pool[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng_)];
  }

  std::string Topical(std::size_t intent) {
    const auto &keywords = kIntents[intent].keywords;
    const std::size_t total = options_.keywords_per_turn + options_.filler_per_turn;
    std::vector<std::string> words;
    for (std::size_t i = 0; i < options_.keywords_per_turn; ++i)
      words.push_back(keywords[std::uniform_int_distribution<std::size_t>(
          0, keywords.size() - 1)(rng_)]);
    for (std::size_t i = 0; i < options_.filler_per_turn; ++i) words.push_back(Pick(kFiller));
    std::shuffle(words.begin(), words.end(), rng_);
    std::string text;
    for (std::size_t i = 0; i < total; ++i) {
      if (i) text += ' ';
      text += words[i];
    }
    return text;
  }

  void Add(Dialogue &d, Speaker speaker, std::string text,
           std::vector<std::string> intents, std::vector<std::string> acts) {
    Utterance u;
    u.turn_index = d.turns.size();
    u.dialogue_id = d.id;
    u.id = d.id + ":" + std::to_string(u.turn_index);
    u.speaker = speaker;
    u.text = std::move(text);
    u.intents = std::move(intents);
    u.dialogue_acts = std::move(acts);
    d.turns.push_back(std::move(u));
  }

  SyntheticOptions options_;
  std::mt19937_64 rng_;
};

}  // namespace

SyntheticCorpora MakeSyntheticCorpora(const SyntheticOptions &options) {
  if (options.intents < 2 || options.intents > std::size(kIntents))
    throw Error("synthetic: intents must be in [2, " +
                std::to_string(std::size(kIntents)) + "]");
  Generator gen(options);
  SyntheticCorpora out;
  out.target = gen.Make("target", options.target_per_intent);
  out.labeled = gen.Make("labeled", options.labeled_per_intent);
  out.heldout = gen.Make("heldout", options.heldout_per_intent);
  return out;
}

Eigen::MatrixXd MakeBlobs(std::size_t n, std::size_t dim, std::size_t blobs,
                          double spread, std::uint64_t seed,
                          std::vector<int> *labels) {
  if (blobs == 0 || n < blobs) throw Error("blobs: need n >= blobs >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-10.0, 10.0);
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(blobs), static_cast<Eigen::Index>(dim));
  for (Eigen::Index r = 0; r < centers.rows(); ++r)
    for (Eigen::Index c = 0; c < centers.cols(); ++c) centers(r, c) = uniform(rng);
  Eigen::MatrixXd points(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  if (labels) labels->clear();
  for (std::size_t i = 0; i < n; ++i) {
    const auto blob = static_cast<Eigen::Index>(i * blobs / n);
    for (Eigen::Index c = 0; c < points.cols(); ++c)
      points(static_cast<Eigen::Index>(i), c) = centers(blob, c) + spread * normal(rng);
    if (labels) labels->push_back(static_cast<int>(blob));
  }
  return points;
}

}  // namespace intentforge
