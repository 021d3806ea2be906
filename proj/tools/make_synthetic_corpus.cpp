// tools/make_synthetic_corpus.cpp

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

// Writes the synthetic target, labeled and held-out corpora used by the
// tests and the README walkthrough.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "intentforge/error.hpp"
#include "intentforge/synthetic.hpp"

int main(int argc, char **argv) {
  intentforge::SyntheticOptions options;
  std::string out_dir = ".";
  CLI::App app{"Generate synthetic dialogue corpora"};
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", options.seed, "random seed");
  app.add_option("--intents", options.intents, "number of intents (2-5)");
  app.add_option("--target", options.target_per_intent, "target dialogues per intent");
  app.add_option("--labeled", options.labeled_per_intent, "labeled dialogues per intent");
  app.add_option("--heldout", options.heldout_per_intent, "held-out dialogues per intent");
  app.add_option("--keywords", options.keywords_per_turn, "intent keywords per topical turn");
  app.add_option("--filler", options.filler_per_turn, "filler words per topical turn");
  app.add_option("--followups", options.followup_turns, "topical turns after the intent turn");
  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out_dir);
    const auto corpora = intentforge::MakeSyntheticCorpora(options);
    const std::pair<const char *, const intentforge::Corpus *> files[] = {
        {"target.jsonl", &corpora.target},
        {"labeled.jsonl", &corpora.labeled},
        {"heldout.jsonl", &corpora.heldout}};
    for (const auto &[name, corpus] : files) {
      const auto path = std::filesystem::path(out_dir) / name;
      std::ofstream out(path, std::ios::binary);
      intentforge::WriteCorpus(*corpus, out);
      if (!out) throw intentforge::Error("cannot write '" + path.string() + "'");
    }
  } catch (const std::exception &e) {
    std::cerr << "make_synthetic_corpus: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
