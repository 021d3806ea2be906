// include/intentforge/synthetic.hpp

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
#include <vector>

#include <Eigen/Dense>

#include "intentforge/corpus.hpp"

namespace intentforge {

// Generators for the test and demo fixtures. Not part of the library proper.

struct SyntheticOptions {
  std::size_t intents = 3;
  std::size_t target_per_intent = 100;   // dialogues in the target corpus
  std::size_t labeled_per_intent = 50;   // dialogues in the labeled corpus
  std::size_t heldout_per_intent = 30;
  std::size_t keywords_per_turn = 2;
  std::size_t filler_per_turn = 6;
  std::size_t followup_turns = 1;
  std::uint64_t seed = 42;
};

struct SyntheticCorpora {
  Corpus target;
  Corpus labeled;
  Corpus heldout;
};

/// Dialogues: a fixed agent opener, the customer's intent turn (intent-labeled,
/// act InformIntent), `followup_turns` unlabeled topical turns and a fixed
/// closing. Topical turns mix intent keywords with filler words shared by
/// every intent, so raw lexical features separate the intents only partially.
SyntheticCorpora MakeSyntheticCorpora(const SyntheticOptions &options);

/// Isotropic Gaussian blobs around well separated random centers. Rows are
/// ordered blob by blob; `labels` receives the blob of each row if given.
Eigen::MatrixXd MakeBlobs(std::size_t n, std::size_t dim, std::size_t blobs,
                          double spread, std::uint64_t seed,
                          std::vector<int> *labels = nullptr);

}  // namespace intentforge
