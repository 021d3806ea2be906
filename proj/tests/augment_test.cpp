// tests/augment_test.cpp

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

#include <random>

#include "doctest.h"
#include "intentforge/augment.hpp"
#include "intentforge/error.hpp"
#include "intentforge/io_util.hpp"

using namespace intentforge;

namespace {

std::vector<std::string> Tokens(const std::string &s) {
  std::vector<std::string> out;
  for (auto t : SplitWhitespace(s)) out.emplace_back(t);
  return out;
}

AugmentConfig Config(AugmentKind kind, double rate) {
  AugmentConfig cfg;
  cfg.kind = kind;
  cfg.rate = rate;
  cfg.vocab = {"X", "Y", "Z"};  // disjoint from the inputs below
  return cfg;
}

}  // namespace

TEST_CASE("zero rate and identity leave the text alone") {
  std::mt19937_64 rng(1);
  CHECK(Augment("a  b c", Config(AugmentKind::kSubstitute, 0.0), rng) == "a  b c");
  CHECK(Augment("a b c", Config(AugmentKind::kIdentity, 0.9), rng) == "a b c");
  CHECK(Augment("", Config(AugmentKind::kDropout, 0.5), rng) == "");
}

TEST_CASE("substitute at rate 0.5 changes exactly two of four tokens") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const auto out = Tokens(Augment("a b c d", Config(AugmentKind::kSubstitute, 0.5), rng));
    const std::vector<std::string> in = {"a", "b", "c", "d"};
    REQUIRE(out.size() == 4);
    int changed = 0;
    for (std::size_t i = 0; i < 4; ++i) changed += out[i] != in[i];
    CHECK(changed == 2);
  }
}

TEST_CASE("dropout removes min(ceil(rate n), n - 1) tokens") {
  std::mt19937_64 rng(3);
  const std::string text = "one two three four five six seven";
  for (double rate : {0.1, 0.15, 0.3, 0.5, 1.0}) {
    const auto n = 7.0;
    const auto m = std::min(std::ceil(rate * n - 1e-12), n - 1);
    CHECK(Tokens(Augment(text, Config(AugmentKind::kDropout, rate), rng)).size() ==
          static_cast<std::size_t>(n - m));
  }
  CHECK(Augment("solo", Config(AugmentKind::kDropout, 1.0), rng) == "solo");
}

TEST_CASE("substitute preserves the token count") {
  std::mt19937_64 rng(5);
  for (double rate : {0.1, 0.5, 1.0})
    CHECK(Tokens(Augment("p q r s t", Config(AugmentKind::kSubstitute, rate), rng)).size() == 5);
}

TEST_CASE("same seed, same output") {
  std::mt19937_64 a(9), b(9);
  const auto cfg = Config(AugmentKind::kSubstitute, 0.4);
  CHECK(Augment("the quick brown fox jumps", cfg, a) ==
        Augment("the quick brown fox jumps", cfg, b));
}

TEST_CASE("config validation and names") {
  CHECK_THROWS_AS(Config(AugmentKind::kDropout, 1.5).Validate(), Error);
  AugmentConfig no_vocab;
  CHECK_THROWS_AS(no_vocab.Validate(), Error);
  CHECK(ParseAugmentKind(AugmentKindName(AugmentKind::kDropout)) == AugmentKind::kDropout);
  CHECK_THROWS_AS(ParseAugmentKind("shuffle"), Error);
}

TEST_CASE("vocab is sorted and distinct") {
  const std::vector<std::string> texts = {"b a", "c b"};
  CHECK(BuildVocab(texts) == std::vector<std::string>{"a", "b", "c"});
}
