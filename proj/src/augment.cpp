// src/augment.cpp

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

#include "intentforge/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "intentforge/error.hpp"
#include "intentforge/io_util.hpp"

namespace intentforge {

AugmentKind ParseAugmentKind(std::string_view name) {
  if (name == "substitute") return AugmentKind::kSubstitute;
  if (name == "dropout") return AugmentKind::kDropout;
  if (name == "identity") return AugmentKind::kIdentity;
  throw Error("unknown augment kind '" + std::string(name) +
              "' (expected substitute, dropout or identity)");
}

const char *AugmentKindName(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::kSubstitute: return "substitute";
    case AugmentKind::kDropout: return "dropout";
    case AugmentKind::kIdentity: return "identity";
  }
  return "identity";
}

void AugmentConfig::Validate() const {
  if (!(rate >= 0.0 && rate <= 1.0))
    throw Error("augment rate must lie in [0, 1]");
  if (kind == AugmentKind::kSubstitute && vocab.empty())
    throw Error("substitute augmentation requires a non-empty vocabulary");
}

std::string Augment(std::string_view text, const AugmentConfig &config,
                    std::mt19937_64 &rng) {
  config.Validate();
  if (config.kind == AugmentKind::kIdentity) return std::string(text);
  auto tokens = SplitWhitespace(text);
  const std::size_t n = tokens.size();
  std::size_t m = static_cast<std::size_t>(
      std::ceil(config.rate * static_cast<double>(n) - 1e-12));
  m = std::min(m, n);
  if (config.kind == AugmentKind::kDropout) m = std::min(m, n > 0 ? n - 1 : 0);
  if (m == 0) return std::string(text);

  // Partial Fisher-Yates: the first m entries become a uniform m-subset.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<std::string> out(tokens.begin(), tokens.end());
  std::vector<bool> chosen(n, false);
  for (std::size_t i = 0; i < m; ++i) chosen[order[i]] = true;

  if (config.kind == AugmentKind::kSubstitute) {
    std::uniform_int_distribution<std::size_t> word(0, config.vocab.size() - 1);
    for (std::size_t pos = 0; pos < n; ++pos)
      if (chosen[pos]) out[pos] = config.vocab[word(rng)];
  }

  std::string joined;
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (config.kind == AugmentKind::kDropout && chosen[pos]) continue;
    if (!joined.empty()) joined.push_back(' ');
    joined += out[pos];
  }
  return joined;
}

std::vector<std::string> BuildVocab(std::span<const std::string> texts) {
  std::set<std::string> vocab;
  for (const auto &t : texts)
    for (auto token : SplitWhitespace(t)) vocab.emplace(token);
  return {vocab.begin(), vocab.end()};
}

}  // namespace intentforge
