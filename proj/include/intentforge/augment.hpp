// include/intentforge/augment.hpp

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

#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace intentforge {

enum class AugmentKind { kSubstitute, kDropout, kIdentity };

AugmentKind ParseAugmentKind(std::string_view name);
const char *AugmentKindName(AugmentKind kind);

struct AugmentConfig {
  AugmentKind kind = AugmentKind::kSubstitute;
  double rate = 0.15;
  std::vector<std::string> vocab;  // replacement tokens for kSubstitute

  /// Throws Error when rate is outside [0, 1] or substitute has no vocab.
  void Validate() const;
};

/// Token-level augmentation of a whitespace-tokenized text.
///
/// With n tokens and m = ceil(rate * n), substitute replaces m distinct,
/// uniformly chosen positions by uniform draws from `vocab`; dropout deletes
/// min(m, n - 1) positions so at least one token survives. The result is
/// re-joined with single spaces. When nothing is changed (identity, m = 0 or
/// an empty text) the input is returned unchanged.
std::string Augment(std::string_view text, const AugmentConfig &config,
                    std::mt19937_64 &rng);

/// Sorted distinct whitespace tokens of `texts`, the default substitution
/// vocabulary.
std::vector<std::string> BuildVocab(std::span<const std::string> texts);

}  // namespace intentforge
