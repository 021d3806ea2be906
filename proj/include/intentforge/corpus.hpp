// include/intentforge/corpus.hpp

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

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace intentforge {

enum class Speaker { kAgent, kCustomer };

const char *SpeakerName(Speaker speaker);

struct Utterance {
  std::string id;  // "<dialogue_id>:<turn_index>"
  std::string dialogue_id;
  std::size_t turn_index = 0;
  Speaker speaker = Speaker::kCustomer;
  std::string text;
  std::vector<std::string> dialogue_acts;
  std::vector<std::string> intents;

  bool operator==(const Utterance &) const = default;
};

struct Dialogue {
  std::string id;
  std::vector<Utterance> turns;  // turns[t].turn_index == t

  bool operator==(const Dialogue &) const = default;
};

struct Corpus {
  std::vector<Dialogue> dialogues;
  std::string source_path;
  // Turns with empty or whitespace-only text skipped while parsing.
  std::size_t dropped_turns = 0;

  std::size_t NumUtterances() const;
};

// Both members point into the Corpus they were built from, so the pair list
// must not outlive it.
struct UtterancePair {
  const Utterance *first = nullptr;
  const Utterance *second = nullptr;
};

/// Reads one JSON dialogue object per line:
///   {"dialogue_id": str, "turns": [{"speaker", "utterance",
///                                   "dialogue_acts", "intents"}]}
/// Blank lines are skipped and unknown keys ignored. Turns whose text is blank
/// after trimming are dropped and counted in `dropped_turns`; the remaining
/// turns are renumbered from 0. Throws ParseError citing the 1-based line for
/// malformed records and for duplicate dialogue ids.
Corpus ParseCorpus(std::istream &in, const std::string &source_path = "");
Corpus ReadCorpusFile(const std::string &path);

/// Inverse of ParseCorpus for corpora that parsed cleanly.
void WriteCorpus(const Corpus &corpus, std::ostream &out);

/// Utterances annotated with at least one intent, in corpus order.
std::vector<Utterance> SelectTask1Utterances(const Corpus &corpus);

/// Utterances whose dialogue acts include "InformIntent" (exact,
/// case-sensitive), in corpus order.
std::vector<Utterance> SelectTask2Utterances(const Corpus &corpus);

/// (u_t, u_{t+1}) for every adjacent pair inside each dialogue.
std::vector<UtterancePair> ConsecutivePairs(const Corpus &corpus);

/// First annotated intent, or "" when the utterance has none.
const std::string &PrimaryIntent(const Utterance &utterance);

}  // namespace intentforge
