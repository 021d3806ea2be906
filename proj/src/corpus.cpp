// src/corpus.cpp

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

#include "intentforge/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_set>

#include "intentforge/error.hpp"
#include "json.hpp"

namespace intentforge {

namespace {

using nlohmann::json;

bool IsBlank(const std::string &text) {
  return std::all_of(text.begin(), text.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

Speaker ParseSpeaker(const std::string &name, std::size_t line) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "agent") return Speaker::kAgent;
  if (lower == "customer" || lower == "user") return Speaker::kCustomer;
  throw ParseError("unknown speaker '" + name + "'", line);
}

std::vector<std::string> StringList(const json &turn, const char *key,
                                    std::size_t line) {
  std::vector<std::string> out;
  auto it = turn.find(key);
  if (it == turn.end() || it->is_null()) return out;
  if (!it->is_array())
    throw ParseError(std::string("'") + key + "' must be a list of strings",
                     line);
  for (const auto &v : *it) {
    if (!v.is_string())
      throw ParseError(std::string("'") + key + "' must be a list of strings",
                       line);
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

const char *SpeakerName(Speaker speaker) {
  return speaker == Speaker::kAgent ? "Agent" : "Customer";
}

std::size_t Corpus::NumUtterances() const {
  std::size_t n = 0;
  for (const auto &d : dialogues) n += d.turns.size();
  return n;
}

Corpus ParseCorpus(std::istream &in, const std::string &source_path) {
  Corpus corpus;
  corpus.source_path = source_path;
  std::unordered_set<std::string> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (IsBlank(raw)) continue;
    json record;
    try {
      record = json::parse(raw);
    } catch (const json::parse_error &e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!record.is_object())
      throw ParseError("record is not an object", line_no);
    auto id_it = record.find("dialogue_id");
    if (id_it == record.end() || !id_it->is_string())
      throw ParseError("missing string 'dialogue_id'", line_no);
    auto turns_it = record.find("turns");
    if (turns_it == record.end() || !turns_it->is_array())
      throw ParseError("missing list 'turns'", line_no);

    Dialogue dialogue;
    dialogue.id = id_it->get<std::string>();
    if (!seen.insert(dialogue.id).second)
      throw ParseError("duplicate dialogue_id '" + dialogue.id + "'", line_no);

    for (const auto &turn : *turns_it) {
      if (!turn.is_object()) throw ParseError("turn is not an object", line_no);
      auto text_it = turn.find("utterance");
      if (text_it == turn.end() || !text_it->is_string())
        throw ParseError("turn without string 'utterance'", line_no);
      Utterance u;
      u.text = text_it->get<std::string>();
      if (IsBlank(u.text)) {
        ++corpus.dropped_turns;
        continue;
      }
      auto speaker_it = turn.find("speaker");
      if (speaker_it != turn.end()) {
        if (!speaker_it->is_string())
          throw ParseError("'speaker' must be a string", line_no);
        u.speaker = ParseSpeaker(speaker_it->get<std::string>(), line_no);
      }
      u.dialogue_acts = StringList(turn, "dialogue_acts", line_no);
      u.intents = StringList(turn, "intents", line_no);
      u.dialogue_id = dialogue.id;
      u.turn_index = dialogue.turns.size();
      u.id = dialogue.id + ":" + std::to_string(u.turn_index);
      dialogue.turns.push_back(std::move(u));
    }
    corpus.dialogues.push_back(std::move(dialogue));
  }
  return corpus;
}

Corpus ReadCorpusFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  return ParseCorpus(in, path);
}

void WriteCorpus(const Corpus &corpus, std::ostream &out) {
  for (const auto &d : corpus.dialogues) {
    json turns = json::array();
    for (const auto &u : d.turns) {
      turns.push_back({{"speaker", SpeakerName(u.speaker)},
                       {"utterance", u.text},
                       {"dialogue_acts", u.dialogue_acts},
                       {"intents", u.intents}});
    }
    json record = {{"dialogue_id", d.id}, {"turns", std::move(turns)}};
    out << record.dump() << '\n';
  }
}

std::vector<Utterance> SelectTask1Utterances(const Corpus &corpus) {
  std::vector<Utterance> out;
  for (const auto &d : corpus.dialogues)
    for (const auto &u : d.turns)
      if (!u.intents.empty()) out.push_back(u);
  return out;
}

std::vector<Utterance> SelectTask2Utterances(const Corpus &corpus) {
  std::vector<Utterance> out;
  for (const auto &d : corpus.dialogues)
    for (const auto &u : d.turns)
      if (std::find(u.dialogue_acts.begin(), u.dialogue_acts.end(),
                    "InformIntent") != u.dialogue_acts.end())
        out.push_back(u);
  return out;
}

std::vector<UtterancePair> ConsecutivePairs(const Corpus &corpus) {
  std::vector<UtterancePair> pairs;
  for (const auto &d : corpus.dialogues)
    for (std::size_t t = 0; t + 1 < d.turns.size(); ++t)
      pairs.push_back({&d.turns[t], &d.turns[t + 1]});
  return pairs;
}

const std::string &PrimaryIntent(const Utterance &utterance) {
  static const std::string kNone;
  return utterance.intents.empty() ? kNone : utterance.intents.front();
}

}  // namespace intentforge
