// Copyright 2026 The Storyloop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "storyloop/dataset.hpp"
#include "storyloop/error.hpp"
#include "storyloop/text.hpp"

namespace storyloop::dataset {
namespace {

std::string card_segment_id(CardKind kind) {
  return std::string(card_kind_name(kind)) + "-card";
}

struct Builder {
  GenerationExample example;
  const packing::Vocabulary& vocab = segment_vocabulary();

  void add(std::string name, std::string kind,
           const std::vector<std::string>& ids, packing::Trim trim,
           std::string_view text) {
    BundleSegment seg;
    seg.spec.name = std::move(name);
    seg.spec.kind = std::move(kind);
    for (const std::string& id : ids) seg.spec.segment_ids.push_back(vocab.id(id));
    seg.spec.trim = trim;
    seg.spec.declared_index = static_cast<int>(example.segments.size());
    seg.tokens = tokenize(text, TokenizerMode::kStats).tokens;
    seg.spec.available = static_cast<std::int64_t>(seg.tokens.size());
    example.segments.push_back(std::move(seg));
  }
};

}  // namespace

const packing::Vocabulary& segment_vocabulary() {
  static const packing::Vocabulary vocab = [] {
    std::vector<std::string> words = {"scene-intro", "title", "description",
                                      "character", "previous-entry",
                                      "character-entry"};
    for (CardKind k : kAllCardKinds) words.push_back(card_segment_id(k));
    return packing::Vocabulary(words);
  }();
  return vocab;
}

GenerationExample build_generation_example(const Story& story,
                                           std::size_t scene_index,
                                           std::size_t entry_index) {
  if (scene_index >= story.scenes.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "scene index " + std::to_string(scene_index) + " out of range");
  }
  const Scene& scene = story.scenes[scene_index];
  if (entry_index >= scene.entries.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "entry index " + std::to_string(entry_index) + " out of range");
  }
  const Entry& target = scene.entries[entry_index];
  if (target.is_narrator()) {
    throw Error(ErrorCode::kNarratorTarget,
                "entry " + target.id + " is written by the narrator");
  }
  const std::string& who = *target.character_id;

  // Walks backwards through the story from the target.
  const Entry* previous = nullptr;
  const Entry* own_last = nullptr;
  for (std::size_t s = scene_index + 1; s-- > 0;) {
    const Scene& sc = story.scenes[s];
    std::size_t e = s == scene_index ? entry_index : sc.entries.size();
    while (e-- > 0) {
      const Entry& cand = sc.entries[e];
      if (!previous) {
        previous = &cand;
        if (cand.character_id == who) break;
        continue;
      }
      if (cand.character_id == who) {
        own_last = &cand;
        break;
      }
    }
    if (own_last || (previous && previous->character_id == who)) break;
  }

  using packing::Trim;
  Builder b;
  b.add("intro", "", {"scene-intro"}, Trim::kHead, scene.intro);

  const Card* challenge =
      target.challenge_id ? story.find_card(*target.challenge_id) : nullptr;
  b.add("challenge_title", "", {"challenge-card", "title"}, Trim::kHead,
        challenge ? challenge->title : "");
  b.add("challenge_description", "", {"challenge-card", "description"},
        Trim::kHead, challenge ? challenge->description : "");

  for (const std::string& id : target.cards_played) {
    const Card* card = story.find_card(id);
    if (card->kind == CardKind::kLocation || card == challenge) continue;
    const std::string kind_id = card_segment_id(card->kind);
    b.add("card_title:" + id, "card_title", {kind_id, "title"}, Trim::kHead,
          card->title);
    b.add("card_description:" + id, "card_description",
          {kind_id, "description"}, Trim::kHead, card->description);
  }

  const Character* character = story.find_character(who);
  b.add("character", "", {"character"}, Trim::kHead, character->description);
  b.add("prev_entry", "", {"previous-entry"}, Trim::kTail,
        previous ? previous->text : "");
  b.add("last_entry", "", {"character-entry"}, Trim::kTail,
        own_last ? own_last->text : "");

  b.example.reference = target.text;
  b.example.character_id = who;
  return std::move(b.example);
}

std::vector<packing::PackInput> to_pack_inputs(
    const std::vector<BundleSegment>& segments, packing::Vocabulary& tokens) {
  std::vector<packing::PackInput> out;
  out.reserve(segments.size());
  for (const BundleSegment& seg : segments) {
    out.push_back({seg.spec, tokens.encode(seg.tokens)});
  }
  return out;
}

}  // namespace storyloop::dataset
