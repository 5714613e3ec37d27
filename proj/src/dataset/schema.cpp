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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "storyloop/dataset.hpp"
#include "storyloop/error.hpp"
#include "storyloop/text.hpp"

namespace storyloop::dataset {
namespace {

using nlohmann::json;

[[noreturn]] void violation(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kSchemaViolation, path + ": " + what);
}

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

void check_object(const json& j, const std::string& path,
                  std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) violation(path.empty() ? "$" : path, "expected object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      violation(join_path(path, key), "unknown field");
    }
  }
}

std::string get_string(const json& j, const std::string& path,
                       const char* key, bool required, bool nonempty = false) {
  const std::string p = join_path(path, key);
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    if (required) violation(p, "missing");
    return {};
  }
  if (!it->is_string()) violation(p, "expected string");
  std::string s = it->get<std::string>();
  if (nonempty && s.empty()) violation(p, "must be nonempty");
  return s;
}

std::optional<std::string> get_optional_string(const json& j,
                                               const std::string& path,
                                               const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) violation(join_path(path, key), "expected string");
  return it->get<std::string>();
}

bool get_bool(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return false;
  if (!it->is_boolean()) violation(join_path(path, key), "expected boolean");
  return it->get<bool>();
}

const json& get_array(const json& j, const std::string& path, const char* key) {
  static const json kEmpty = json::array();
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return kEmpty;
  if (!it->is_array()) violation(join_path(path, key), "expected array");
  return *it;
}

Card parse_card(const json& j, const std::string& path) {
  check_object(j, path, {"id", "kind", "is_wild", "title", "description"});
  Card c;
  c.id = get_string(j, path, "id", true, true);
  const std::string kind = get_string(j, path, "kind", true);
  auto k = parse_card_kind(kind);
  if (!k) violation(join_path(path, "kind"), "unknown card kind '" + kind + "'");
  c.kind = *k;
  c.is_wild = get_bool(j, path, "is_wild");
  c.title = get_string(j, path, "title", false);
  c.description = get_string(j, path, "description", false);
  if (!c.is_wild && c.title.empty()) {
    violation(join_path(path, "title"), "must be nonempty for non-wild cards");
  }
  return c;
}

Character parse_character(const json& j, const std::string& path) {
  check_object(j, path, {"id", "name", "description", "player_id"});
  Character c;
  c.id = get_string(j, path, "id", true, true);
  c.name = get_string(j, path, "name", false);
  c.description = get_string(j, path, "description", false);
  c.player_id = get_string(j, path, "player_id", false);
  return c;
}

Entry parse_entry(const json& j, const std::string& path) {
  check_object(j, path, {"id", "author_role", "character_id", "text",
                         "cards_played", "challenge_id", "ordinal"});
  Entry e;
  e.id = get_string(j, path, "id", true, true);
  const std::string role = get_string(j, path, "author_role", true);
  auto character = get_optional_string(j, path, "character_id");
  if (role == "narrator") {
    if (character) {
      violation(join_path(path, "character_id"),
                "must be absent for narrator entries");
    }
  } else if (role == "character") {
    if (!character || character->empty()) {
      violation(join_path(path, "character_id"), "missing");
    }
    e.character_id = character;
  } else {
    violation(join_path(path, "author_role"),
              "expected 'narrator' or 'character'");
  }
  e.text = get_string(j, path, "text", true);
  const json& played = get_array(j, path, "cards_played");
  const std::string played_path = join_path(path, "cards_played");
  for (std::size_t i = 0; i < played.size(); ++i) {
    if (!played[i].is_string()) {
      violation(index_path(played_path, i), "expected string");
    }
    e.cards_played.push_back(played[i].get<std::string>());
  }
  e.challenge_id = get_optional_string(j, path, "challenge_id");
  auto it = j.find("ordinal");
  if (it == j.end()) violation(join_path(path, "ordinal"), "missing");
  if (!it->is_number_integer()) {
    violation(join_path(path, "ordinal"), "expected integer");
  }
  e.ordinal = it->get<int>();
  return e;
}

Scene parse_scene(const json& j, const std::string& path) {
  check_object(j, path, {"id", "intro", "entries"});
  Scene s;
  s.id = get_string(j, path, "id", true, true);
  s.intro = get_string(j, path, "intro", false);
  const json& entries = get_array(j, path, "entries");
  const std::string entries_path = join_path(path, "entries");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    s.entries.push_back(parse_entry(entries[i], index_path(entries_path, i)));
  }
  std::stable_sort(
      s.entries.begin(), s.entries.end(),
      [](const Entry& a, const Entry& b) { return a.ordinal < b.ordinal; });
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    if (s.entries[i].ordinal != static_cast<int>(i)) {
      violation(entries_path, "ordinals must run 0.." +
                                  std::to_string(s.entries.size() - 1) +
                                  " without gaps or repeats");
    }
  }
  return s;
}

template <typename T>
void check_unique_ids(const std::vector<T>& items, const std::string& path) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!seen.insert(items[i].id).second) {
      violation(index_path(path, i) + ".id",
                "duplicate id '" + items[i].id + "'");
    }
  }
}

[[noreturn]] void dangling(const std::string& path, const std::string& id) {
  throw Error(ErrorCode::kDanglingReference,
              path + ": unknown reference '" + id + "'");
}

}  // namespace

std::string_view card_kind_name(CardKind kind) {
  switch (kind) {
    case CardKind::kStrength: return "strength";
    case CardKind::kWeakness: return "weakness";
    case CardKind::kItem: return "item";
    case CardKind::kGoal: return "goal";
    case CardKind::kLocation: return "location";
    case CardKind::kChallenge: return "challenge";
  }
  return "strength";
}

std::optional<CardKind> parse_card_kind(std::string_view name) {
  for (CardKind k : kAllCardKinds) {
    if (card_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

const Card* Story::find_card(const std::string& card_id) const {
  for (const Card& c : cards) {
    if (c.id == card_id) return &c;
  }
  return nullptr;
}

const Character* Story::find_character(const std::string& character_id) const {
  for (const Character& c : characters) {
    if (c.id == character_id) return &c;
  }
  return nullptr;
}

Story load_story(const json& doc) {
  check_object(doc, "",
               {"id", "world", "completed", "characters", "cards", "scenes"});
  Story story;
  story.id = get_string(doc, "", "id", true, true);
  story.world = get_optional_string(doc, "", "world");
  story.completed = get_bool(doc, "", "completed");

  const json& characters = get_array(doc, "", "characters");
  for (std::size_t i = 0; i < characters.size(); ++i) {
    story.characters.push_back(
        parse_character(characters[i], index_path("characters", i)));
  }
  const json& cards = get_array(doc, "", "cards");
  for (std::size_t i = 0; i < cards.size(); ++i) {
    story.cards.push_back(parse_card(cards[i], index_path("cards", i)));
  }
  const json& scenes = get_array(doc, "", "scenes");
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    story.scenes.push_back(parse_scene(scenes[i], index_path("scenes", i)));
  }
  check_unique_ids(story.characters, "characters");
  check_unique_ids(story.cards, "cards");
  check_unique_ids(story.scenes, "scenes");

  for (std::size_t s = 0; s < story.scenes.size(); ++s) {
    const Scene& scene = story.scenes[s];
    check_unique_ids(scene.entries, index_path("scenes", s) + ".entries");
    for (std::size_t e = 0; e < scene.entries.size(); ++e) {
      const Entry& entry = scene.entries[e];
      const std::string path =
          index_path(index_path("scenes", s) + ".entries", e);
      if (entry.character_id && !story.find_character(*entry.character_id)) {
        dangling(path + ".character_id", *entry.character_id);
      }
      for (std::size_t c = 0; c < entry.cards_played.size(); ++c) {
        if (!story.find_card(entry.cards_played[c])) {
          dangling(index_path(path + ".cards_played", c),
                   entry.cards_played[c]);
        }
      }
      if (entry.challenge_id) {
        const Card* card = story.find_card(*entry.challenge_id);
        if (!card) dangling(path + ".challenge_id", *entry.challenge_id);
        if (card->kind != CardKind::kChallenge) {
          violation(path + ".challenge_id",
                    "card '" + card->id + "' is not a challenge card");
        }
      }
    }
  }
  return story;
}

Story load_story_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
  return load_story(doc);
}

json to_json(const Story& story) {
  json doc = json::object();
  doc["id"] = story.id;
  doc["world"] = story.world ? json(*story.world) : json(nullptr);
  doc["completed"] = story.completed;
  doc["characters"] = json::array();
  for (const Character& c : story.characters) {
    doc["characters"].push_back({{"id", c.id},
                                 {"name", c.name},
                                 {"description", c.description},
                                 {"player_id", c.player_id}});
  }
  doc["cards"] = json::array();
  for (const Card& c : story.cards) {
    doc["cards"].push_back({{"id", c.id},
                            {"kind", std::string(card_kind_name(c.kind))},
                            {"is_wild", c.is_wild},
                            {"title", c.title},
                            {"description", c.description}});
  }
  doc["scenes"] = json::array();
  for (const Scene& s : story.scenes) {
    json entries = json::array();
    for (const Entry& e : s.entries) {
      json j = json::object();
      j["id"] = e.id;
      j["author_role"] = e.is_narrator() ? "narrator" : "character";
      j["character_id"] = e.character_id ? json(*e.character_id) : json(nullptr);
      j["text"] = e.text;
      j["cards_played"] = e.cards_played;
      j["challenge_id"] = e.challenge_id ? json(*e.challenge_id) : json(nullptr);
      j["ordinal"] = e.ordinal;
      entries.push_back(std::move(j));
    }
    doc["scenes"].push_back(
        {{"id", s.id}, {"intro", s.intro}, {"entries", std::move(entries)}});
  }
  return doc;
}

std::vector<Story> load_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::path root(dir);
  if (fs::is_directory(root / "stories")) root /= "stories";
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::kInvalidArgument, "not a directory: " + dir);
  }
  std::vector<fs::path> files;
  for (const auto& item : fs::directory_iterator(root)) {
    if (item.is_regular_file() && item.path().extension() == ".story") {
      files.push_back(item.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<Story> corpus;
  corpus.reserve(files.size());
  for (const fs::path& f : files) corpus.push_back(load_story_file(f.string()));
  return corpus;
}

std::int64_t stats_token_count(std::string_view text) {
  return static_cast<std::int64_t>(tokenize(text, TokenizerMode::kStats).size());
}

}  // namespace storyloop::dataset
