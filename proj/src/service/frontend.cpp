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
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "storyloop/error.hpp"
#include "storyloop/service.hpp"
#include "storyloop/text.hpp"

namespace storyloop::service {
namespace {

namespace fs = std::filesystem;

std::string system_clock_iso8601() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool safe_story_id(const std::string& id) {
  if (id.empty() || id[0] == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           c == '-' || c == '.';
  });
}

SuggestionRecord suggestion_from_json(const json& j) {
  SuggestionRecord r;
  r.id = j.at("id").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.coordinates.story_id = j.at("story_id").get<std::string>();
  r.coordinates.scene = j.at("scene").get<std::size_t>();
  r.coordinates.entry = j.at("entry").get<std::size_t>();
  r.context_digest = j.at("context_digest").get<std::string>();
  r.context_length = j.at("context_length").get<std::int64_t>();
  r.generated = j.at("generated").get<std::string>();
  r.config = GenerationConfig::from_json(j.at("config"));
  r.timestamp = j.at("timestamp").get<std::string>();
  return r;
}

std::optional<PairScores> score_or_flag(const std::string& generated,
                                        const std::string& final_text) {
  try {
    return score_pair(generated, final_text);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kEmptyInput) return std::nullopt;
    throw;
  }
}

PublishedRecord published_from_json(const json& j, const std::string& generated) {
  PublishedRecord r;
  r.suggestion_id = j.at("suggestion_id").get<std::string>();
  r.final_text = j.at("final_text").get<std::string>();
  r.ratings = Ratings::from_json(j.at("ratings"));
  if (j.contains("comment") && !j["comment"].is_null()) {
    r.comment = j["comment"].get<std::string>();
  }
  r.timestamp = j.at("timestamp").get<std::string>();
  // Scores are a pure function of the stored texts.
  r.scores = score_or_flag(generated, r.final_text);
  return r;
}

std::uint64_t id_number(const std::string& id) {
  if (id.rfind("sug-", 0) != 0) return 0;
  try {
    return std::stoull(id.substr(4));
  } catch (const std::exception&) {
    return 0;
  }
}

json mean_or_null(double sum, std::size_t n) {
  return n ? json(sum / static_cast<double>(n)) : json(nullptr);
}

json correlation_cell(const std::vector<double>& a, const std::vector<double>& b) {
  json cell;
  cell["n"] = a.size();
  try {
    const Correlation c = pearson_r(a, b);
    cell["r"] = c.r;
    cell["available"] = true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateInput) throw;
    cell["r"] = nullptr;
    cell["available"] = false;
  }
  return cell;
}

}  // namespace

ServiceOptions ServiceOptions::from_environment() {
  ServiceOptions o;
  if (const char* dir = std::getenv("STORYLOOP_DATA_DIR"); dir && *dir) {
    o.data_dir = dir;
  }
  if (const char* t = std::getenv("STORYLOOP_BACKEND_TIMEOUT"); t && *t) {
    double seconds = 0;
    try {
      seconds = std::stod(t);
    } catch (const std::exception&) {
      seconds = -1;
    }
    if (!(seconds > 0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("STORYLOOP_BACKEND_TIMEOUT must be positive: ") + t);
    }
    o.backend_timeout =
        std::chrono::milliseconds(static_cast<std::int64_t>(seconds * 1000.0));
  }
  return o;
}

Service::Service(ServiceOptions options, BackendFactory factory)
    : options_(std::move(options)),
      factory_(std::move(factory)),
      policy_(options_.policy ? *options_.policy : packing::default_policy()) {
  fs::create_directories(options_.data_dir);
  const fs::path stories = fs::path(options_.data_dir) / "stories";
  if (fs::is_directory(stories)) {
    for (dataset::Story& s : dataset::load_corpus(stories.string())) {
      std::string id = s.id;
      stories_.emplace(std::move(id), std::move(s));
    }
  }
  log_path_ = (fs::path(options_.data_dir) / "records.jsonl").string();
  replay();
}

Service::~Service() = default;

std::string Service::now() const {
  return options_.clock ? options_.clock() : system_clock_iso8601();
}

void Service::replay() {
  if (!fs::exists(log_path_)) return;
  std::string content;
  {
    std::ifstream in(log_path_, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    content = ss.str();
  }
  // A crash can leave a partial last line; drop it so later appends start
  // on a fresh line.
  const std::size_t keep = content.rfind('\n') == std::string::npos
                               ? 0
                               : content.rfind('\n') + 1;
  if (keep < content.size()) {
    content.resize(keep);
    fs::resize_file(log_path_, keep);
  }
  std::istringstream lines(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      const json& rec = j.at("record");
      if (type == "suggestion") {
        SuggestionRecord r = suggestion_from_json(rec);
        next_id_ = std::max(next_id_, id_number(r.id) + 1);
        suggestion_index_[r.id] = suggestions_.size();
        suggestions_.push_back(std::move(r));
      } else if (type == "publish") {
        const std::string sid = rec.at("suggestion_id").get<std::string>();
        auto it = suggestion_index_.find(sid);
        if (it == suggestion_index_.end()) {
          throw Error(ErrorCode::kUnknownSuggestion, sid);
        }
        PublishedRecord r =
            published_from_json(rec, suggestions_[it->second].generated);
        publish_order_.push_back(sid);
        published_[sid] = std::move(r);
      } else {
        throw Error(ErrorCode::kParseError, "unknown record type " + type);
      }
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kParseError, log_path_ + ":" +
                                              std::to_string(line_no) + ": " +
                                              e.what());
    }
  }
}

void Service::append(const json& line) {
  std::lock_guard lock(log_mu_);
  std::ofstream out(log_path_, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::kInternal, "cannot open " + log_path_);
  out << line.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kInternal, "cannot write " + log_path_);
}

void Service::register_model(const std::string& name,
                             const std::string& address) {
  if (name.empty()) throw Error(ErrorCode::kInvalidArgument, "empty model name");
  {
    std::shared_lock lock(mu_);
    auto it = models_.find(name);
    if (it != models_.end() && it->second.status != BackendStatus::kDown) {
      throw Error(ErrorCode::kInvalidArgument,
                  "model " + name + " is already registered");
    }
  }
  Model m;
  m.address = address;
  m.backend = factory_(address, options_.backend_timeout);
  m.call_mu = std::make_shared<std::mutex>();
  m.backend->startup();
  m.status = BackendStatus::kReady;
  std::unique_lock lock(mu_);
  models_[name] = std::move(m);
}

void Service::shutdown_model(const std::string& name) {
  std::shared_ptr<ModelBackend> backend;
  std::shared_ptr<std::mutex> call_mu;
  {
    std::unique_lock lock(mu_);
    auto it = models_.find(name);
    if (it == models_.end()) {
      throw Error(ErrorCode::kUnknownModel, "unknown model " + name);
    }
    if (it->second.status == BackendStatus::kDown) return;
    it->second.status = BackendStatus::kDown;
    backend = it->second.backend;
    call_mu = it->second.call_mu;
  }
  std::lock_guard call(*call_mu);
  backend->shutdown();
}

json Service::models() const {
  std::shared_lock lock(mu_);
  json out = json::array();
  for (const auto& [name, m] : models_) {
    out.push_back({{"name", name},
                   {"address", m.address},
                   {"status", std::string(backend_status_name(m.status))}});
  }
  return out;
}

void Service::put_story(const dataset::Story& story) {
  if (!safe_story_id(story.id)) {
    throw Error(ErrorCode::kInvalidArgument,
                "story id '" + story.id + "' cannot be used as a file name");
  }
  const fs::path dir = fs::path(options_.data_dir) / "stories";
  fs::create_directories(dir);
  const fs::path target = dir / (story.id + ".story");
  const fs::path tmp = dir / (story.id + ".story.tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    out << dataset::to_json(story).dump(2) << '\n';
    if (!out) throw Error(ErrorCode::kInternal, "cannot write " + tmp.string());
  }
  fs::rename(tmp, target);
  std::unique_lock lock(mu_);
  stories_[story.id] = story;
}

std::vector<std::string> Service::story_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : stories_) ids.push_back(id);
  return ids;
}

SuggestionRecord Service::suggest(const Coordinates& where,
                                  const std::string& model,
                                  const GenerationConfig& config) {
  config.validate();
  std::shared_ptr<ModelBackend> backend;
  std::shared_ptr<std::mutex> call_mu;
  dataset::GenerationExample example;
  {
    std::shared_lock lock(mu_);
    auto m = models_.find(model);
    if (m == models_.end()) {
      throw Error(ErrorCode::kUnknownModel, "unknown model " + model);
    }
    if (m->second.status != BackendStatus::kReady) {
      throw Error(ErrorCode::kNotReady,
                  "model " + model + " is " +
                      std::string(backend_status_name(m->second.status)));
    }
    auto s = stories_.find(where.story_id);
    if (s == stories_.end()) {
      throw Error(ErrorCode::kUnknownStory, "unknown story " + where.story_id);
    }
    backend = m->second.backend;
    call_mu = m->second.call_mu;
    example =
        dataset::build_generation_example(s->second, where.scene, where.entry);
  }

  packing::Vocabulary vocab;
  std::vector<packing::PackInput> bundle =
      dataset::to_pack_inputs(example.segments, vocab);
  std::map<std::string, packing::TokenId> separators;
  std::vector<packing::SegmentSpec> specs;
  for (const packing::PackInput& in : bundle) {
    const std::string& kind = in.spec.kind_or_name();
    if (!separators.count(kind)) separators[kind] = vocab.add("<sep:" + kind + ">");
    specs.push_back(in.spec);
  }
  const std::int64_t budget = policy_.effective_budget();
  const packing::ComposedContext packed =
      packing::pack(bundle, policy_.instantiate(specs), budget, separators);
  const json context =
      packed_context_json(bundle, packed.allocation, vocab, budget);

  std::string raw;
  {
    std::lock_guard call(*call_mu);
    const json prepared = backend->preprocess(context);
    raw = backend->generate(prepared, config);
  }

  SuggestionRecord r;
  r.model = model;
  r.coordinates = where;
  r.context_digest = digest(context.dump());
  r.context_length = static_cast<std::int64_t>(packed.size());
  r.generated =
      truncate_sentences(raw, static_cast<std::size_t>(config.max_sentences));
  r.config = config;
  r.timestamp = now();

  std::unique_lock lock(mu_);
  r.id = "sug-" + std::to_string(next_id_);
  append({{"type", "suggestion"}, {"record", to_json(r)}});
  ++next_id_;
  suggestion_index_[r.id] = suggestions_.size();
  suggestions_.push_back(r);
  return r;
}

PublishedRecord Service::publish(const std::string& suggestion_id,
                                 const std::string& final_text,
                                 const Ratings& ratings,
                                 const std::optional<std::string>& comment) {
  Ratings checked = Ratings::from_json(ratings.to_json());
  std::string generated;
  {
    std::shared_lock lock(mu_);
    auto it = suggestion_index_.find(suggestion_id);
    if (it == suggestion_index_.end()) {
      throw Error(ErrorCode::kUnknownSuggestion,
                  "unknown suggestion " + suggestion_id);
    }
    if (published_.count(suggestion_id)) {
      throw Error(ErrorCode::kAlreadyPublished,
                  suggestion_id + " is already published");
    }
    generated = suggestions_[it->second].generated;
  }
  PublishedRecord r;
  r.suggestion_id = suggestion_id;
  r.final_text = final_text;
  r.ratings = checked;
  r.comment = comment;
  r.scores = score_or_flag(generated, final_text);
  r.timestamp = now();

  std::unique_lock lock(mu_);
  if (published_.count(suggestion_id)) {
    throw Error(ErrorCode::kAlreadyPublished,
                suggestion_id + " is already published");
  }
  append({{"type", "publish"}, {"record", to_json(r)}});
  publish_order_.push_back(suggestion_id);
  published_[suggestion_id] = r;
  return r;
}

std::size_t Service::suggestion_count() const {
  std::shared_lock lock(mu_);
  return suggestions_.size();
}

json Service::dashboard(const DashboardFilter& filter) const {
  std::shared_lock lock(mu_);
  auto keep = [&](const SuggestionRecord& s) {
    return (!filter.model || s.model == *filter.model) &&
           (!filter.story_id || s.coordinates.story_id == *filter.story_id);
  };

  struct Acc {
    std::size_t suggestions = 0;
    std::vector<const PublishedRecord*> published;
  };
  std::map<std::string, Acc> per_model;
  std::size_t total_suggestions = 0, total_published = 0;
  for (const SuggestionRecord& s : suggestions_) {
    if (!keep(s)) continue;
    ++per_model[s.model].suggestions;
    ++total_suggestions;
  }
  for (const std::string& sid : publish_order_) {
    const SuggestionRecord& s = suggestions_[suggestion_index_.at(sid)];
    if (!keep(s)) continue;
    per_model[s.model].published.push_back(&published_.at(sid));
    ++total_published;
  }

  static constexpr const char* kMetrics[] = {"user", "rouge_l", "rouge_w"};
  auto metric_of = [](const PairScores& p, int m) -> const EditMetricReport& {
    return m == 0 ? p.user : (m == 1 ? p.rouge_l : p.rouge_w);
  };

  json rows = json::array();
  for (const auto& [model, acc] : per_model) {
    json row;
    row["model"] = model;
    row["suggestions"] = acc.suggestions;
    row["published"] = acc.published.size();

    std::array<std::vector<double>, 4> ratings_all;
    std::array<std::vector<double>, 4> ratings_scored;
    std::array<std::vector<double>, 3> precision;
    std::array<std::array<double, 3>, 3> score_sum{};
    std::size_t scored = 0;
    for (const PublishedRecord* p : acc.published) {
      for (int i = 0; i < 4; ++i) ratings_all[i].push_back(p->ratings.values[i]);
      if (!p->scores) continue;
      ++scored;
      for (int i = 0; i < 4; ++i) ratings_scored[i].push_back(p->ratings.values[i]);
      for (int m = 0; m < 3; ++m) {
        const EditMetricReport& rep = metric_of(*p->scores, m);
        precision[m].push_back(rep.precision);
        score_sum[m][0] += rep.precision;
        score_sum[m][1] += rep.recall;
        score_sum[m][2] += rep.f1;
      }
    }
    row["degenerate"] = acc.published.size() - scored;

    json mean_ratings = json::object();
    for (int i = 0; i < 4; ++i) {
      double sum = 0;
      for (double v : ratings_all[i]) sum += v;
      mean_ratings[kRatingNames[i]] = mean_or_null(sum, ratings_all[i].size());
    }
    row["mean_ratings"] = std::move(mean_ratings);

    json mean_scores = json::object();
    for (int m = 0; m < 3; ++m) {
      mean_scores[kMetrics[m]] = {{"precision", mean_or_null(score_sum[m][0], scored)},
                                  {"recall", mean_or_null(score_sum[m][1], scored)},
                                  {"f1", mean_or_null(score_sum[m][2], scored)}};
    }
    row["mean_scores"] = std::move(mean_scores);

    json metric_cells = json::array();
    for (int m = 0; m < 3; ++m) {
      for (int i = 0; i < 4; ++i) {
        json cell = correlation_cell(precision[m], ratings_scored[i]);
        cell["metric"] = kMetrics[m];
        cell["rating"] = kRatingNames[i];
        metric_cells.push_back(std::move(cell));
      }
    }
    json rating_cells = json::array();
    for (int i = 0; i < 4; ++i) {
      for (int k = i + 1; k < 4; ++k) {
        json cell = correlation_cell(ratings_all[i], ratings_all[k]);
        cell["a"] = kRatingNames[i];
        cell["b"] = kRatingNames[k];
        rating_cells.push_back(std::move(cell));
      }
    }
    row["correlations"] = {{"metrics_x_ratings", std::move(metric_cells)},
                           {"ratings_x_ratings", std::move(rating_cells)}};
    rows.push_back(std::move(row));
  }

  if (filter.sort_by) {
    std::string pointer = "/" + *filter.sort_by;
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    const json::json_pointer ptr(pointer);
    auto key = [&](const json& row) {
      return row.contains(ptr) ? row.at(ptr) : json(nullptr);
    };
    std::stable_sort(rows.begin(), rows.end(), [&](const json& a, const json& b) {
      return filter.descending ? key(b) < key(a) : key(a) < key(b);
    });
  } else if (filter.descending) {
    std::reverse(rows.begin(), rows.end());
  }

  json out;
  out["models"] = std::move(rows);
  out["total_suggestions"] = total_suggestions;
  out["total_published"] = total_published;
  out["filter"] = {{"model", filter.model ? json(*filter.model) : json(nullptr)},
                   {"story_id", filter.story_id ? json(*filter.story_id) : json(nullptr)}};
  return out;
}

json Service::record(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = suggestion_index_.find(id);
  if (it == suggestion_index_.end()) {
    throw Error(ErrorCode::kUnknownSuggestion, "unknown suggestion " + id);
  }
  json out;
  out["suggestion"] = to_json(suggestions_[it->second]);
  auto p = published_.find(id);
  out["published"] = p == published_.end() ? json(nullptr) : to_json(p->second);
  return out;
}

json Service::diff(const std::string& id,
                   const std::optional<std::string>& edited) const {
  std::string generated, target;
  {
    std::shared_lock lock(mu_);
    auto it = suggestion_index_.find(id);
    if (it == suggestion_index_.end()) {
      throw Error(ErrorCode::kUnknownSuggestion, "unknown suggestion " + id);
    }
    generated = suggestions_[it->second].generated;
    if (edited) {
      target = *edited;
    } else {
      auto p = published_.find(id);
      if (p == published_.end()) {
        throw Error(ErrorCode::kInvalidArgument,
                    id + " is not published; pass the edited text");
      }
      target = p->second.final_text;
    }
  }
  json out;
  out["id"] = id;
  out["generated"] = generated;
  out["edited"] = target;
  out["segments"] = diff_json(diff_segments(generated, target));
  auto scores = score_or_flag(generated, target);
  out["user"] = scores ? to_json(scores->user) : json(nullptr);
  return out;
}

}  // namespace storyloop::service
