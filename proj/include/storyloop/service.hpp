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

#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "storyloop/dataset.hpp"
#include "storyloop/error.hpp"
#include "storyloop/metrics.hpp"
#include "storyloop/packing.hpp"

namespace storyloop::service {

using nlohmann::json;

// Sampling settings are passed through to the backend untouched.
struct GenerationConfig {
  std::optional<int> top_k;
  std::optional<double> top_p = 0.9;
  double temperature = 0.9;
  double repetition_penalty = 1.2;
  int desired_length = 60;
  int max_sentences = 4;

  // Throws kInvalidArgument.
  void validate() const;
  json to_json() const;
  // Missing fields keep their defaults; giving top_k clears the default top_p.
  static GenerationConfig from_json(const json& j);
};

// Wire format of a packed context: segments in order with their trimmed
// tokens and segment-id names. The same shape is sent to `/preprocess`.
json packed_context_json(const std::vector<packing::PackInput>& bundle,
                         const packing::Allocation& allocation,
                         const packing::Vocabulary& tokens,
                         std::int64_t budget);

// 64-bit FNV-1a, hex encoded.
std::string digest(std::string_view data);

// The four calls every model backend implements.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual void startup() = 0;
  virtual void shutdown() = 0;
  virtual json preprocess(const json& context) = 0;
  virtual std::string generate(const json& prepared,
                               const GenerationConfig& config) = 0;
};

// JSON POSTs to `<address>/startup`, `/shutdown`, `/preprocess` and
// `/generate`. Connection failures raise kBackendUnreachable; error
// responses raise kBackendError carrying the backend's message.
class HttpBackend : public ModelBackend {
 public:
  HttpBackend(std::string address, std::chrono::milliseconds timeout);

  void startup() override;
  void shutdown() override;
  json preprocess(const json& context) override;
  std::string generate(const json& prepared,
                       const GenerationConfig& config) override;

 private:
  json call(const std::string& method, const json& body);

  std::string address_;
  std::chrono::milliseconds timeout_;
};

// Deterministic stand-in for a language model. `preprocess` re-packs the
// context under the shipped policy with a budget of at most 1024 tokens and
// returns {digest, length}; `generate` returns six templated sentences
// seeded by the digest and the sampling config.
class MockModel : public ModelBackend {
 public:
  static constexpr std::int64_t kMaxLength = 1024;
  static constexpr int kSentences = 6;

  void startup() override;
  void shutdown() override;
  json preprocess(const json& context) override;
  std::string generate(const json& prepared,
                       const GenerationConfig& config) override;

  bool running() const { return running_; }

 private:
  bool running_ = false;
};

// Serves a MockModel over HTTP with the backend protocol.
class MockBackendServer {
 public:
  MockBackendServer();
  ~MockBackendServer();
  MockBackendServer(const MockBackendServer&) = delete;
  MockBackendServer& operator=(const MockBackendServer&) = delete;

  // Returns the bound port; port 0 picks a free one.
  int bind(const std::string& host, int port = 0);
  void listen();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

enum class BackendStatus { kRegistered, kReady, kDown };
std::string_view backend_status_name(BackendStatus status);

struct Coordinates {
  std::string story_id;
  std::size_t scene = 0;
  std::size_t entry = 0;
};

struct SuggestionRecord {
  std::string id;
  std::string model;
  Coordinates coordinates;
  std::string context_digest;
  std::int64_t context_length = 0;
  std::string generated;
  GenerationConfig config;
  std::string timestamp;  // ISO-8601 UTC
};

inline constexpr const char* kRatingNames[] = {"relevance", "fluency",
                                               "coherence", "likability"};

struct Ratings {
  std::array<int, 4> values{};  // in kRatingNames order

  json to_json() const;
  // Throws kRatingOutOfRange for values outside 1..5, kInvalidArgument for
  // missing fields.
  static Ratings from_json(const json& j);
};

struct PublishedRecord {
  std::string suggestion_id;
  std::string final_text;
  Ratings ratings;
  std::optional<std::string> comment;
  // Empty when either text has no METRIC tokens.
  std::optional<PairScores> scores;
  std::string timestamp;

  bool degenerate() const { return !scores.has_value(); }
};

json to_json(const SuggestionRecord& r);
json to_json(const PublishedRecord& r);
json to_json(const EditMetricReport& r);
json diff_json(const std::vector<DiffSegment>& segments);

struct ServiceOptions {
  std::string data_dir = "data";
  std::chrono::milliseconds backend_timeout{30000};
  // Overrides the shipped generation policy.
  std::optional<packing::Policy> policy;
  // Returns ISO-8601 timestamps; defaults to the system clock.
  std::function<std::string()> clock;

  // STORYLOOP_DATA_DIR and STORYLOOP_BACKEND_TIMEOUT (seconds).
  static ServiceOptions from_environment();
};

// Builds backends for registered addresses. The default understands
// `mock:` (an in-process MockModel) and http:// URLs.
using BackendFactory = std::function<std::unique_ptr<ModelBackend>(
    const std::string& address, std::chrono::milliseconds timeout)>;
BackendFactory default_backend_factory();

struct DashboardFilter {
  std::optional<std::string> model;
  std::optional<std::string> story_id;
  // Dotted field of a model row, e.g. "mean_ratings.relevance"; default is
  // the model name.
  std::optional<std::string> sort_by;
  bool descending = false;
};

// Frontend state: registered backends, stories and the record log. The log
// (`<data_dir>/records.jsonl`) is append-only; construction replays it, and
// a truncated final line left by a crash is ignored.
class Service {
 public:
  explicit Service(ServiceOptions options,
                   BackendFactory factory = default_backend_factory());
  ~Service();

  void register_model(const std::string& name, const std::string& address);
  void shutdown_model(const std::string& name);
  json models() const;

  // Adds or replaces a story and writes it to `<data_dir>/stories`.
  void put_story(const dataset::Story& story);
  std::vector<std::string> story_ids() const;

  SuggestionRecord suggest(const Coordinates& where, const std::string& model,
                           const GenerationConfig& config);
  PublishedRecord publish(const std::string& suggestion_id,
                          const std::string& final_text, const Ratings& ratings,
                          const std::optional<std::string>& comment);

  json dashboard(const DashboardFilter& filter = {}) const;
  json record(const std::string& id) const;
  // Diff of the generated text against `edited`, or against the published
  // text when `edited` is absent.
  json diff(const std::string& id,
            const std::optional<std::string>& edited = std::nullopt) const;

  std::size_t suggestion_count() const;
  const std::string& log_path() const { return log_path_; }

 private:
  struct Model {
    std::string address;
    BackendStatus status = BackendStatus::kRegistered;
    std::shared_ptr<ModelBackend> backend;
    std::shared_ptr<std::mutex> call_mu;  // one backend call at a time
  };

  void replay();
  void append(const json& line);
  std::string now() const;

  ServiceOptions options_;
  BackendFactory factory_;
  packing::Policy policy_;
  std::string log_path_;

  mutable std::shared_mutex mu_;
  std::mutex log_mu_;
  std::map<std::string, Model> models_;
  std::map<std::string, dataset::Story> stories_;
  std::vector<SuggestionRecord> suggestions_;
  std::map<std::string, std::size_t> suggestion_index_;
  std::map<std::string, PublishedRecord> published_;
  std::vector<std::string> publish_order_;
  std::uint64_t next_id_ = 1;
};

// HTTP frontend over a Service:
//   POST /models/register  {name, address}
//   POST /models/shutdown  {name}
//   GET  /models
//   POST /stories          story document
//   GET  /stories
//   POST /suggest          {story_id, scene, entry, model, config?}
//   POST /publish          {suggestion_id, final_text, ratings, comment?}
//   GET  /dashboard        ?model=&story=&sort=&order=asc|desc
//   GET  /records/<id>
//   GET  /diff/<id>        ?edited=   (POST with {edited} also accepted)
// Errors come back as {error, message} with a 4xx/5xx status.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  int bind(const std::string& host, int port = 0);
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Status code used for an error code in HTTP responses.
int http_status(ErrorCode code);

// Splits "host:port"; throws kInvalidArgument.
std::pair<std::string, int> parse_bind_address(const std::string& text);

}  // namespace storyloop::service
