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

#include <random>

#include "storyloop/error.hpp"
#include "storyloop/service.hpp"

// After the Eigen-based headers: resolv.h, pulled in here, defines _res.
#include "httplib.h"

namespace storyloop::service {
namespace {

constexpr const char* kSubjects[] = {
    "The lantern", "My companion", "The old map", "A distant bell",
    "The stranger", "Our guide", "The river", "The tower guard"};
constexpr const char* kVerbs[] = {"points toward", "whispers about",
                                  "circles back to", "hides near",
                                  "glows beside", "waits by"};
constexpr const char* kObjects[] = {"the broken gate", "a sealed letter",
                                    "the northern road", "the quiet market",
                                    "an iron key", "the ember stones"};
constexpr const char* kEndings[] = {".", ".", "!", "?"};

template <std::size_t N>
const char* pick(const char* const (&options)[N], std::mt19937_64& rng) {
  return options[rng() % N];
}

void require_running(bool running) {
  if (!running) throw Error(ErrorCode::kNotReady, "mock backend is not started");
}

std::string string_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("context segment lacks ") + key);
  }
  return j[key].get<std::string>();
}

}  // namespace

void MockModel::startup() { running_ = true; }

void MockModel::shutdown() { running_ = false; }

json MockModel::preprocess(const json& context) {
  require_running(running_);
  if (!context.is_object() || !context.contains("segments") ||
      !context["segments"].is_array()) {
    throw Error(ErrorCode::kInvalidArgument, "context lacks segments");
  }
  packing::Vocabulary segment_ids;
  for (std::size_t i = 0; i < dataset::segment_vocabulary().size(); ++i) {
    segment_ids.add(dataset::segment_vocabulary().word(static_cast<int>(i)));
  }
  packing::Vocabulary tokens;
  std::vector<packing::PackInput> bundle;
  std::map<std::string, packing::TokenId> separators;
  for (const json& seg : context["segments"]) {
    packing::PackInput in;
    in.spec.name = string_field(seg, "name");
    in.spec.kind = seg.value("kind", std::string());
    const std::string trim = seg.value("trim", std::string("head"));
    in.spec.trim = trim == "tail" ? packing::Trim::kTail : packing::Trim::kHead;
    for (const json& id : seg.value("segment_ids", json::array())) {
      in.spec.segment_ids.push_back(segment_ids.add(id.get<std::string>()));
    }
    if (in.spec.segment_ids.empty()) {
      in.spec.segment_ids.push_back(segment_ids.add(in.spec.name));
    }
    for (const json& t : seg.value("tokens", json::array())) {
      in.tokens.push_back(tokens.add(t.get<std::string>()));
    }
    in.spec.available = static_cast<std::int64_t>(in.tokens.size());
    in.spec.declared_index = static_cast<int>(bundle.size());
    bundle.push_back(std::move(in));
  }
  for (const auto& in : bundle) {
    const std::string& kind = in.spec.kind_or_name();
    if (!separators.count(kind)) separators[kind] = tokens.add("<sep:" + kind + ">");
  }
  std::int64_t budget = context.value("budget", kMaxLength);
  budget = std::clamp<std::int64_t>(budget, 0, kMaxLength);
  const auto specs = [&] {
    std::vector<packing::SegmentSpec> out;
    for (const auto& in : bundle) out.push_back(in.spec);
    return out;
  }();
  const auto constraints = packing::default_policy().instantiate(specs);
  const packing::ComposedContext packed =
      packing::pack(bundle, constraints, budget, separators);
  std::string flat;
  for (const packing::ContextItem& item : packed.items) {
    flat += tokens.word(item.token);
    flat += ' ';
  }
  json prepared;
  prepared["digest"] = digest(flat);
  prepared["length"] = static_cast<std::int64_t>(packed.size());
  return prepared;
}

std::string MockModel::generate(const json& prepared,
                                const GenerationConfig& config) {
  require_running(running_);
  const std::string key = prepared.dump() + "|" + config.to_json().dump();
  std::mt19937_64 rng(std::stoull(digest(key), nullptr, 16));
  std::string text;
  for (int i = 0; i < kSentences; ++i) {
    if (i) text += ' ';
    text += pick(kSubjects, rng);
    text += ' ';
    text += pick(kVerbs, rng);
    text += ' ';
    text += pick(kObjects, rng);
    text += pick(kEndings, rng);
  }
  return text;
}

struct MockBackendServer::Impl {
  httplib::Server server;
  MockModel model;
  std::mutex mu;
};

MockBackendServer::MockBackendServer() : impl_(std::make_unique<Impl>()) {
  auto handle = [this](auto fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        json body = req.body.empty() ? json::object() : json::parse(req.body);
        std::lock_guard lock(impl_->mu);
        res.set_content(fn(body).dump(), "application/json");
      } catch (const Error& e) {
        res.status = http_status(e.code());
        res.set_content(json{{"error", error_code_name(e.code())},
                             {"message", e.what()}}
                            .dump(),
                        "application/json");
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(
            json{{"error", "InvalidArgument"}, {"message", e.what()}}.dump(),
            "application/json");
      }
    };
  };
  impl_->server.Post("/startup", handle([this](const json&) {
    impl_->model.startup();
    return json{{"status", "READY"}};
  }));
  impl_->server.Post("/shutdown", handle([this](const json&) {
    impl_->model.shutdown();
    return json{{"status", "DOWN"}};
  }));
  impl_->server.Post("/preprocess", handle([this](const json& body) {
    return json{{"prepared", impl_->model.preprocess(body.value("context", json()))}};
  }));
  impl_->server.Post("/generate", handle([this](const json& body) {
    const GenerationConfig config =
        GenerationConfig::from_json(body.value("config", json()));
    return json{{"text", impl_->model.generate(body.value("prepared", json()),
                                               config)}};
  }));
}

MockBackendServer::~MockBackendServer() { stop(); }

int MockBackendServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void MockBackendServer::listen() { impl_->server.listen_after_bind(); }

void MockBackendServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace storyloop::service
