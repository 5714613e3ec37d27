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

#include <cstdio>

#include "storyloop/error.hpp"
#include "storyloop/service.hpp"

// After the Eigen-based headers: resolv.h, pulled in here, defines _res.
#include "httplib.h"

namespace storyloop::service {

void GenerationConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, what);
  };
  if (top_k.has_value() == top_p.has_value()) {
    fail("exactly one of top_k and top_p must be set");
  }
  if (top_k && *top_k < 1) fail("top_k must be >= 1");
  if (top_p && !(*top_p > 0.0 && *top_p <= 1.0)) fail("top_p must be in (0, 1]");
  if (!(temperature > 0.0)) fail("temperature must be positive");
  if (!(repetition_penalty > 0.0)) fail("repetition_penalty must be positive");
  if (desired_length < 1) fail("desired_length must be >= 1");
  if (max_sentences < 1) fail("max_sentences must be >= 1");
}

json GenerationConfig::to_json() const {
  json j;
  j["top_k"] = top_k ? json(*top_k) : json(nullptr);
  j["top_p"] = top_p ? json(*top_p) : json(nullptr);
  j["temperature"] = temperature;
  j["repetition_penalty"] = repetition_penalty;
  j["desired_length"] = desired_length;
  j["max_sentences"] = max_sentences;
  return j;
}

GenerationConfig GenerationConfig::from_json(const json& j) {
  GenerationConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "config must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "top_k" && key != "top_p" && key != "temperature" &&
        key != "repetition_penalty" && key != "desired_length" &&
        key != "max_sentences") {
      throw Error(ErrorCode::kInvalidArgument, "config: unknown field '" + key + "'");
    }
  }
  try {
    if (j.contains("top_k") && !j["top_k"].is_null()) {
      c.top_k = j["top_k"].get<int>();
      c.top_p.reset();
    }
    if (j.contains("top_p")) {
      if (j["top_p"].is_null()) {
        c.top_p.reset();
      } else {
        c.top_p = j["top_p"].get<double>();
      }
    }
    c.temperature = j.value("temperature", c.temperature);
    c.repetition_penalty = j.value("repetition_penalty", c.repetition_penalty);
    c.desired_length = j.value("desired_length", c.desired_length);
    c.max_sentences = j.value("max_sentences", c.max_sentences);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

json packed_context_json(const std::vector<packing::PackInput>& bundle,
                         const packing::Allocation& allocation,
                         const packing::Vocabulary& tokens,
                         std::int64_t budget) {
  const auto trimmed = packing::trimmed_tokens(bundle, allocation);
  const packing::Vocabulary& segments = dataset::segment_vocabulary();
  json out;
  out["budget"] = budget;
  out["segments"] = json::array();
  for (std::size_t i = 0; i < bundle.size(); ++i) {
    const packing::SegmentSpec& spec = bundle[i].spec;
    json seg;
    seg["name"] = spec.name;
    seg["kind"] = spec.kind_or_name();
    seg["trim"] = std::string(packing::trim_name(spec.trim));
    json ids = json::array();
    for (packing::SegmentId id : spec.segment_ids) ids.push_back(segments.word(id));
    seg["segment_ids"] = std::move(ids);
    json toks = json::array();
    for (packing::TokenId t : trimmed[i]) toks.push_back(tokens.word(t));
    seg["tokens"] = std::move(toks);
    out["segments"].push_back(std::move(seg));
  }
  return out;
}

std::string digest(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

HttpBackend::HttpBackend(std::string address, std::chrono::milliseconds timeout)
    : address_(std::move(address)), timeout_(timeout) {
  while (!address_.empty() && address_.back() == '/') address_.pop_back();
}

json HttpBackend::call(const std::string& method, const json& body) {
  httplib::Client client(address_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  auto res = client.Post("/" + method, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kBackendUnreachable,
                address_ + "/" + method + ": " + httplib::to_string(res.error()));
  }
  json reply;
  try {
    reply = res->body.empty() ? json::object() : json::parse(res->body);
  } catch (const json::parse_error&) {
    throw Error(ErrorCode::kBackendError,
                method + ": malformed response from backend");
  }
  if (res->status < 200 || res->status >= 300) {
    std::string message = "status " + std::to_string(res->status);
    if (reply.is_object() && reply.contains("message")) {
      message = reply["message"].get<std::string>();
    } else if (reply.is_object() && reply.contains("error")) {
      message = reply["error"].dump();
    }
    throw Error(ErrorCode::kBackendError, message);
  }
  return reply;
}

void HttpBackend::startup() { call("startup", json::object()); }

void HttpBackend::shutdown() { call("shutdown", json::object()); }

json HttpBackend::preprocess(const json& context) {
  return call("preprocess", {{"context", context}}).value("prepared", json());
}

std::string HttpBackend::generate(const json& prepared,
                                  const GenerationConfig& config) {
  json reply =
      call("generate", {{"prepared", prepared}, {"config", config.to_json()}});
  if (!reply.contains("text") || !reply["text"].is_string()) {
    throw Error(ErrorCode::kBackendError, "generate: response lacks text");
  }
  return reply["text"].get<std::string>();
}

BackendFactory default_backend_factory() {
  return [](const std::string& address, std::chrono::milliseconds timeout)
             -> std::unique_ptr<ModelBackend> {
    if (address.rfind("mock:", 0) == 0) return std::make_unique<MockModel>();
    if (address.rfind("http://", 0) == 0) {
      return std::make_unique<HttpBackend>(address, timeout);
    }
    throw Error(ErrorCode::kInvalidArgument,
                "backend address must be mock: or an http:// URL: " + address);
  };
}

std::string_view backend_status_name(BackendStatus status) {
  switch (status) {
    case BackendStatus::kRegistered: return "REGISTERED";
    case BackendStatus::kReady: return "READY";
    case BackendStatus::kDown: return "DOWN";
  }
  return "DOWN";
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownModel:
    case ErrorCode::kUnknownStory:
    case ErrorCode::kUnknownSuggestion:
    case ErrorCode::kIndexOutOfRange:
      return 404;
    case ErrorCode::kNotReady:
    case ErrorCode::kAlreadyPublished:
      return 409;
    case ErrorCode::kBackendUnreachable:
    case ErrorCode::kBackendError:
      return 502;
    case ErrorCode::kInternal:
      return 500;
    case ErrorCode::kInfeasible:
    case ErrorCode::kNarratorTarget:
      return 422;
    default:
      return 400;
  }
}

std::pair<std::string, int> parse_bind_address(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "bind address must be host:port, got '" + text + "'");
  }
  int port = -1;
  try {
    std::size_t used = 0;
    port = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) port = -1;
  } catch (const std::exception&) {
    port = -1;
  }
  if (port < 0 || port > 65535) {
    throw Error(ErrorCode::kInvalidArgument, "bad port in '" + text + "'");
  }
  return {text.substr(0, colon), port};
}

}  // namespace storyloop::service
