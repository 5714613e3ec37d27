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

#include "storyloop/error.hpp"
#include "storyloop/service.hpp"

// After the Eigen-based headers: resolv.h, pulled in here, defines _res.
#include "httplib.h"

namespace storyloop::service {
namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& msg) {
  send_json(res,
            {{"error", std::string(error_code_name(code))}, {"message", msg}},
            http_status(code));
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("request body: ") + e.what());
  }
}

std::string required_string(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || !body[key].is_string()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("field '") + key + "' must be a string");
  }
  return body[key].get<std::string>();
}

std::size_t required_index(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_number_integer() ||
      body[key].get<std::int64_t>() < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("field '") + key + "' must be a non-negative integer");
  }
  return body[key].get<std::size_t>();
}

std::optional<std::string> optional_param(const httplib::Request& req,
                                          const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

}  // namespace

struct HttpServer::Impl {
  explicit Impl(Service& s) : service(s) {}
  Service& service;
  httplib::Server server;
};

HttpServer::HttpServer(Service& service)
    : impl_(std::make_unique<Impl>(service)) {
  httplib::Server& srv = impl_->server;
  Service& svc = service;

  auto guarded = [](auto fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, e.code(), e.what());
      } catch (const json::exception& e) {
        send_error(res, ErrorCode::kInvalidArgument, e.what());
      } catch (const std::exception& e) {
        send_error(res, ErrorCode::kInternal, e.what());
      }
    };
  };

  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });

  srv.Post("/models/register", guarded([&svc](const auto& req, auto& res) {
    const json body = parse_body(req);
    const std::string name = required_string(body, "name");
    svc.register_model(name, required_string(body, "address"));
    send_json(res, {{"name", name}, {"status", "READY"}});
  }));
  srv.Post("/models/shutdown", guarded([&svc](const auto& req, auto& res) {
    const json body = parse_body(req);
    const std::string name = required_string(body, "name");
    svc.shutdown_model(name);
    send_json(res, {{"name", name}, {"status", "DOWN"}});
  }));
  srv.Get("/models", guarded([&svc](const auto&, auto& res) {
    send_json(res, svc.models());
  }));

  srv.Post("/stories", guarded([&svc](const auto& req, auto& res) {
    const dataset::Story story = dataset::load_story(parse_body(req));
    svc.put_story(story);
    send_json(res, {{"id", story.id}});
  }));
  srv.Get("/stories", guarded([&svc](const auto&, auto& res) {
    send_json(res, svc.story_ids());
  }));

  srv.Post("/suggest", guarded([&svc](const auto& req, auto& res) {
    const json body = parse_body(req);
    Coordinates where;
    where.story_id = required_string(body, "story_id");
    where.scene = required_index(body, "scene");
    where.entry = required_index(body, "entry");
    const GenerationConfig config =
        GenerationConfig::from_json(body.value("config", json()));
    send_json(res, to_json(svc.suggest(where, required_string(body, "model"),
                                       config)));
  }));
  srv.Post("/publish", guarded([&svc](const auto& req, auto& res) {
    const json body = parse_body(req);
    const std::string id = required_string(body, "suggestion_id");
    const std::string text = required_string(body, "final_text");
    if (!body.contains("ratings")) {
      throw Error(ErrorCode::kInvalidArgument, "field 'ratings' is missing");
    }
    const Ratings ratings = Ratings::from_json(body["ratings"]);
    std::optional<std::string> comment;
    if (body.contains("comment") && !body["comment"].is_null()) {
      comment = required_string(body, "comment");
    }
    send_json(res, to_json(svc.publish(id, text, ratings, comment)));
  }));

  srv.Get("/dashboard", guarded([&svc](const auto& req, auto& res) {
    DashboardFilter filter;
    filter.model = optional_param(req, "model");
    filter.story_id = optional_param(req, "story");
    filter.sort_by = optional_param(req, "sort");
    const auto order = optional_param(req, "order");
    if (order && *order != "asc" && *order != "desc") {
      throw Error(ErrorCode::kInvalidArgument, "order must be asc or desc");
    }
    filter.descending = order && *order == "desc";
    send_json(res, svc.dashboard(filter));
  }));
  srv.Get(R"(/records/([^/]+))", guarded([&svc](const auto& req, auto& res) {
    send_json(res, svc.record(req.matches[1]));
  }));
  srv.Get(R"(/diff/([^/]+))", guarded([&svc](const auto& req, auto& res) {
    send_json(res, svc.diff(req.matches[1], optional_param(req, "edited")));
  }));
  srv.Post(R"(/diff/([^/]+))", guarded([&svc](const auto& req, auto& res) {
    const json body = parse_body(req);
    send_json(res, svc.diff(req.matches[1], required_string(body, "edited")));
  }));
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kInvalidArgument, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace storyloop::service
