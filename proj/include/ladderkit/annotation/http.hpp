// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// HTTP/JSON front of the annotation service:
//   GET  /api/task?type=grounding|ranking[&annotator=TOKEN]
//   POST /api/annotation   {annotator?, task_id, rating | ranking}
//   GET  /api/progress
//   /    static UI bundle, when a directory is configured
// Annotators are identified by an opaque token issued on first visit and
// echoed back in the "annotator" field and an "annotator" cookie.

#pragma once

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <filesystem>
#include <optional>
#include <string>

#include "ladderkit/annotation/service.hpp"

namespace ladderkit::annotation {

namespace detail {

inline std::string cookie_token(const httplib::Request& req) {
  const auto cookie = req.get_header_value("Cookie");
  const std::string key = "annotator=";
  auto pos = cookie.find(key);
  if (pos == std::string::npos) return {};
  auto end = cookie.find(';', pos);
  return cookie.substr(pos + key.size(), end == std::string::npos ? std::string::npos : end - pos - key.size());
}

inline void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace detail

inline void install_routes(httplib::Server& server, AnnotationService& service,
                           const std::optional<std::filesystem::path>& ui_dir = std::nullopt) {
  server.Get("/api/task", [&service](const httplib::Request& req, httplib::Response& res) {
    auto type = eval::parse_task_type(req.get_param_value("type"));
    if (!type) return detail::reply(res, 400, {{"error", "type must be grounding or ranking"}});
    std::string token = req.get_param_value("annotator");
    if (token.empty()) token = detail::cookie_token(req);
    if (token.empty()) token = AnnotationService::issue_token();
    res.set_header("Set-Cookie", "annotator=" + token + "; Path=/; SameSite=Strict");
    auto task = service.next_task(token, *type);
    if (!task) return detail::reply(res, 200, {{"annotator", token}, {"done", true}});
    detail::reply(res, 200, {{"annotator", token}, {"done", false}, {"task", wire_payload(*task)}});
  });

  server.Post("/api/annotation", [&service](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error&) {
      return detail::reply(res, 400, {{"error", "body is not JSON"}});
    }
    if (!body.is_object() || !body.contains("task_id") || !body["task_id"].is_string())
      return detail::reply(res, 400, {{"error", "task_id is required"}});
    std::string token = body.value("annotator", std::string());
    if (token.empty()) token = detail::cookie_token(req);
    if (token.empty()) return detail::reply(res, 400, {{"error", "annotator token is required"}});
    try {
      service.submit_annotation(token, body["task_id"].get<std::string>(), body);
      detail::reply(res, 200, {{"status", "stored"}});
    } catch (const NotFoundError& e) {
      detail::reply(res, 404, {{"error", e.what()}});
    } catch (const InvalidSubmissionError& e) {
      detail::reply(res, 422, {{"error", e.what()}});
    } catch (const ConflictError& e) {
      detail::reply(res, 409, {{"error", e.what()}});
    }
  });

  server.Get("/api/progress", [&service](const httplib::Request&, httplib::Response& res) {
    detail::reply(res, 200, progress_json(service.progress()));
  });

  if (ui_dir && std::filesystem::is_directory(*ui_dir)) server.set_mount_point("/", ui_dir->string());
}

}  // namespace ladderkit::annotation
