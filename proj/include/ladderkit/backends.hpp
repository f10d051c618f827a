// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <filesystem>
#include <string>
#include <unordered_map>

#include "ladderkit/gateway.hpp"
#include "ladderkit/text.hpp"

namespace ladderkit {

/// Answers solely from a digest → text fixture file (same JSONL layout as the
/// response cache). A missing digest is a hard failure, never a network call.
class ReplayBackend final : public Backend {
 public:
  ReplayBackend() = default;
  explicit ReplayBackend(std::unordered_map<std::string, std::string> fixtures) : fixtures_(std::move(fixtures)) {}

  static std::shared_ptr<ReplayBackend> from_file(const std::filesystem::path& path) {
    std::unordered_map<std::string, std::string> fx;
    io::for_each_jsonl(path, [&](std::size_t line, const json& j) {
      if (!j.contains("digest") || !j.contains("text"))
        throw ParseError(path.string(), line, 0, "replay entry needs digest and text");
      fx.insert_or_assign(j["digest"].get<std::string>(), j["text"].get<std::string>());
    });
    return std::make_shared<ReplayBackend>(std::move(fx));
  }

  BackendResult complete(const ModelRequest&, const std::string& digest) override {
    auto it = fixtures_.find(digest);
    if (it == fixtures_.end()) return BackendResult::fail(FailureKind::kReplayMiss, "no replay entry for digest " + digest);
    return BackendResult::success(it->second);
  }

  bool cacheable() const override { return false; }
  std::size_t size() const { return fixtures_.size(); }

 private:
  std::unordered_map<std::string, std::string> fixtures_;
};

struct HttpBackendConfig {
  // Full chat-completions endpoint, e.g. https://api.openai.com/v1/chat/completions
  std::string url;
  std::string model;
  std::string api_key;
  int timeout_seconds = 120;
};

namespace detail {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw UsageError("endpoint URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

inline std::string guess_mime(const std::string& path) {
  auto ext = text::to_lower(std::filesystem::path(path).extension().string());
  if (ext == ".png") return "image/png";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  return "image/jpeg";
}

inline std::string base64_encode(std::string_view in) {
  static constexpr char kTable[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < in.size(); i += 3) {
    const unsigned v = (static_cast<unsigned char>(in[i]) << 16) | (static_cast<unsigned char>(in[i + 1]) << 8) |
                       static_cast<unsigned char>(in[i + 2]);
    out += kTable[(v >> 18) & 63];
    out += kTable[(v >> 12) & 63];
    out += kTable[(v >> 6) & 63];
    out += kTable[v & 63];
  }
  if (i < in.size()) {
    unsigned v = static_cast<unsigned char>(in[i]) << 16;
    if (i + 1 < in.size()) v |= static_cast<unsigned char>(in[i + 1]) << 8;
    out += kTable[(v >> 18) & 63];
    out += kTable[(v >> 12) & 63];
    out += i + 1 < in.size() ? kTable[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

}  // namespace detail

/// Chat-completions style HTTP/JSON adapter. Local images are inlined as
/// base64 data URLs; remote ones are passed by URL.
class HttpChatBackend final : public Backend {
 public:
  explicit HttpChatBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)), url_(detail::split_url(cfg_.url)) {}

  json build_body(const ModelRequest& r) const {
    json messages = json::array();
    if (r.system) messages.push_back({{"role", "system"}, {"content", *r.system}});
    if (r.image_uri) {
      std::string image_url = *r.image_uri;
      std::error_code ec;
      if (std::filesystem::is_regular_file(*r.image_uri, ec))
        image_url = "data:" + detail::guess_mime(*r.image_uri) + ";base64," +
                    detail::base64_encode(io::read_file(*r.image_uri));
      messages.push_back({{"role", "user"},
                          {"content", json::array({{{"type", "text"}, {"text", r.prompt}},
                                                   {{"type", "image_url"}, {"image_url", {{"url", image_url}}}}})}});
    } else {
      messages.push_back({{"role", "user"}, {"content", r.prompt}});
    }
    json body = {{"model", cfg_.model}, {"messages", messages}, {"max_tokens", r.params.max_tokens}, {"n", r.params.n}};
    if (r.params.temperature) body["temperature"] = *r.params.temperature;
    if (r.params.top_p) body["top_p"] = *r.params.top_p;
    return body;
  }

  BackendResult complete(const ModelRequest& r, const std::string&) override {
    httplib::Client cli(url_.origin);
    cli.set_connection_timeout(cfg_.timeout_seconds);
    cli.set_read_timeout(cfg_.timeout_seconds);
    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
    auto res = cli.Post(url_.path, headers, build_body(r).dump(), "application/json");
    if (!res) return BackendResult::fail(FailureKind::kTransport, "request failed: " + httplib::to_string(res.error()));
    if (res->status == 429) return BackendResult::fail(FailureKind::kRateLimited, "HTTP 429");
    if (res->status >= 500 || res->status == 408)
      return BackendResult::fail(FailureKind::kTransport, "HTTP " + std::to_string(res->status));
    if (res->status != 200)
      return BackendResult::fail(FailureKind::kRejected, "HTTP " + std::to_string(res->status) + ": " + res->body);
    try {
      const auto j = json::parse(res->body);
      const auto& content = j.at("choices").at(0).at("message").at("content");
      if (!content.is_string()) return BackendResult::fail(FailureKind::kTransport, "response content is not a string");
      return BackendResult::success(content.get<std::string>());
    } catch (const json::exception& e) {
      return BackendResult::fail(FailureKind::kTransport, std::string("malformed response: ") + e.what());
    }
  }

 private:
  HttpBackendConfig cfg_;
  detail::SplitUrl url_;
};

}  // namespace ladderkit
