// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// RunConfig: everything a run needs, fully JSON-serializable. Sources are
// layered as defaults < config file < environment < command-line flags.
// Credentials are referenced by environment-variable name, never stored.

#pragma once

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "ladderkit/backends.hpp"
#include "ladderkit/error.hpp"
#include "ladderkit/gateway.hpp"
#include "ladderkit/jsonl.hpp"

namespace ladderkit {

struct EndpointConfig {
  std::string id;
  std::string url;
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
};

struct RunConfig {
  std::string store;
  std::string backend = "replay";  // replay | http
  std::string replay_file;
  std::string cache_file;  // http only; default <store>/cache/responses.jsonl
  EndpointConfig vision{"vlm", "", "", "OPENAI_API_KEY"};
  EndpointConfig text{"llm", "", "", "OPENAI_API_KEY"};
  std::string lexicon;
  std::string pos_sidecar;
  double threshold = 3.0;
  int retries = 2;
  int max_in_flight = 8;
  int backoff_ms = 500;
  std::optional<std::uint64_t> seed;

  SubmitPolicy submit_policy() const {
    SubmitPolicy p;
    p.max_in_flight = max_in_flight;
    p.retries = retries;
    p.backoff.initial = std::chrono::milliseconds(backoff_ms);
    return p;
  }
};

inline json to_json(const EndpointConfig& e) {
  return {{"id", e.id}, {"url", e.url}, {"model", e.model}, {"api_key_env", e.api_key_env}};
}

inline json to_json(const RunConfig& c) {
  return {{"store", c.store},
          {"backend", c.backend},
          {"replay_file", c.replay_file},
          {"cache_file", c.cache_file},
          {"vision", to_json(c.vision)},
          {"text", to_json(c.text)},
          {"lexicon", c.lexicon},
          {"pos_sidecar", c.pos_sidecar},
          {"threshold", c.threshold},
          {"retries", c.retries},
          {"max_in_flight", c.max_in_flight},
          {"backoff_ms", c.backoff_ms},
          {"seed", c.seed ? json(*c.seed) : json(nullptr)}};
}

inline RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  try {
    auto endpoint = [](const json& e, EndpointConfig d) {
      d.id = e.value("id", d.id);
      d.url = e.value("url", d.url);
      d.model = e.value("model", d.model);
      d.api_key_env = e.value("api_key_env", d.api_key_env);
      return d;
    };
    c.store = j.value("store", c.store);
    c.backend = j.value("backend", c.backend);
    c.replay_file = j.value("replay_file", c.replay_file);
    c.cache_file = j.value("cache_file", c.cache_file);
    if (j.contains("vision")) c.vision = endpoint(j["vision"], c.vision);
    if (j.contains("text")) c.text = endpoint(j["text"], c.text);
    c.lexicon = j.value("lexicon", c.lexicon);
    c.pos_sidecar = j.value("pos_sidecar", c.pos_sidecar);
    c.threshold = j.value("threshold", c.threshold);
    c.retries = j.value("retries", c.retries);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
    if (j.contains("seed") && !j["seed"].is_null()) c.seed = j["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid configuration: ") + e.what());
  }
  if (c.backend != "replay" && c.backend != "http") throw UsageError("backend must be replay or http");
  return c;
}

/// Environment overrides as a JSON patch (LADDERKIT_STORE, LADDERKIT_BACKEND, ...).
inline json env_patch(const std::function<const char*(const char*)>& getenv_fn = [](const char* k) { return std::getenv(k); }) {
  json patch = json::object();
  auto str = [&](const char* var, const json::json_pointer& ptr) {
    if (const char* v = getenv_fn(var); v && *v) patch[ptr] = std::string(v);
  };
  auto num = [&](const char* var, const json::json_pointer& ptr, bool integral) {
    if (const char* v = getenv_fn(var); v && *v) {
      try {
        if (integral) patch[ptr] = std::stoll(v);
        else patch[ptr] = std::stod(v);
      } catch (const std::exception&) {
        throw UsageError(std::string(var) + " is not a number");
      }
    }
  };
  str("LADDERKIT_STORE", json::json_pointer("/store"));
  str("LADDERKIT_BACKEND", json::json_pointer("/backend"));
  str("LADDERKIT_REPLAY", json::json_pointer("/replay_file"));
  str("LADDERKIT_CACHE", json::json_pointer("/cache_file"));
  str("LADDERKIT_VLM_URL", json::json_pointer("/vision/url"));
  str("LADDERKIT_VLM_MODEL", json::json_pointer("/vision/model"));
  str("LADDERKIT_VLM_KEY_ENV", json::json_pointer("/vision/api_key_env"));
  str("LADDERKIT_LLM_URL", json::json_pointer("/text/url"));
  str("LADDERKIT_LLM_MODEL", json::json_pointer("/text/model"));
  str("LADDERKIT_LLM_KEY_ENV", json::json_pointer("/text/api_key_env"));
  str("LADDERKIT_LEXICON", json::json_pointer("/lexicon"));
  num("LADDERKIT_THRESHOLD", json::json_pointer("/threshold"), false);
  num("LADDERKIT_RETRIES", json::json_pointer("/retries"), true);
  num("LADDERKIT_MAX_IN_FLIGHT", json::json_pointer("/max_in_flight"), true);
  num("LADDERKIT_SEED", json::json_pointer("/seed"), true);
  return patch;
}

/// defaults ← file ← env ← flags
inline RunConfig resolve_config(const std::optional<std::filesystem::path>& file, const json& env, const json& flags) {
  json merged = to_json(RunConfig{});
  if (file) {
    try {
      merged.merge_patch(json::parse(io::read_file(*file)));
    } catch (const json::parse_error& e) {
      throw UsageError("config file " + file->string() + " is not valid JSON: " + e.what());
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
  }
  merged.merge_patch(env);
  merged.merge_patch(flags);
  return run_config_from_json(merged);
}

/// Registers backends for both roles (and attaches the response cache for http).
inline std::unique_ptr<Gateway> make_gateway(const RunConfig& cfg) {
  auto gw = std::make_unique<Gateway>();
  if (cfg.backend == "replay") {
    if (cfg.replay_file.empty()) throw UsageError("replay backend needs --replay <file>");
    auto replay = ReplayBackend::from_file(cfg.replay_file);
    gw->register_backend(cfg.vision.id, replay);
    gw->register_backend(cfg.text.id, replay);
    return gw;
  }
  auto http = [](const EndpointConfig& e) {
    if (e.url.empty() || e.model.empty()) throw UsageError("http backend '" + e.id + "' needs url and model");
    HttpBackendConfig h{e.url, e.model, "", 120};
    if (const char* key = std::getenv(e.api_key_env.c_str())) h.api_key = key;
    return std::make_shared<HttpChatBackend>(h);
  };
  gw->register_backend(cfg.vision.id, http(cfg.vision));
  gw->register_backend(cfg.text.id, http(cfg.text));
  std::filesystem::path cache = cfg.cache_file;
  if (cache.empty() && !cfg.store.empty()) cache = std::filesystem::path(cfg.store) / "cache" / "responses.jsonl";
  if (!cache.empty()) gw->attach_cache(std::make_shared<ResponseCache>(cache));
  return gw;
}

}  // namespace ladderkit
