// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// Uniform client over text and vision-language model services. Requests are
// identified by a content digest; the gateway deduplicates identical requests,
// consults a digest-keyed response cache, retries transient failures, and
// returns responses in request order.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "ladderkit/digest.hpp"
#include "ladderkit/error.hpp"
#include "ladderkit/jsonl.hpp"

namespace ladderkit {

struct ModelParams {
  // nullopt leaves the provider default in place (not sent on the wire).
  std::optional<double> temperature;
  std::optional<double> top_p;
  int max_tokens = 150;
  int n = 1;

  /// Sampling parameters for VLM calls (detailed and creative captions).
  static ModelParams vision() { return {0.7, 0.9, 150, 1}; }
  /// Association mining: provider defaults except max_tokens.
  static ModelParams text_association() { return {std::nullopt, std::nullopt, 1000, 1}; }

  bool operator==(const ModelParams&) const = default;
};

struct ModelRequest {
  std::string backend_id;
  std::optional<std::string> system;
  std::string prompt;
  std::optional<std::string> image_uri;
  ModelParams params = ModelParams::vision();
  // Sample index; distinguishes deliberate re-draws of an otherwise identical
  // request. Part of the digest, never sent to the backend.
  int variant = 0;
};

enum class FailureKind { kTransport, kRateLimited, kRejected, kReplayMiss, kUnknownBackend };

inline const char* to_string(FailureKind k) {
  switch (k) {
    case FailureKind::kTransport: return "transport";
    case FailureKind::kRateLimited: return "rate_limited";
    case FailureKind::kRejected: return "rejected";
    case FailureKind::kReplayMiss: return "replay_miss";
    case FailureKind::kUnknownBackend: return "unknown_backend";
  }
  return "unknown";
}

struct GatewayFailure {
  FailureKind kind = FailureKind::kTransport;
  std::string message;
};

struct ModelResponse {
  std::string text;
  std::string request_digest;
  bool cached = false;
  int attempts = 0;
  std::optional<GatewayFailure> error;

  bool ok() const { return !error.has_value(); }
};

/// What a backend returns for one attempt.
struct BackendResult {
  std::string text;
  std::optional<GatewayFailure> failure;

  static BackendResult success(std::string t) { return {std::move(t), std::nullopt}; }
  static BackendResult fail(FailureKind k, std::string msg) { return {{}, GatewayFailure{k, std::move(msg)}}; }
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendResult complete(const ModelRequest& request, const std::string& digest) = 0;
  /// Whether successful responses may be written to the response cache.
  virtual bool cacheable() const { return true; }
};

/// Backend driven by a callable; used for fixtures and tests.
class CallbackBackend final : public Backend {
 public:
  using Fn = std::function<BackendResult(const ModelRequest&, const std::string&)>;
  explicit CallbackBackend(Fn fn) : fn_(std::move(fn)) {}
  BackendResult complete(const ModelRequest& r, const std::string& d) override { return fn_(r, d); }

 private:
  Fn fn_;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Digest-keyed response cache, optionally backed by an append-only JSONL file
/// of {digest, text, timestamp}. Concurrent readers, serialized appends.
class ResponseCache {
 public:
  ResponseCache() = default;

  explicit ResponseCache(std::filesystem::path file) : file_(std::move(file)) {
    if (std::filesystem::exists(*file_)) {
      io::for_each_jsonl(*file_, [&](std::size_t line, const json& j) {
        if (!j.contains("digest") || !j.contains("text"))
          throw ParseError(file_->string(), line, 0, "cache entry needs digest and text");
        entries_.insert_or_assign(j["digest"].get<std::string>(), j["text"].get<std::string>());
      });
    } else if (file_->has_parent_path()) {
      std::filesystem::create_directories(file_->parent_path());
    }
  }

  std::optional<std::string> lookup(const std::string& digest) const {
    std::shared_lock lock(mu_);
    auto it = entries_.find(digest);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void store(const std::string& digest, const std::string& text) {
    std::unique_lock lock(mu_);
    if (!entries_.emplace(digest, text).second) return;
    if (!file_) return;
    std::ofstream out(*file_, std::ios::app | std::ios::binary);
    if (!out) throw DataError("cannot append to cache " + file_->string());
    out << json{{"digest", digest}, {"text", text}, {"timestamp", utc_timestamp()}}.dump() << '\n';
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return entries_.size();
  }

 private:
  std::optional<std::filesystem::path> file_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
};

struct BackoffPolicy {
  std::chrono::milliseconds initial{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max{30000};
};

struct SubmitPolicy {
  int max_in_flight = 8;
  int retries = 2;
  BackoffPolicy backoff;
};

/// Digest of the image content: file bytes when the URI is a readable local
/// file, else the URI string itself.
inline std::string image_digest(const std::string& uri) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(uri, ec)) return sha256_file(uri);
  return sha256_hex("uri:" + uri);
}

class Gateway {
 public:
  Gateway() : cache_(std::make_shared<ResponseCache>()) {}

  void register_backend(const std::string& id, std::shared_ptr<Backend> backend) {
    std::lock_guard lock(mu_);
    backends_[id] = std::move(backend);
  }

  void attach_cache(std::shared_ptr<ResponseCache> cache) { cache_ = std::move(cache); }
  const ResponseCache& cache() const { return *cache_; }

  /// Number of requests actually sent to a backend (including retries).
  std::size_t dispatch_count() const { return dispatches_.load(); }

  std::string digest(const ModelRequest& r) const {
    std::string img;
    if (r.image_uri) {
      std::lock_guard lock(mu_);
      auto it = image_digests_.find(*r.image_uri);
      if (it != image_digests_.end()) img = it->second;
    }
    if (r.image_uri && img.empty()) {
      img = image_digest(*r.image_uri);
      std::lock_guard lock(mu_);
      image_digests_.emplace(*r.image_uri, img);
    }
    json params = {{"max_tokens", r.params.max_tokens}, {"n", r.params.n}};
    params["temperature"] = r.params.temperature ? json(*r.params.temperature) : json(nullptr);
    params["top_p"] = r.params.top_p ? json(*r.params.top_p) : json(nullptr);
    json key = {{"backend", r.backend_id},
                {"system", r.system ? json(*r.system) : json(nullptr)},
                {"prompt", r.prompt},
                {"image", r.image_uri ? json(img) : json(nullptr)},
                {"params", params},
                {"variant", r.variant}};
    return sha256_hex(key.dump());
  }

  std::vector<ModelResponse> submit(const std::vector<ModelRequest>& requests, const SubmitPolicy& policy = {}) {
    const std::size_t n = requests.size();
    std::vector<ModelResponse> out(n);
    // For each slot: either resolved now, a duplicate of an earlier slot, an
    // in-flight future owned by another caller, or work for this call.
    std::vector<std::optional<std::size_t>> dup_of(n);
    std::vector<std::optional<std::shared_future<ModelResponse>>> waits(n);
    std::vector<std::size_t> work;
    std::map<std::string, std::size_t> first_in_batch;
    std::unordered_map<std::size_t, std::shared_ptr<std::promise<ModelResponse>>> promises;

    for (std::size_t i = 0; i < n; ++i) {
      out[i].request_digest = digest(requests[i]);
      const auto& d = out[i].request_digest;
      if (auto hit = cache_->lookup(d)) {
        out[i].text = *hit;
        out[i].cached = true;
        continue;
      }
      if (auto it = first_in_batch.find(d); it != first_in_batch.end()) {
        dup_of[i] = it->second;
        continue;
      }
      first_in_batch.emplace(d, i);
      std::lock_guard lock(mu_);
      if (auto it = in_flight_.find(d); it != in_flight_.end()) {
        waits[i] = it->second;
        continue;
      }
      auto p = std::make_shared<std::promise<ModelResponse>>();
      in_flight_.emplace(d, p->get_future().share());
      promises.emplace(i, std::move(p));
      work.push_back(i);
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t w = next++; w < work.size(); w = next++) {
        const std::size_t i = work[w];
        ModelResponse resp = dispatch(requests[i], out[i].request_digest, policy);
        out[i] = resp;
        promises.at(i)->set_value(resp);
        std::lock_guard lock(mu_);
        in_flight_.erase(resp.request_digest);
      }
    };
    const std::size_t threads = std::min<std::size_t>(std::max(policy.max_in_flight, 1), work.size());
    if (threads <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(threads);
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    for (std::size_t i = 0; i < n; ++i) {
      if (waits[i]) {
        out[i] = waits[i]->get();
        out[i].cached = out[i].ok();
      } else if (dup_of[i]) {
        out[i] = out[*dup_of[i]];
        out[i].cached = out[i].ok();
        out[i].attempts = 0;
      }
    }
    return out;
  }

 private:
  ModelResponse dispatch(const ModelRequest& req, const std::string& digest, const SubmitPolicy& policy) {
    ModelResponse resp;
    resp.request_digest = digest;
    std::shared_ptr<Backend> backend;
    {
      std::lock_guard lock(mu_);
      auto it = backends_.find(req.backend_id);
      if (it != backends_.end()) backend = it->second;
    }
    if (!backend) {
      resp.error = GatewayFailure{FailureKind::kUnknownBackend, "backend not registered: " + req.backend_id};
      return resp;
    }
    auto delay = policy.backoff.initial;
    for (int attempt = 0; attempt <= policy.retries; ++attempt) {
      ++resp.attempts;
      ++dispatches_;
      BackendResult r;
      try {
        r = backend->complete(req, digest);
      } catch (const std::exception& e) {
        r = BackendResult::fail(FailureKind::kTransport, e.what());
      }
      if (!r.failure) {
        resp.text = std::move(r.text);
        resp.error.reset();
        if (backend->cacheable()) cache_->store(digest, resp.text);
        return resp;
      }
      resp.error = r.failure;
      const auto kind = r.failure->kind;
      if (kind != FailureKind::kTransport && kind != FailureKind::kRateLimited) break;
      if (attempt == policy.retries) break;
      if (kind == FailureKind::kRateLimited) {
        std::this_thread::sleep_for(delay);
        delay = std::min(policy.backoff.max, std::chrono::milliseconds(static_cast<long long>(
                                                   static_cast<double>(delay.count()) * policy.backoff.multiplier)));
      } else {
        std::this_thread::sleep_for(policy.backoff.initial);
      }
    }
    return resp;
  }

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Backend>> backends_;
  std::shared_ptr<ResponseCache> cache_;
  std::unordered_map<std::string, std::shared_future<ModelResponse>> in_flight_;
  mutable std::unordered_map<std::string, std::string> image_digests_;
  std::atomic<std::size_t> dispatches_{0};
};

}  // namespace ladderkit
