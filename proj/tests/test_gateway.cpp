// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "ladderkit/backends.hpp"
#include "ladderkit/gateway.hpp"
#include "ladderkit/prompts.hpp"
#include "support/gen.hpp"
#include "support/temp_dir.hpp"

using namespace ladderkit;
using namespace std::chrono_literals;
using ladderkit::testing::Gen;
using ladderkit::testing::TempDir;

namespace {

std::string golden(const std::string& name) {
  return io::read_file(std::filesystem::path(LADDERKIT_TEST_DATA) / "golden" / name);
}

ModelRequest text_request(const std::string& prompt, const std::string& backend = "b") {
  ModelRequest r;
  r.backend_id = backend;
  r.prompt = prompt;
  return r;
}

SubmitPolicy fast_policy(int retries = 2, int in_flight = 8) {
  SubmitPolicy p;
  p.retries = retries;
  p.max_in_flight = in_flight;
  p.backoff.initial = 1ms;
  return p;
}

std::shared_ptr<CallbackBackend> echo_backend(std::atomic<int>* calls = nullptr) {
  return std::make_shared<CallbackBackend>([calls](const ModelRequest& r, const std::string&) {
    if (calls) ++*calls;
    return BackendResult::success("echo:" + r.prompt);
  });
}

}  // namespace

// ---- prompts ----

TEST(Prompts, DetailedCaptionVerbatim) {
  EXPECT_EQ(render_prompt(TemplateId::kDetailedCaption), "USER: <image> Please generate a detailed caption of this image. ASSISTANT:");
  EXPECT_EQ(render_prompt(TemplateId::kDetailedCaption), golden("detailed_caption.txt"));
}

TEST(Prompts, MiningMatchesGolden) {
  const auto out = render_prompt(TemplateId::kMineAssociations,
                                 {{"context_caption", "A surfer in a black wetsuit rides a tall green wave near the shore."},
                                  {"original_caption", "A man riding a wave on top of a surfboard."}});
  EXPECT_EQ(out, golden("mine_associations.txt"));
}

TEST(Prompts, MiningPlacesBindingsAndKeepsRubric) {
  const auto out = render_prompt(TemplateId::kMineAssociations, {{"context_caption", "X"}, {"original_caption", "Y"}});
  EXPECT_NE(out.find("context caption: X."), std::string::npos);
  EXPECT_NE(out.find("short caption Y, should"), std::string::npos);
  for (const char* s : {"Degree 1 \xE2\x80\x93 Near Synonyms", "Degree 2 \xE2\x80\x93 Slight Abstraction",
                        "Degree 3 \xE2\x80\x93 Broader Context", "Degree 4 \xE2\x80\x93 Conceptual Association",
                        "Degree 5 \xE2\x80\x93 Full Abstraction"})
    EXPECT_NE(out.find(s), std::string::npos) << s;
}

TEST(Prompts, CreativeCaptionMatchesGolden) {
  const auto out = render_prompt(TemplateId::kCreativeCaption,
                                 {{"all_words", "man, riding, wave, journey"}, {"level", "5"}, {"new_word", "journey"}});
  EXPECT_EQ(out, golden("creative_caption.txt"));
  EXPECT_NE(out.find("MUST include the word: journey"), std::string::npos);
}

TEST(Prompts, ErrorAnalysisMatchesGolden) {
  const auto out = render_prompt(TemplateId::kErrorAnalysis,
                                 {{"captions", "1. A sailboat glides on calm water. 2. Freedom on the water: A sailboat "
                                               "glides through vast expanse."}});
  EXPECT_EQ(out, golden("error_analysis.txt"));
}

TEST(Prompts, UnboundPlaceholderIsNamed) {
  try {
    render_prompt(TemplateId::kCreativeCaption, {{"all_words", "a"}, {"level", "1"}});
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("{new_word}"), std::string::npos);
  }
}

TEST(Prompts, SinglePassSubstitution) {
  // A binding value that looks like a placeholder is not expanded again.
  EXPECT_EQ(render_template("a {x} b", {{"x", "{y}"}, {"unused", "z"}}), "a {y} b");
  EXPECT_EQ(template_placeholders(prompts::kCreativeCaption), (std::vector<std::string>{"all_words", "level", "new_word"}));
  EXPECT_EQ(template_placeholders(prompts::kMineAssociations), (std::vector<std::string>{"context_caption", "original_caption"}));
}

TEST(Prompts, TemplateIds) {
  for (auto id : {TemplateId::kDetailedCaption, TemplateId::kMineAssociations, TemplateId::kCreativeCaption, TemplateId::kErrorAnalysis})
    EXPECT_EQ(parse_template_id(to_string(id)), id);
  EXPECT_FALSE(parse_template_id("nope"));
}

// ---- params and digests ----

TEST(Gateway, ParamDefaults) {
  EXPECT_EQ(ModelParams::vision(), (ModelParams{0.7, 0.9, 150, 1}));
  const auto t = ModelParams::text_association();
  EXPECT_EQ(t.max_tokens, 1000);
  EXPECT_EQ(t.n, 1);
  EXPECT_FALSE(t.temperature);
  EXPECT_FALSE(t.top_p);
}

TEST(Gateway, DigestIsStableAndFieldSensitive) {
  Gateway gw;
  ModelRequest base = text_request("hello");
  base.image_uri = "https://x.example/1.jpg";
  const auto d = gw.digest(base);
  EXPECT_EQ(d, Gateway().digest(base));
  EXPECT_EQ(d.size(), 64u);
  auto changed = [&](auto mutate) {
    ModelRequest r = base;
    mutate(r);
    return gw.digest(r) != d;
  };
  EXPECT_TRUE(changed([](ModelRequest& r) { r.backend_id = "c"; }));
  EXPECT_TRUE(changed([](ModelRequest& r) { r.prompt += " "; }));
  EXPECT_TRUE(changed([](ModelRequest& r) { r.system = ""; }));
  EXPECT_TRUE(changed([](ModelRequest& r) { r.image_uri = "https://x.example/2.jpg"; }));
  EXPECT_TRUE(changed([](ModelRequest& r) { r.image_uri.reset(); }));
  EXPECT_TRUE(changed([](ModelRequest& r) { r.params.temperature = 0.8; }));
  EXPECT_TRUE(changed([](ModelRequest& r) { r.params.max_tokens = 151; }));
  EXPECT_TRUE(changed([](ModelRequest& r) { r.variant = 1; }));
}

TEST(Gateway, LocalImagesAreKeyedByContent) {
  TempDir dir;
  std::ofstream(dir / "a.jpg") << "pixels";
  std::ofstream(dir / "b.jpg") << "pixels";
  std::ofstream(dir / "c.jpg") << "other";
  ModelRequest r = text_request("p");
  auto digest_for = [&](const std::filesystem::path& p) {
    r.image_uri = p.string();
    return Gateway().digest(r);
  };
  EXPECT_EQ(digest_for(dir / "a.jpg"), digest_for(dir / "b.jpg"));
  EXPECT_NE(digest_for(dir / "a.jpg"), digest_for(dir / "c.jpg"));
  EXPECT_EQ(image_digest((dir / "a.jpg").string()), sha256_hex("pixels"));
}

// ---- submit ----

TEST(Gateway, DuplicateInBatchIsCached) {
  std::atomic<int> calls{0};
  Gateway gw;
  gw.register_backend("b", echo_backend(&calls));
  auto res = gw.submit({text_request("x"), text_request("x")}, fast_policy());
  ASSERT_EQ(res.size(), 2u);
  EXPECT_FALSE(res[0].cached);
  EXPECT_TRUE(res[1].cached);
  EXPECT_EQ(res[1].text, "echo:x");
  EXPECT_EQ(calls.load(), 1);
  // Later batches hit the cache.
  auto again = gw.submit({text_request("x")}, fast_policy());
  EXPECT_TRUE(again[0].cached);
  EXPECT_EQ(calls.load(), 1);
}

TEST(Gateway, ReplayReturnsFixtureAndMissIsHard) {
  Gateway gw;
  const auto hit = text_request("known");
  auto replay = std::make_shared<ReplayBackend>(std::unordered_map<std::string, std::string>{{gw.digest(hit), "fixture text"}});
  gw.register_backend("b", replay);
  auto res = gw.submit({hit, text_request("unknown")}, fast_policy());
  EXPECT_EQ(res[0].text, "fixture text");
  EXPECT_TRUE(res[0].ok());
  ASSERT_FALSE(res[1].ok());
  EXPECT_EQ(res[1].error->kind, FailureKind::kReplayMiss);
  EXPECT_NE(res[1].error->message.find(res[1].request_digest), std::string::npos);
  EXPECT_EQ(res[1].attempts, 1);  // never retried
  EXPECT_EQ(gw.cache().size(), 0u);
}

TEST(Gateway, ReplayFromFile) {
  TempDir dir;
  Gateway gw;
  std::ofstream(dir / "r.jsonl") << json{{"digest", gw.digest(text_request("q"))}, {"text", "A"}}.dump() << "\n";
  gw.register_backend("b", ReplayBackend::from_file(dir / "r.jsonl"));
  EXPECT_EQ(gw.submit({text_request("q")})[0].text, "A");
  std::ofstream(dir / "bad.jsonl") << "{\"text\":\"x\"}\n";
  EXPECT_THROW(ReplayBackend::from_file(dir / "bad.jsonl"), ParseError);
}

TEST(Gateway, FailureAfterRetriesIsIsolated) {
  std::atomic<int> bad_calls{0};
  Gateway gw;
  gw.register_backend("b", std::make_shared<CallbackBackend>([&](const ModelRequest& r, const std::string&) {
    if (r.prompt == "bad") {
      ++bad_calls;
      return BackendResult::fail(FailureKind::kTransport, "boom");
    }
    return BackendResult::success("ok:" + r.prompt);
  }));
  auto res = gw.submit({text_request("a"), text_request("bad"), text_request("c")}, fast_policy(2));
  EXPECT_EQ(res[0].text, "ok:a");
  EXPECT_EQ(res[2].text, "ok:c");
  ASSERT_FALSE(res[1].ok());
  EXPECT_EQ(res[1].error->kind, FailureKind::kTransport);
  EXPECT_EQ(res[1].attempts, 3);
  EXPECT_EQ(bad_calls.load(), 3);
  // Failures are not cached; a new submit tries again.
  gw.submit({text_request("bad")}, fast_policy(0));
  EXPECT_EQ(bad_calls.load(), 4);
}

TEST(Gateway, TransientFailureRecovers) {
  std::atomic<int> calls{0};
  Gateway gw;
  gw.register_backend("b", std::make_shared<CallbackBackend>([&](const ModelRequest&, const std::string&) {
    if (calls++ < 2) throw std::runtime_error("connection reset");
    return BackendResult::success("fine");
  }));
  auto res = gw.submit({text_request("a")}, fast_policy(2));
  EXPECT_TRUE(res[0].ok());
  EXPECT_EQ(res[0].attempts, 3);
}

TEST(Gateway, RateLimitBacksOffExponentially) {
  std::vector<std::chrono::steady_clock::time_point> at;
  Gateway gw;
  gw.register_backend("b", std::make_shared<CallbackBackend>([&](const ModelRequest&, const std::string&) {
    at.push_back(std::chrono::steady_clock::now());
    return at.size() < 4 ? BackendResult::fail(FailureKind::kRateLimited, "429") : BackendResult::success("ok");
  }));
  SubmitPolicy p = fast_policy(3, 1);
  p.backoff.initial = 20ms;
  auto res = gw.submit({text_request("a")}, p);
  ASSERT_TRUE(res[0].ok());
  ASSERT_EQ(at.size(), 4u);
  EXPECT_GE(at[1] - at[0], 20ms);
  EXPECT_GE(at[2] - at[1], 40ms);
  EXPECT_GE(at[3] - at[2], 80ms);
}

TEST(Gateway, RejectionIsNotRetried) {
  std::atomic<int> calls{0};
  Gateway gw;
  gw.register_backend("b", std::make_shared<CallbackBackend>([&](const ModelRequest&, const std::string&) {
    ++calls;
    return BackendResult::fail(FailureKind::kRejected, "HTTP 400");
  }));
  auto res = gw.submit({text_request("a")}, fast_policy(5));
  EXPECT_EQ(calls.load(), 1);
  EXPECT_EQ(res[0].error->kind, FailureKind::kRejected);
}

TEST(Gateway, UnknownBackendIsAnErrorRecord) {
  Gateway gw;
  auto res = gw.submit({text_request("a", "nope")});
  ASSERT_FALSE(res[0].ok());
  EXPECT_EQ(res[0].error->kind, FailureKind::kUnknownBackend);
}

TEST(Gateway, OrderPreservedAndConcurrencyBounded) {
  std::atomic<int> live{0}, peak{0};
  Gateway gw;
  gw.register_backend("b", std::make_shared<CallbackBackend>([&](const ModelRequest& r, const std::string&) {
    const int now = ++live;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(1 + (std::stoi(r.prompt) * 7) % 5));
    --live;
    return BackendResult::success("r" + r.prompt);
  }));
  std::vector<ModelRequest> reqs;
  for (int i = 0; i < 40; ++i) reqs.push_back(text_request(std::to_string(i)));
  auto res = gw.submit(reqs, fast_policy(0, 4));
  for (int i = 0; i < 40; ++i) EXPECT_EQ(res[static_cast<std::size_t>(i)].text, "r" + std::to_string(i));
  EXPECT_LE(peak.load(), 4);
  EXPECT_EQ(gw.dispatch_count(), 40u);
}

TEST(Gateway, ConcurrentCallersShareOneDispatch) {
  std::atomic<int> calls{0};
  Gateway gw;
  gw.register_backend("b", std::make_shared<CallbackBackend>([&](const ModelRequest&, const std::string&) {
    ++calls;
    std::this_thread::sleep_for(50ms);
    return BackendResult::success("slow");
  }));
  std::vector<ModelResponse> a, b;
  {
    std::jthread t1([&] { a = gw.submit({text_request("same")}); });
    std::jthread t2([&] { b = gw.submit({text_request("same")}); });
  }
  EXPECT_EQ(calls.load(), 1);
  EXPECT_EQ(a[0].text, "slow");
  EXPECT_EQ(b[0].text, "slow");
  EXPECT_NE(a[0].cached, b[0].cached);
}

TEST(ResponseCache, PersistsAcrossGateways) {
  TempDir dir;
  std::atomic<int> calls{0};
  {
    Gateway gw;
    gw.attach_cache(std::make_shared<ResponseCache>(dir / "cache" / "responses.jsonl"));
    gw.register_backend("b", echo_backend(&calls));
    gw.submit({text_request("p1"), text_request("p2")});
  }
  const auto lines = io::read_jsonl(dir / "cache" / "responses.jsonl");
  ASSERT_EQ(lines.size(), 2u);
  for (const auto& l : lines) {
    EXPECT_TRUE(l.contains("digest"));
    EXPECT_TRUE(l.contains("text"));
    EXPECT_TRUE(l["timestamp"].get<std::string>().ends_with("Z"));
  }
  Gateway gw;
  gw.attach_cache(std::make_shared<ResponseCache>(dir / "cache" / "responses.jsonl"));
  gw.register_backend("b", echo_backend(&calls));
  auto res = gw.submit({text_request("p2"), text_request("p3")});
  EXPECT_TRUE(res[0].cached);
  EXPECT_EQ(res[0].text, "echo:p2");
  EXPECT_FALSE(res[1].cached);
  EXPECT_EQ(calls.load(), 3);
  EXPECT_EQ(io::read_jsonl(dir / "cache" / "responses.jsonl").size(), 3u);
}

TEST(ResponseCache, ConcurrentStores) {
  TempDir dir;
  ResponseCache cache(dir / "c.jsonl");
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 4; ++t)
      threads.emplace_back([&, t] {
        for (int i = 0; i < 50; ++i) {
          cache.store("d" + std::to_string(i % 60 + t * 13), "v");
          cache.lookup("d1");
        }
      });
  }
  EXPECT_EQ(io::read_jsonl(dir / "c.jsonl").size(), cache.size());
}

// ---- HTTP adapter ----

class HttpBackendTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      bodies_.push_back(json::parse(req.body));
      auth_ = req.get_header_value("Authorization");
      if (status_ != 200) {
        res.status = status_;
        res.set_content("{\"error\":\"x\"}", "application/json");
        return;
      }
      res.set_content(json{{"choices", {{{"message", {{"role", "assistant"}, {"content", "a caption"}}}}}}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  HttpChatBackend backend() {
    return HttpChatBackend({"http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions", "test-model", "sk-test", 5});
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::vector<json> bodies_;
  std::string auth_;
  int status_ = 200;
};

TEST_F(HttpBackendTest, SendsChatCompletionBody) {
  TempDir dir;
  std::ofstream(dir / "img.png", std::ios::binary) << "PNGDATA";
  ModelRequest r = text_request("describe");
  r.image_uri = (dir / "img.png").string();
  auto b = backend();
  auto res = b.complete(r, "d");
  ASSERT_FALSE(res.failure);
  EXPECT_EQ(res.text, "a caption");
  ASSERT_EQ(bodies_.size(), 1u);
  const auto& body = bodies_[0];
  EXPECT_EQ(auth_, "Bearer sk-test");
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["temperature"], 0.7);
  EXPECT_EQ(body["top_p"], 0.9);
  EXPECT_EQ(body["max_tokens"], 150);
  EXPECT_EQ(body["n"], 1);
  const auto& content = body["messages"][0]["content"];
  EXPECT_EQ(content[0]["text"], "describe");
  EXPECT_EQ(content[1]["image_url"]["url"], "data:image/png;base64,UE5HREFUQQ==");
  EXPECT_FALSE(body.contains("variant"));
}

TEST_F(HttpBackendTest, TextCallsOmitUnsetSampling) {
  ModelRequest r = text_request("[\"ball\"]");
  r.system = "sys";
  r.params = ModelParams::text_association();
  auto b = backend();
  ASSERT_FALSE(b.complete(r, "d").failure);
  const auto& body = bodies_[0];
  EXPECT_FALSE(body.contains("temperature"));
  EXPECT_FALSE(body.contains("top_p"));
  EXPECT_EQ(body["max_tokens"], 1000);
  EXPECT_EQ(body["messages"][0], (json{{"role", "system"}, {"content", "sys"}}));
  EXPECT_EQ(body["messages"][1], (json{{"role", "user"}, {"content", "[\"ball\"]"}}));
}

TEST_F(HttpBackendTest, StatusCodesMapToFailureKinds) {
  auto b = backend();
  const std::vector<std::pair<int, FailureKind>> cases = {
      {429, FailureKind::kRateLimited}, {503, FailureKind::kTransport}, {400, FailureKind::kRejected}};
  for (const auto& [status, kind] : cases) {
    status_ = status;
    auto res = b.complete(text_request("x"), "d");
    ASSERT_TRUE(res.failure) << status;
    EXPECT_EQ(res.failure->kind, kind) << status;
  }
}

TEST(HttpBackend, UnreachableIsTransport) {
  HttpChatBackend b({"http://127.0.0.1:1/v1/chat/completions", "m", "", 1});
  auto res = b.complete(text_request("x"), "d");
  ASSERT_TRUE(res.failure);
  EXPECT_EQ(res.failure->kind, FailureKind::kTransport);
  EXPECT_THROW(HttpChatBackend({"no-scheme", "m", "", 1}), UsageError);
}

TEST(HttpBackend, Base64Vectors) {
  EXPECT_EQ(detail::base64_encode(""), "");
  EXPECT_EQ(detail::base64_encode("f"), "Zg==");
  EXPECT_EQ(detail::base64_encode("fo"), "Zm8=");
  EXPECT_EQ(detail::base64_encode("foo"), "Zm9v");
  EXPECT_EQ(detail::base64_encode("foobar"), "Zm9vYmFy");
}
