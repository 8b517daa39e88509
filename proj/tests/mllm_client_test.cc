/* Copyright 2026 The semcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "semcast/mllm_client.h"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <gtest/gtest.h>

#include "semcast/common.h"
#include "semcast/mock_oracle.h"
#include "test_util.h"

// Loopback server for the HTTP backend; must follow the Eigen-using headers.
#include <httplib.h>

namespace semcast {
namespace {

using testing::ReadFile;
using testing::TempDir;
using testing::ToyScenarios;

// Scripted replies; records every payload it sees.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::vector<BackendReply> script, bool throw_first = false)
      : script_(std::move(script)), throw_first_(throw_first) {}
  ExchangeSource source() const override { return ExchangeSource::kLive; }
  BackendReply Send(const PromptPayload& payload, const Scenario*) override {
    std::lock_guard lock(mu_);
    if (throw_first_ && calls_++ == 0) throw TransportError("connection reset");
    if (!throw_first_) ++calls_;
    seen_.push_back(payload.scenario_id);
    if (script_.empty()) return {200, "echo:" + payload.scenario_id};
    return script_[std::min(seen_.size() - 1, script_.size() - 1)];
  }
  int calls() const { return calls_; }

 private:
  std::vector<BackendReply> script_;
  bool throw_first_;
  std::mutex mu_;
  std::atomic<int> calls_{0};
  std::vector<std::string> seen_;
};

struct SleepLog {
  std::vector<int64_t> ms;
  ClientConfig Config(int attempts = 5) {
    ClientConfig c;
    c.max_attempts = attempts;
    c.backoff_base_ms = 500;
    c.backoff_cap_ms = 1500;
    c.sleep = [this](std::chrono::milliseconds d) { ms.push_back(d.count()); };
    return c;
  }
};

PromptPayload Payload(const std::string& id, int step = 10) {
  PromptPayload p;
  p.scenario_id = id;
  p.kind = PromptKind::kSc;
  p.step = step;
  p.text = "Now we have an image of this scene:<img>";
  p.image_slots.push_back({"synthetic://" + id + "/FRONT/" + std::to_string(step), "scene", "",
                           step, Camera::kFront, ""});
  return p;
}

TEST(ExchangeKeyTest, DistinguishesEveryComponent) {
  const PromptPayload base = Payload("s1");
  const std::string k = ExchangeKey(base);
  EXPECT_EQ(k.size(), 64u);
  EXPECT_EQ(k, ExchangeKey(Payload("s1")));
  EXPECT_NE(k, ExchangeKey(Payload("s2")));
  EXPECT_NE(k, ExchangeKey(Payload("s1", 9)));  // same text, different frame
  PromptPayload other = base;
  other.kind = PromptKind::kVsaVehicle;
  EXPECT_NE(k, ExchangeKey(other));
  other = base;
  other.text += " ";
  EXPECT_NE(k, ExchangeKey(other));
}

std::string Key(char c) { return std::string(64, c); }

TEST(ExchangeSerializationTest, RoundTrip) {
  MllmExchange e{Key('a'), "s1", PromptKind::kVsaPedestrian, 8, "text\nwith | pipes",
                 ExchangeSource::kLive, 12.5, "2026-01-01T00:00:00Z", 2};
  EXPECT_EQ(DeserializeExchange(SerializeExchange(e)), e);
  EXPECT_THROW(DeserializeExchange("{\"key\": 1}", 4), ParseError);
}

TEST(ResponseCacheTest, PersistsAndSkipsCorruptLines) {
  TempDir dir;
  const auto path = dir / "cache.jsonl";
  {
    ResponseCache cache(path);
    cache.Append({Key('1'), "s1", PromptKind::kSc, 1, "a", ExchangeSource::kMock, 0, "", 1});
    cache.Append({Key('2'), "s2", PromptKind::kSc, 1, "b", ExchangeSource::kMock, 0, "", 1});
  }
  {
    std::ofstream f(path, std::ios::app);
    f << "{not json\n";
  }
  ResponseCache reopened(path);
  EXPECT_EQ(reopened.size(), 2u);
  EXPECT_EQ(reopened.corrupt_lines(), 1);
  EXPECT_EQ(reopened.Lookup(Key('2'))->raw_response, "b");
  EXPECT_FALSE(reopened.Lookup(Key('3')).has_value());
}

TEST(MllmClientTest, CacheHitSkipsBackend) {
  TempDir dir;
  auto backend = std::make_unique<ScriptedBackend>(std::vector<BackendReply>{});
  ScriptedBackend* raw = backend.get();
  SleepLog sleeps;
  MllmClient client(sleeps.Config(), std::move(backend),
                    std::make_unique<ResponseCache>(dir / "c.jsonl"));
  const MllmExchange first = client.Query(Payload("s1"));
  EXPECT_EQ(first.source, ExchangeSource::kLive);
  EXPECT_FALSE(first.created_at.empty());
  const MllmExchange second = client.Query(Payload("s1"));
  EXPECT_EQ(second.source, ExchangeSource::kCache);
  EXPECT_EQ(second.raw_response, first.raw_response);
  EXPECT_EQ(raw->calls(), 1);
}

TEST(MllmClientTest, RetriesTransientFailuresWithCappedBackoff) {
  auto backend = std::make_unique<ScriptedBackend>(
      std::vector<BackendReply>{{429, ""}, {503, ""}, {500, ""}, {200, "ok"}}, true);
  ScriptedBackend* raw = backend.get();
  SleepLog sleeps;
  MllmClient client(sleeps.Config(6), std::move(backend), nullptr);
  const MllmExchange e = client.Query(Payload("s1"));
  EXPECT_EQ(e.raw_response, "ok");
  EXPECT_EQ(e.attempts, 5);
  EXPECT_EQ(raw->calls(), 5);
  EXPECT_EQ(sleeps.ms, (std::vector<int64_t>{500, 1000, 1500, 1500}));
}

TEST(MllmClientTest, NonRetryableStatusFailsImmediately) {
  auto backend = std::make_unique<ScriptedBackend>(std::vector<BackendReply>{{400, "bad"}});
  ScriptedBackend* raw = backend.get();
  SleepLog sleeps;
  MllmClient client(sleeps.Config(), std::move(backend), nullptr);
  try {
    client.Query(Payload("s1"));
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("HTTP 400"), std::string::npos);
  }
  EXPECT_EQ(raw->calls(), 1);
}

TEST(MllmClientTest, ExhaustedRetriesCarryAttemptLog) {
  auto backend = std::make_unique<ScriptedBackend>(std::vector<BackendReply>{{503, ""}});
  SleepLog sleeps;
  MllmClient client(sleeps.Config(3), std::move(backend), nullptr);
  try {
    client.Query(Payload("s1"));
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("attempt 1"), std::string::npos);
    EXPECT_NE(what.find("attempt 3"), std::string::npos);
  }
}

TEST(MllmClientTest, CacheOnlyMissFailsWithoutRetry) {
  TempDir dir;
  SleepLog sleeps;
  MllmClient client(sleeps.Config(), std::make_unique<CacheOnlyBackend>(),
                    std::make_unique<ResponseCache>(dir / "c.jsonl"));
  EXPECT_THROW(client.Query(Payload("s1")), TransportError);
  EXPECT_TRUE(sleeps.ms.empty());
}

TEST(MllmClientTest, QueryManyKeepsInputOrderAndReproducibleCache) {
  const auto scenarios = ToyScenarios(8);
  std::vector<PromptPayload> payloads;
  std::vector<const Scenario*> owners;
  for (const Scenario& s : scenarios) {
    payloads.push_back(BuildScPrompt(s));
    owners.push_back(&s);
  }
  std::vector<QueryItem> items;
  for (size_t i = 0; i < payloads.size(); ++i) items.push_back({&payloads[i], owners[i]});
  items.push_back(items.front());  // duplicate prompt
  TempDir dir;
  std::string first_bytes;
  for (int concurrency : {1, 4}) {
    const auto path = dir / ("c" + std::to_string(concurrency) + ".jsonl");
    ClientConfig cfg;
    cfg.max_concurrency = concurrency;
    MllmClient client(cfg, std::make_unique<MockBackend>(FaultProfile{}),
                      std::make_unique<ResponseCache>(path));
    const auto out = client.QueryMany(items);
    ASSERT_EQ(out.size(), items.size());
    for (size_t i = 0; i < payloads.size(); ++i) {
      EXPECT_EQ(out[i].scenario_id, payloads[i].scenario_id);
      EXPECT_EQ(out[i].key, ExchangeKey(payloads[i]));
    }
    EXPECT_EQ(out.back().raw_response, out.front().raw_response);
    const std::string bytes = ReadFile(path);
    if (first_bytes.empty()) {
      first_bytes = bytes;
    } else {
      EXPECT_EQ(bytes, first_bytes);
    }
  }
}

TEST(TokenBucketTest, SpacesRequestsAfterBurst) {
  TokenBucket bucket(10.0, 1.0);
  EXPECT_EQ(bucket.Reserve().count(), 0);
  const auto wait = bucket.Reserve().count();
  EXPECT_GT(wait, 50);
  EXPECT_LE(wait, 100);
}

TEST(ConcurrencyLimiterTest, BoundsParallelism) {
  ConcurrencyLimiter limiter(2);
  std::atomic<int> active{0}, peak{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&] {
      limiter.Acquire();
      const int now = ++active;
      int p = peak.load();
      while (now > p && !peak.compare_exchange_weak(p, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      --active;
      limiter.Release();
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_LE(peak.load(), 2);
}

TEST(HttpRequestTest, InterleavesTextAndImages) {
  HttpConfig cfg;
  cfg.model = "m";
  cfg.decoding_json = R"({"temperature": 0})";
  PromptPayload p = Payload("s1");
  p.text = "A<img>B<img>";
  p.image_slots.push_back(p.image_slots.front());
  p.image_slots[1].uri = "u2";
  const auto body = nlohmann::json::parse(BuildRequestBody(cfg, p));
  const auto& parts = body["messages"][0]["content"];
  ASSERT_EQ(parts.size(), 4u);
  EXPECT_EQ(parts[0]["text"], "A");
  EXPECT_EQ(parts[1]["type"], "image_url");
  EXPECT_EQ(parts[2]["text"], "B");
  EXPECT_EQ(parts[3]["image_url"]["url"], "u2");
  EXPECT_EQ(body["temperature"], 0);
  cfg.adapter = HttpAdapter::kGemini;
  const auto g = nlohmann::json::parse(BuildRequestBody(cfg, p));
  EXPECT_EQ(g["contents"][0]["parts"].size(), 4u);
  EXPECT_EQ(g["generationConfig"]["temperature"], 0);
  cfg.decoding_json = "[1]";
  EXPECT_THROW(BuildRequestBody(cfg, p), ConfigError);
}

TEST(HttpRequestTest, ExtractsReplyText) {
  EXPECT_EQ(ExtractReplyText(HttpAdapter::kOpenAiChat,
                             R"({"choices":[{"message":{"content":"hi"}}]})"),
            "hi");
  EXPECT_EQ(ExtractReplyText(HttpAdapter::kGemini,
                             R"({"candidates":[{"content":{"parts":[{"text":"a"},{"text":"b"}]}}]})"),
            "ab");
  EXPECT_EQ(ExtractReplyText(HttpAdapter::kOpenAiChat, "plain"), "plain");
}

TEST(HttpBackendTest, ConfigErrors) {
  HttpConfig cfg;
  cfg.endpoint = "ftp://x";
  EXPECT_THROW(HttpBackend{cfg}, ConfigError);
  cfg.endpoint = "http://127.0.0.1:1/v1";
  cfg.api_key_env = "SEMCAST_TEST_UNSET_KEY_VARIABLE";
  EXPECT_THROW(HttpBackend{cfg}, ConfigError);
}

TEST(HttpBackendTest, LoopbackServerWithRetry) {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string auth;
  std::mutex mu;
  server.Post("/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard lock(mu);
      auth = req.get_header_value("Authorization");
    }
    if (hits++ == 0) {
      res.status = 503;
      return;
    }
    res.set_content(R"({"choices":[{"message":{"content":"Final answer: <SUNNY> <DAY> <HIGHWAY> <NO>"}}]})",
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  ::setenv("SEMCAST_TEST_KEY", "secret", 1);
  HttpConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat";
  cfg.api_key_env = "SEMCAST_TEST_KEY";
  cfg.timeout_ms = 5000;
  SleepLog sleeps;
  MllmClient client(sleeps.Config(), std::make_unique<HttpBackend>(cfg), nullptr);
  const MllmExchange e = client.Query(Payload("s1"));
  server.stop();
  t.join();
  EXPECT_EQ(e.raw_response, "Final answer: <SUNNY> <DAY> <HIGHWAY> <NO>");
  EXPECT_EQ(e.attempts, 2);
  EXPECT_EQ(e.source, ExchangeSource::kLive);
  EXPECT_EQ(auth, "Bearer secret");
}

TEST(HttpBackendTest, ConnectionRefusedIsTransportError) {
  HttpConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1/v1";
  cfg.timeout_ms = 500;
  SleepLog sleeps;
  MllmClient client(sleeps.Config(2), std::make_unique<HttpBackend>(cfg), nullptr);
  EXPECT_THROW(client.Query(Payload("s1")), TransportError);
}

}  // namespace
}  // namespace semcast
