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

// One query interface over three backends: a live HTTP endpoint, the mock
// oracle, and an offline replay of a response cache.

#ifndef SEMCAST_MLLM_CLIENT_H_
#define SEMCAST_MLLM_CLIENT_H_

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "semcast/mock_oracle.h"
#include "semcast/prompt_builder.h"
#include "semcast/scene_model.h"

namespace semcast {

enum class ExchangeSource { kLive, kMock, kCache };

std::string_view ToString(ExchangeSource s);
ExchangeSource ExchangeSourceFromString(std::string_view s);

struct MllmExchange {
  std::string key;
  std::string scenario_id;
  PromptKind kind = PromptKind::kSc;
  int step = 0;
  std::string raw_response;
  ExchangeSource source = ExchangeSource::kMock;
  double latency_ms = 0.0;
  std::string created_at;  // UTC ISO-8601; empty for mock answers
  int attempts = 1;

  bool operator==(const MllmExchange&) const = default;
};

// sha256 over scenario id, prompt kind, prompt text and the attached image
// URIs, NUL-separated. The URIs distinguish the same template queried at
// different steps.
std::string ExchangeKey(const PromptPayload& payload);

std::string SerializeExchange(const MllmExchange& e);
MllmExchange DeserializeExchange(std::string_view line, int line_number = 1);

// Append-only JSON-lines store. A corrupt line invalidates only itself.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path path);

  std::optional<MllmExchange> Lookup(const std::string& key) const;
  void Append(const MllmExchange& e);
  size_t size() const;
  int corrupt_lines() const { return corrupt_lines_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, MllmExchange> entries_;
  int corrupt_lines_ = 0;
};

// Result of one backend attempt.
struct BackendReply {
  int status = 200;  // HTTP status; 200 for in-process backends
  std::string body;  // reply text (already unwrapped from the envelope)
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual ExchangeSource source() const = 0;
  // Throws TransportError for connection-level failures (retried by the
  // client). `scenario` may be null for backends that do not need it.
  virtual BackendReply Send(const PromptPayload& payload, const Scenario* scenario) = 0;
};

class MockBackend : public Backend {
 public:
  explicit MockBackend(FaultProfile profile);
  ExchangeSource source() const override { return ExchangeSource::kMock; }
  BackendReply Send(const PromptPayload& payload, const Scenario* scenario) override;

 private:
  FaultProfile profile_;
};

enum class HttpAdapter { kOpenAiChat, kGemini };

HttpAdapter HttpAdapterFromString(std::string_view s);

struct HttpConfig {
  std::string endpoint;  // e.g. https://host/v1/chat/completions
  std::string api_key_env;
  std::string model;
  HttpAdapter adapter = HttpAdapter::kOpenAiChat;
  int timeout_ms = 60000;
  // Decoding settings copied into the request verbatim (JSON object text).
  std::string decoding_json = "{}";
};

// Request body for `payload` in the adapter's envelope. Text and images are
// interleaved at the <img> placeholders.
std::string BuildRequestBody(const HttpConfig& config, const PromptPayload& payload);
// Generated text from a reply body, or the body itself when the envelope
// cannot be read.
std::string ExtractReplyText(HttpAdapter adapter, const std::string& body);

class HttpBackend : public Backend {
 public:
  // Throws ConfigError for a malformed endpoint or an unset key variable.
  explicit HttpBackend(HttpConfig config);
  ExchangeSource source() const override { return ExchangeSource::kLive; }
  BackendReply Send(const PromptPayload& payload, const Scenario* scenario) override;

 private:
  HttpConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
};

// Replay-only backend: every dispatch is a cache miss error.
class CacheOnlyBackend : public Backend {
 public:
  ExchangeSource source() const override { return ExchangeSource::kCache; }
  BackendReply Send(const PromptPayload& payload, const Scenario* scenario) override;
};

// Counting semaphore with a runtime bound.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(int permits);
  void Acquire();
  void Release();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int available_;
};

// Token bucket; rate <= 0 disables it.
class TokenBucket {
 public:
  TokenBucket(double rate_per_s, double burst);
  // Time the caller must wait before its request may go out (already reserved).
  std::chrono::milliseconds Reserve();

 private:
  std::mutex mu_;
  double rate_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

struct ClientConfig {
  int max_concurrency = 4;
  double requests_per_s = 0.0;  // 0: unlimited
  int max_attempts = 5;
  int backoff_base_ms = 500;
  int backoff_cap_ms = 16000;
  // Replaceable for tests.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct QueryItem {
  const PromptPayload* payload = nullptr;
  const Scenario* scenario = nullptr;
};

class MllmClient {
 public:
  // `cache` may be null (no persistence).
  MllmClient(ClientConfig config, std::unique_ptr<Backend> backend,
             std::unique_ptr<ResponseCache> cache);

  // Cache hit: the stored exchange with source CACHE. Miss: dispatch with
  // retries on connection errors, 429 and 5xx, then store. Exhausted retries
  // or a non-retryable status throw TransportError carrying the attempt log.
  MllmExchange Query(const PromptPayload& payload, const Scenario* scenario = nullptr);

  // Dispatches misses on up to max_concurrency threads and stores results in
  // input order, so the cache file does not depend on thread timing.
  std::vector<MllmExchange> QueryMany(const std::vector<QueryItem>& items);

  ResponseCache* cache() { return cache_.get(); }

 private:
  MllmExchange Dispatch(const PromptPayload& payload, const Scenario* scenario,
                        const std::string& key);

  ClientConfig config_;
  std::unique_ptr<Backend> backend_;
  std::unique_ptr<ResponseCache> cache_;
  ConcurrencyLimiter limiter_;
  TokenBucket bucket_;
};

}  // namespace semcast

#endif  // SEMCAST_MLLM_CLIENT_H_
