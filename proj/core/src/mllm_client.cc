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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ctime>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "semcast/common.h"

namespace semcast {
namespace {

using Clock = std::chrono::steady_clock;
using Json = nlohmann::ordered_json;

std::string UtcNow() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool Retryable(int status) { return status == 429 || status >= 500; }

void DefaultSleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

}  // namespace

std::string_view ToString(ExchangeSource s) {
  switch (s) {
    case ExchangeSource::kLive:
      return "LIVE";
    case ExchangeSource::kMock:
      return "MOCK";
    case ExchangeSource::kCache:
      break;
  }
  return "CACHE";
}

ExchangeSource ExchangeSourceFromString(std::string_view s) {
  if (s == "LIVE") return ExchangeSource::kLive;
  if (s == "MOCK") return ExchangeSource::kMock;
  if (s == "CACHE") return ExchangeSource::kCache;
  throw DataError("unknown exchange source '" + std::string(s) + "'");
}

std::string ExchangeKey(const PromptPayload& payload) {
  std::string data = payload.scenario_id;
  data += '\0';
  data += ToString(payload.kind);
  data += '\0';
  data += payload.text;
  for (const ImageSlot& s : payload.image_slots) {
    data += '\0';
    data += s.uri;
  }
  return Sha256Hex(data);
}

std::string SerializeExchange(const MllmExchange& e) {
  Json j;
  j["key"] = e.key;
  j["scenario_id"] = e.scenario_id;
  j["kind"] = ToString(e.kind);
  j["step"] = e.step;
  j["raw_response"] = e.raw_response;
  j["source"] = ToString(e.source);
  j["latency_ms"] = e.latency_ms;
  j["created_at"] = e.created_at;
  j["attempts"] = e.attempts;
  return j.dump();
}

MllmExchange DeserializeExchange(std::string_view line, int line_number) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(line_number, "", std::string("invalid JSON: ") + ex.what());
  }
  auto field = [&](const char* name) -> const Json& {
    if (!j.is_object() || !j.contains(name)) {
      throw ParseError(line_number, name, "missing field");
    }
    return j.at(name);
  };
  MllmExchange e;
  try {
    e.key = field("key").get<std::string>();
    e.scenario_id = field("scenario_id").get<std::string>();
    e.kind = PromptKindFromString(field("kind").get<std::string>());
    e.step = field("step").get<int>();
    e.raw_response = field("raw_response").get<std::string>();
    e.source = ExchangeSourceFromString(field("source").get<std::string>());
    e.latency_ms = field("latency_ms").get<double>();
    e.created_at = field("created_at").get<std::string>();
    e.attempts = field("attempts").get<int>();
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(line_number, "", std::string("bad field type: ") + ex.what());
  } catch (const ParseError&) {
    throw;
  } catch (const DataError& ex) {
    throw ParseError(line_number, "", ex.what());
  }
  if (e.key.size() != 64) throw ParseError(line_number, "key", "not a sha256 hex digest");
  return e;
}

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream is(path_, std::ios::binary);
  if (!is) return;  // a fresh cache
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (Trim(line).empty()) continue;
    try {
      MllmExchange e = DeserializeExchange(line, n);
      entries_.try_emplace(e.key, std::move(e));
    } catch (const DataError&) {
      ++corrupt_lines_;
    }
  }
}

std::optional<MllmExchange> ResponseCache::Lookup(const std::string& key) const {
  std::lock_guard lock(mu_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::Append(const MllmExchange& e) {
  std::lock_guard lock(mu_);
  if (!entries_.try_emplace(e.key, e).second) return;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream os(path_, std::ios::binary | std::ios::app);
  if (!os) throw DataError("cannot append to cache " + path_.string());
  os << SerializeExchange(e) << '\n';
  os.flush();
  if (!os) throw DataError("write failed for cache " + path_.string());
}

size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

MockBackend::MockBackend(FaultProfile profile) : profile_(profile) { profile_.Validate(); }

BackendReply MockBackend::Send(const PromptPayload& payload, const Scenario* scenario) {
  if (scenario == nullptr) {
    throw DataError("the mock backend needs the scenario for '" + payload.scenario_id + "'");
  }
  return {200, MockGenerate(*scenario, payload, profile_).text};
}

BackendReply CacheOnlyBackend::Send(const PromptPayload& payload, const Scenario*) {
  throw TransportError("offline replay: no cached response for scenario '" +
                       payload.scenario_id + "' (" + std::string(ToString(payload.kind)) +
                       ", key " + ExchangeKey(payload) + "); run `semcast query` first");
}

ConcurrencyLimiter::ConcurrencyLimiter(int permits) : available_(std::max(1, permits)) {}

void ConcurrencyLimiter::Acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return available_ > 0; });
  --available_;
}

void ConcurrencyLimiter::Release() {
  {
    std::lock_guard lock(mu_);
    ++available_;
  }
  cv_.notify_one();
}

TokenBucket::TokenBucket(double rate_per_s, double burst)
    : rate_(rate_per_s), burst_(std::max(1.0, burst)), tokens_(burst_), last_(Clock::now()) {}

std::chrono::milliseconds TokenBucket::Reserve() {
  if (rate_ <= 0.0) return std::chrono::milliseconds(0);
  std::lock_guard lock(mu_);
  const auto now = Clock::now();
  const double elapsed = std::chrono::duration<double>(now - last_).count();
  last_ = now;
  tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
  tokens_ -= 1.0;  // may go negative: the deficit is the caller's wait
  if (tokens_ >= 0.0) return std::chrono::milliseconds(0);
  return std::chrono::milliseconds(
      static_cast<int64_t>(std::ceil(-tokens_ / rate_ * 1000.0)));
}

MllmClient::MllmClient(ClientConfig config, std::unique_ptr<Backend> backend,
                       std::unique_ptr<ResponseCache> cache)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      cache_(std::move(cache)),
      limiter_(config_.max_concurrency),
      bucket_(config_.requests_per_s, std::max(1, config_.max_concurrency)) {
  if (!config_.sleep) config_.sleep = DefaultSleep;
  if (config_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
}

MllmExchange MllmClient::Dispatch(const PromptPayload& payload, const Scenario* scenario,
                                  const std::string& key) {
  std::vector<std::string> attempt_log;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) {
      const int64_t backoff =
          std::min<int64_t>(config_.backoff_cap_ms,
                            static_cast<int64_t>(config_.backoff_base_ms) << (attempt - 2));
      config_.sleep(std::chrono::milliseconds(backoff));
    }
    if (const auto wait = bucket_.Reserve(); wait.count() > 0) config_.sleep(wait);
    const auto start = Clock::now();
    BackendReply reply;
    limiter_.Acquire();
    try {
      reply = backend_->Send(payload, scenario);
    } catch (const TransportError& e) {
      limiter_.Release();
      if (backend_->source() == ExchangeSource::kCache) throw;
      attempt_log.push_back("attempt " + std::to_string(attempt) + ": " + e.what());
      continue;
    } catch (...) {
      limiter_.Release();
      throw;
    }
    limiter_.Release();
    const double ms =
        std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    if (reply.status >= 200 && reply.status < 300) {
      MllmExchange e;
      e.key = key;
      e.scenario_id = payload.scenario_id;
      e.kind = payload.kind;
      e.step = payload.step;
      e.raw_response = std::move(reply.body);
      e.source = backend_->source();
      e.attempts = attempt;
      // Mock answers are pure; keep their records free of wall-clock data so
      // caches built from the mock are reproducible byte for byte.
      if (e.source != ExchangeSource::kMock) {
        e.latency_ms = ms;
        e.created_at = UtcNow();
      }
      return e;
    }
    attempt_log.push_back("attempt " + std::to_string(attempt) + ": HTTP " +
                          std::to_string(reply.status));
    if (!Retryable(reply.status)) break;
  }
  std::string msg = "request for scenario '" + payload.scenario_id + "' (" +
                    std::string(ToString(payload.kind)) + ") failed";
  for (const std::string& a : attempt_log) msg += "; " + a;
  throw TransportError(msg);
}

MllmExchange MllmClient::Query(const PromptPayload& payload, const Scenario* scenario) {
  const std::string key = ExchangeKey(payload);
  if (cache_) {
    if (std::optional<MllmExchange> hit = cache_->Lookup(key)) {
      hit->source = ExchangeSource::kCache;
      return *hit;
    }
  }
  MllmExchange e = Dispatch(payload, scenario, key);
  if (cache_) cache_->Append(e);
  return e;
}

std::vector<MllmExchange> MllmClient::QueryMany(const std::vector<QueryItem>& items) {
  const size_t n = items.size();
  std::vector<std::optional<MllmExchange>> results(n);
  std::vector<std::string> keys(n);
  std::vector<size_t> misses;
  for (size_t i = 0; i < n; ++i) {
    keys[i] = ExchangeKey(*items[i].payload);
    if (cache_) {
      if (std::optional<MllmExchange> hit = cache_->Lookup(keys[i])) {
        hit->source = ExchangeSource::kCache;
        results[i] = std::move(hit);
        continue;
      }
    }
    misses.push_back(i);
  }

  // Duplicate payloads inside one batch are dispatched once.
  std::map<std::string, size_t> first_of;
  std::vector<size_t> unique;
  for (size_t i : misses) {
    if (first_of.try_emplace(keys[i], i).second) unique.push_back(i);
  }

  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t u = next++; u < unique.size(); u = next++) {
      const size_t i = unique[u];
      try {
        results[i] = Dispatch(*items[i].payload, items[i].scenario, keys[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads =
      std::min<int>(std::max(1, config_.max_concurrency), static_cast<int>(unique.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  // Commit in input order; stop at the first failure so the cache stays a
  // prefix-consistent record of the batch.
  for (size_t i : unique) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    if (cache_) cache_->Append(*results[i]);
  }
  for (size_t i = 0; i < n; ++i) {
    if (!results[i]) {
      MllmExchange dup = *results[first_of.at(keys[i])];
      dup.source = ExchangeSource::kCache;
      results[i] = std::move(dup);
    }
  }
  std::vector<MllmExchange> out;
  out.reserve(n);
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

}  // namespace semcast
