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

// Eigen must be seen before httplib: <resolv.h> defines a `_res` macro that
// collides with Eigen's parameter names.
#include "semcast/mllm_client.h"

#include <cstdlib>
#include <regex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "semcast/common.h"

namespace semcast {
namespace {

using Json = nlohmann::ordered_json;

// Prompt text split at <img>; parts.size() == images + 1.
std::vector<std::string> SplitAtImages(const std::string& text) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    const size_t pos = text.find("<img>", start);
    if (pos == std::string::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 5;
  }
}

}  // namespace

HttpAdapter HttpAdapterFromString(std::string_view s) {
  if (s == "openai_chat") return HttpAdapter::kOpenAiChat;
  if (s == "gemini") return HttpAdapter::kGemini;
  throw ConfigError("unknown HTTP adapter '" + std::string(s) +
                    "' (expected openai_chat or gemini)");
}

std::string BuildRequestBody(const HttpConfig& config, const PromptPayload& payload) {
  Json decoding;
  try {
    decoding = Json::parse(config.decoding_json.empty() ? "{}" : config.decoding_json);
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("decoding settings are not valid JSON");
  }
  if (!decoding.is_object()) throw ConfigError("decoding settings must be a JSON object");

  const std::vector<std::string> texts = SplitAtImages(payload.text);
  Json parts = Json::array();
  for (size_t i = 0; i < texts.size(); ++i) {
    if (!texts[i].empty()) {
      if (config.adapter == HttpAdapter::kOpenAiChat) {
        parts.push_back({{"type", "text"}, {"text", texts[i]}});
      } else {
        parts.push_back({{"text", texts[i]}});
      }
    }
    if (i < payload.image_slots.size() && i + 1 < texts.size()) {
      const ImageSlot& slot = payload.image_slots[i];
      if (config.adapter == HttpAdapter::kOpenAiChat) {
        parts.push_back({{"type", "image_url"}, {"image_url", {{"url", slot.uri}}}});
      } else {
        parts.push_back(
            {{"file_data", {{"mime_type", "image/jpeg"}, {"file_uri", slot.uri}}}});
      }
    }
  }

  Json body;
  if (config.adapter == HttpAdapter::kOpenAiChat) {
    body["model"] = config.model;
    body["messages"] = Json::array({{{"role", "user"}, {"content", parts}}});
    for (auto& [k, v] : decoding.items()) body[k] = v;
  } else {
    body["contents"] = Json::array({{{"role", "user"}, {"parts", parts}}});
    if (!decoding.empty()) body["generationConfig"] = decoding;
  }
  return body.dump();
}

std::string ExtractReplyText(HttpAdapter adapter, const std::string& body) {
  try {
    const Json j = Json::parse(body);
    if (adapter == HttpAdapter::kOpenAiChat) {
      const Json& content = j.at("choices").at(0).at("message").at("content");
      if (content.is_string()) return content.get<std::string>();
      std::string out;
      for (const Json& part : content) {
        if (part.contains("text")) out += part.at("text").get<std::string>();
      }
      return out;
    }
    std::string out;
    for (const Json& part : j.at("candidates").at(0).at("content").at("parts")) {
      if (part.contains("text")) out += part.at("text").get<std::string>();
    }
    return out;
  } catch (const nlohmann::json::exception&) {
    return body;  // the parser deals with whatever came back
  }
}

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, kUrl)) {
    throw ConfigError("endpoint '" + config_.endpoint + "' is not an http(s) URL");
  }
  scheme_host_port_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ConfigError("environment variable " + config_.api_key_env +
                        " (API key) is not set");
    }
    api_key_ = key;
  }
  BuildRequestBody(config_, PromptPayload{});  // validates decoding settings early
}

BackendReply HttpBackend::Send(const PromptPayload& payload, const Scenario*) {
  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!api_key_.empty()) {
    if (config_.adapter == HttpAdapter::kOpenAiChat) {
      headers.emplace("Authorization", "Bearer " + api_key_);
    } else {
      headers.emplace("x-goog-api-key", api_key_);
    }
  }
  const httplib::Result res =
      client.Post(path_, headers, BuildRequestBody(config_, payload), "application/json");
  if (!res) {
    throw TransportError(config_.endpoint + ": " + httplib::to_string(res.error()));
  }
  BackendReply reply;
  reply.status = res->status;
  reply.body = res->status >= 200 && res->status < 300
                   ? ExtractReplyText(config_.adapter, res->body)
                   : res->body;
  return reply;
}

}  // namespace semcast
