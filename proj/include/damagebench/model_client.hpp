//------------------------------------------------------------------------------
//
//   Copyright 2026 The damagebench Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "damagebench/errors.hpp"
#include "damagebench/text.hpp"
#include "damagebench/util.hpp"

// Transport to OpenAI-compatible chat-completion endpoints (llama.cpp server,
// Ollama) plus an in-process mock. Failures never escape as exceptions: they
// come back as unsuccessful records.

namespace damagebench {

struct SamplingParams {
  double temperature = 0.3;
  double top_p = 0.9;
  int max_tokens = 300;
  int context_length = 4096;

  void validate() const {
    if (!(temperature > 0.0)) {
      throw ConfigError("sampling: temperature must be > 0");
    }
    if (!(top_p > 0.0 && top_p <= 1.0)) {
      throw ConfigError("sampling: top_p must be in (0, 1]");
    }
    if (max_tokens < 1 || context_length < 1) {
      throw ConfigError("sampling: max_tokens and context_length must be >= 1");
    }
  }
};

enum class EndpointKind { vision, text };

struct ModelEndpoint {
  std::string label;  // quantization identifier, e.g. "Q4_K_M"
  std::string base_url;
  std::string model_name;
  EndpointKind kind = EndpointKind::vision;
  double declared_size_gb = 0.0;
  int declared_bits = 0;
};

struct DescriptionRecord {
  std::string image_id;
  std::string endpoint_label;
  std::string text;
  std::size_t char_length = 0;
  double inference_seconds = 0.0;
  bool success = false;
  std::optional<std::string> error_detail;
  int attempts = 0;
  std::optional<int> prompt_tokens;
  std::optional<int> completion_tokens;
  std::vector<std::string> warnings;

  friend bool operator==(const DescriptionRecord&, const DescriptionRecord&) = default;
};

inline void to_json(nlohmann::json& j, const DescriptionRecord& r) {
  auto opt = [](const auto& o) { return o ? nlohmann::json(*o) : nlohmann::json(nullptr); };
  j = {{"image_id", r.image_id},
       {"endpoint_label", r.endpoint_label},
       {"text", r.text},
       {"char_length", r.char_length},
       {"inference_seconds", r.inference_seconds},
       {"success", r.success},
       {"error_detail", opt(r.error_detail)},
       {"attempts", r.attempts},
       {"prompt_tokens", opt(r.prompt_tokens)},
       {"completion_tokens", opt(r.completion_tokens)},
       {"warnings", r.warnings}};
}

inline void from_json(const nlohmann::json& j, DescriptionRecord& r) {
  j.at("image_id").get_to(r.image_id);
  j.at("endpoint_label").get_to(r.endpoint_label);
  j.at("text").get_to(r.text);
  j.at("char_length").get_to(r.char_length);
  j.at("inference_seconds").get_to(r.inference_seconds);
  j.at("success").get_to(r.success);
  const auto& err = j.at("error_detail");
  r.error_detail = err.is_null() ? std::nullopt : std::optional<std::string>(err.get<std::string>());
  r.attempts = j.value("attempts", 1);
  auto opt_int = [&](const char* key) {
    return j.contains(key) && !j.at(key).is_null() ? std::optional<int>(j.at(key).get<int>()) : std::nullopt;
  };
  r.prompt_tokens = opt_int("prompt_tokens");
  r.completion_tokens = opt_int("completion_tokens");
  r.warnings = j.value("warnings", std::vector<std::string>{});
}

/// Identifies the image a request is about, for backends that key on it.
struct RequestContext {
  std::string image_id;
  std::string content_sha256;
};

struct TransportResponse {
  int status = 0;  // 0: transport-level failure
  std::string body;
  std::string error;
  // Set by simulated backends that report a deterministic duration instead
  // of being timed.
  std::optional<double> simulated_seconds;
};

class Transport {
public:
  virtual ~Transport() = default;
  virtual TransportResponse post_chat(const ModelEndpoint& endpoint, const std::string& body,
                                      const RequestContext& context, std::chrono::milliseconds timeout) = 0;
};

/// Plain HTTP(S) POST to `<base_url>/chat/completions` (base_url usually ends
/// in "/v1"). A base_url that already ends in "/chat/completions" is used as is.
class HttpTransport final : public Transport {
public:
  struct Target {
    std::string origin;  // scheme://host[:port]
    std::string path;
  };

  static Target split_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
      throw ConfigError("endpoint url lacks a scheme: " + base_url);
    }
    const auto path_start = base_url.find('/', scheme_end + 3);
    Target t;
    t.origin = base_url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "" : base_url.substr(path_start);
    while (!path.empty() && path.back() == '/') {
      path.pop_back();
    }
    constexpr std::string_view suffix = "/chat/completions";
    if (path.size() < suffix.size() || path.compare(path.size() - suffix.size(), suffix.size(), suffix) != 0) {
      path += suffix;
    }
    t.path = path;
    return t;
  }

  TransportResponse post_chat(const ModelEndpoint& endpoint, const std::string& body, const RequestContext&,
                              std::chrono::milliseconds timeout) override {
    Target target;
    try {
      target = split_url(endpoint.base_url);
    } catch (const ConfigError& e) {
      return {0, {}, e.what(), std::nullopt};
    }
    httplib::Client client(target.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(target.path, body, "application/json");
    if (!res) {
      return {0, {}, "transport error: " + httplib::to_string(res.error()), std::nullopt};
    }
    return {res->status, res->body, {}, std::nullopt};
  }
};

namespace detail {

inline nlohmann::json sampling_fields(const ModelEndpoint& endpoint, const SamplingParams& sampling) {
  return {{"model", endpoint.model_name},
          {"temperature", sampling.temperature},
          {"top_p", sampling.top_p},
          {"max_tokens", sampling.max_tokens},
          {"stream", false}};
}

} // namespace detail

/// Multimodal chat-completion request body. Keys serialize in sorted order,
/// so identical inputs give byte-identical bodies.
inline std::string build_describe_request(std::span<const std::uint8_t> png_bytes, std::string_view prompt,
                                          const ModelEndpoint& endpoint, const SamplingParams& sampling) {
  auto body = detail::sampling_fields(endpoint, sampling);
  body["messages"] = nlohmann::json::array(
      {{{"role", "user"},
        {"content",
         nlohmann::json::array(
             {{{"type", "text"}, {"text", std::string(prompt)}},
              {{"type", "image_url"},
               {"image_url", {{"url", "data:image/png;base64," + util::base64_encode(png_bytes)}}}}})}}});
  return body.dump();
}

inline std::string build_text_request(std::string_view prompt, const ModelEndpoint& endpoint,
                                      const SamplingParams& sampling) {
  auto body = detail::sampling_fields(endpoint, sampling);
  body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}});
  return body.dump();
}

/// Extracts the base64 image payload from a describe request, if any.
inline std::optional<std::vector<std::uint8_t>> request_image_bytes(const std::string& body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.contains("messages")) {
    return std::nullopt;
  }
  for (const auto& msg : j.at("messages")) {
    if (!msg.contains("content") || !msg.at("content").is_array()) {
      continue;
    }
    for (const auto& part : msg.at("content")) {
      if (part.value("type", "") != "image_url") {
        continue;
      }
      const auto url = part.at("image_url").at("url").get<std::string>();
      const auto comma = url.find(',');
      if (comma != std::string::npos) {
        return util::base64_decode(std::string_view(url).substr(comma + 1));
      }
    }
  }
  return std::nullopt;
}

struct Completion {
  std::string text;
  std::optional<int> prompt_tokens;
  std::optional<int> completion_tokens;
};

/// Parses a chat-completions response; throws DataError when malformed.
inline Completion parse_completion(const std::string& body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) {
    throw DataError("response is not JSON");
  }
  try {
    Completion c;
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) {
      c.text = content.get<std::string>();
    } else if (content.is_array()) {
      for (const auto& part : content) {
        if (part.value("type", "") == "text") {
          c.text += part.at("text").get<std::string>();
        }
      }
    } else {
      throw DataError("message content is neither a string nor a list of parts");
    }
    if (j.contains("usage") && j.at("usage").is_object()) {
      const auto& u = j.at("usage");
      if (u.contains("prompt_tokens")) {
        c.prompt_tokens = u.at("prompt_tokens").get<int>();
      }
      if (u.contains("completion_tokens")) {
        c.completion_tokens = u.at("completion_tokens").get<int>();
      }
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed completion: ") + e.what());
  }
}

/// Deterministic in-process stand-in for model endpoints.
///
/// Responses are looked up by image id, then by "sha256:<hex>" of the image
/// bytes carried in the request. Text requests (no image) use the image id
/// from the request context, then `text_response`. With `virtual_time` the
/// configured latency is reported instead of slept.
class MockBackend final : public Transport {
public:
  struct Fixture {
    std::string text;
    double latency_seconds = 0.0;
  };
  enum class FailureMode { transport, http_500, http_400, malformed };
  enum class UnknownPolicy { fallback_text, fail };

  std::map<std::string, Fixture> fixtures;
  std::map<std::string, FailureMode> failures;
  UnknownPolicy unknown_policy = UnknownPolicy::fallback_text;
  std::string fallback_text = "Damage to a structure.";
  double default_latency_seconds = 0.0;
  bool virtual_time = false;
  std::optional<std::string> text_response;

  static MockBackend from_json(const nlohmann::json& j) {
    MockBackend m;
    try {
      m.virtual_time = j.value("virtual_time", false);
      m.default_latency_seconds = j.value("default_latency", 0.0);
      if (j.contains("unknown")) {
        const auto& u = j.at("unknown");
        const auto policy = u.value("policy", std::string("fallback"));
        if (policy == "fallback") {
          m.unknown_policy = UnknownPolicy::fallback_text;
        } else if (policy == "fail") {
          m.unknown_policy = UnknownPolicy::fail;
        } else {
          throw ConfigError("mock: unknown policy '" + policy + "'");
        }
        m.fallback_text = u.value("text", m.fallback_text);
      }
      const auto fixtures_json = j.value("fixtures", nlohmann::json::object());
      for (const auto& [key, f] : fixtures_json.items()) {
        Fixture fx;
        if (f.is_string()) {
          fx.text = f.get<std::string>();
          fx.latency_seconds = m.default_latency_seconds;
        } else {
          fx.text = f.at("text").get<std::string>();
          fx.latency_seconds = f.value("latency", m.default_latency_seconds);
        }
        m.fixtures.emplace(key, std::move(fx));
      }
      const auto failures_json = j.value("failures", nlohmann::json::object());
      for (const auto& [key, mode] : failures_json.items()) {
        const auto s = mode.get<std::string>();
        if (s == "transport") {
          m.failures[key] = FailureMode::transport;
        } else if (s == "http_500") {
          m.failures[key] = FailureMode::http_500;
        } else if (s == "http_400") {
          m.failures[key] = FailureMode::http_400;
        } else if (s == "malformed") {
          m.failures[key] = FailureMode::malformed;
        } else {
          throw ConfigError("mock: unknown failure mode '" + s + "'");
        }
      }
      if (j.contains("text_response")) {
        m.text_response = j.at("text_response").get<std::string>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("mock fixtures: ") + e.what());
    }
    if (m.fixtures.empty() && !m.text_response) {
      throw ConfigError("mock fixtures: fixture map must not be empty");
    }
    return m;
  }

  static std::string completion_body(const std::string& text) {
    const nlohmann::json j = {
        {"object", "chat.completion"},
        {"choices", nlohmann::json::array({{{"index", 0},
                                            {"finish_reason", "stop"},
                                            {"message", {{"role", "assistant"}, {"content", text}}}}})},
        {"usage", {{"prompt_tokens", 0}, {"completion_tokens", static_cast<int>(text::utf8_length(text) / 4)}}}};
    return j.dump();
  }

  TransportResponse post_chat(const ModelEndpoint& endpoint, const std::string& body, const RequestContext& context,
                              std::chrono::milliseconds) override {
    std::string sha = context.content_sha256;
    if (sha.empty()) {
      if (const auto bytes = request_image_bytes(body)) {
        sha = util::sha256_hex(*bytes);
      }
    }
    const std::vector<std::string> keys{context.image_id, sha.empty() ? std::string() : "sha256:" + sha};

    for (const auto& key : keys) {
      if (key.empty()) {
        continue;
      }
      if (const auto it = failures.find(key); it != failures.end()) {
        switch (it->second) {
        case FailureMode::transport:
          return {0, {}, "mock: simulated connection failure", std::nullopt};
        case FailureMode::http_500:
          return {500, R"({"error":"simulated server error"})", {}, std::nullopt};
        case FailureMode::http_400:
          return {400, R"({"error":"simulated bad request"})", {}, std::nullopt};
        case FailureMode::malformed:
          return {200, "{\"choices\": [", {}, std::nullopt};
        }
      }
    }

    std::optional<Fixture> hit;
    for (const auto& key : keys) {
      if (key.empty()) {
        continue;
      }
      if (const auto it = fixtures.find(key); it != fixtures.end()) {
        hit = it->second;
        break;
      }
    }
    if (!hit && endpoint.kind == EndpointKind::text && text_response) {
      hit = Fixture{*text_response, default_latency_seconds};
    }
    if (!hit) {
      if (unknown_policy == UnknownPolicy::fail) {
        return {404, R"({"error":"mock: no fixture for image"})", {}, std::nullopt};
      }
      hit = Fixture{fallback_text, default_latency_seconds};
    }

    TransportResponse r{200, completion_body(hit->text), {}, std::nullopt};
    if (virtual_time && hit->latency_seconds > 0.0) {
      r.simulated_seconds = hit->latency_seconds;
    } else if (hit->latency_seconds > 0.0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(hit->latency_seconds));
    }
    return r;
  }
};

struct ClientOptions {
  std::chrono::milliseconds timeout{120'000};
  int retries = 1;  // extra attempts after a transport error or 5xx; never after 4xx
  // Rough image token budget used only for the context-length warning.
  int image_token_estimate = 576;
};

struct TextCompletion {
  std::string text;
  double seconds = 0.0;
  bool success = false;
  std::optional<std::string> error_detail;
  int attempts = 0;
};

/// Sends requests through a Transport with retry and timing semantics.
class ModelClient {
public:
  explicit ModelClient(std::shared_ptr<Transport> transport, ClientOptions options = {})
      : transport_{std::move(transport)}, options_{options} {}

  DescriptionRecord describe_image(const std::string& image_id, std::span<const std::uint8_t> png_bytes,
                                   std::string_view prompt, const ModelEndpoint& endpoint,
                                   const SamplingParams& sampling) const {
    DescriptionRecord rec;
    rec.image_id = image_id;
    rec.endpoint_label = endpoint.label;
    if (endpoint.kind != EndpointKind::vision) {
      rec.error_detail = "endpoint " + endpoint.label + " is not a vision endpoint";
      return rec;
    }
    if (static_cast<long long>(estimate_tokens(prompt)) + options_.image_token_estimate + sampling.max_tokens >
        sampling.context_length) {
      rec.warnings.push_back("request may exceed the context length estimate");
    }
    const std::string body = build_describe_request(png_bytes, prompt, endpoint, sampling);
    const RequestContext ctx{image_id, util::sha256_hex(png_bytes)};
    const auto outcome = exchange(endpoint, body, ctx);
    rec.attempts = outcome.attempts;
    rec.inference_seconds = outcome.seconds;
    if (!outcome.error.empty()) {
      rec.error_detail = outcome.error;
      return rec;
    }
    rec.text = outcome.completion.text;
    rec.char_length = text::utf8_length(rec.text);
    rec.prompt_tokens = outcome.completion.prompt_tokens;
    rec.completion_tokens = outcome.completion.completion_tokens;
    rec.success = true;
    return rec;
  }

  TextCompletion complete_text(std::string_view prompt, const ModelEndpoint& endpoint,
                               const SamplingParams& sampling, const RequestContext& ctx = {}) const {
    TextCompletion out;
    if (endpoint.kind != EndpointKind::text) {
      out.error_detail = "endpoint " + endpoint.label + " is not a text endpoint";
      return out;
    }
    const auto outcome = exchange(endpoint, build_text_request(prompt, endpoint, sampling), ctx);
    out.attempts = outcome.attempts;
    out.seconds = outcome.seconds;
    if (!outcome.error.empty()) {
      out.error_detail = outcome.error;
      return out;
    }
    out.text = outcome.completion.text;
    out.success = true;
    return out;
  }

  const ClientOptions& options() const noexcept { return options_; }

private:
  struct Outcome {
    Completion completion;
    std::string error;
    double seconds = 0.0;
    int attempts = 0;
  };

  static std::size_t estimate_tokens(std::string_view s) { return text::utf8_length(s) / 4 + 1; }

  // Timing covers only the final attempt.
  Outcome exchange(const ModelEndpoint& endpoint, const std::string& body, const RequestContext& ctx) const {
    Outcome out;
    const int max_attempts = 1 + std::max(0, options_.retries);
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
      out.attempts = attempt;
      const auto start = std::chrono::steady_clock::now();
      TransportResponse res = transport_->post_chat(endpoint, body, ctx, options_.timeout);
      const double measured = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out.seconds = std::max(res.simulated_seconds.value_or(measured), 1e-9);

      if (res.status == 0 || res.status >= 500) {
        out.error = res.status == 0 ? res.error : "HTTP " + std::to_string(res.status) + ": " + res.body;
        continue;
      }
      if (res.status >= 400) {
        out.error = "HTTP " + std::to_string(res.status) + ": " + res.body;
        return out;
      }
      try {
        out.completion = parse_completion(res.body);
      } catch (const DataError& e) {
        out.error = e.what();
        return out;
      }
      if (text::trim(out.completion.text).empty()) {
        out.error = "empty completion";
        return out;
      }
      out.error.clear();
      return out;
    }
    return out;
  }

  std::shared_ptr<Transport> transport_;
  ClientOptions options_;
};

} // namespace damagebench
