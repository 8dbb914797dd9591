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

#include <atomic>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "damagebench/model_client.hpp"

using namespace damagebench;

namespace {

const std::vector<std::uint8_t> tiny_png{0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A, 1, 2, 3};

constexpr const char* photo04_text =
    "Severe rebar exposure detected. The structural integrity is compromised with visible reinforcement bars "
    "exposed through concrete deterioration.";

ModelEndpoint vision(std::string label = "Q4_K_M", std::string url = "mock:") {
  return {std::move(label), std::move(url), "model.gguf", EndpointKind::vision, 4.1, 4};
}

std::shared_ptr<MockBackend> mock_from(const char* json) {
  return std::make_shared<MockBackend>(MockBackend::from_json(nlohmann::json::parse(json)));
}

/// Fails the first `failures` calls with `status`, then answers `text`.
class FlakyTransport final : public Transport {
public:
  FlakyTransport(int failures, int status) : failures_{failures}, status_{status} {}

  TransportResponse post_chat(const ModelEndpoint&, const std::string&, const RequestContext&,
                              std::chrono::milliseconds) override {
    ++calls;
    if (calls <= failures_) {
      return {status_, "boom", "down", 9.0};
    }
    return {200, MockBackend::completion_body("Crack on the girder."), {}, 1.25};
  }

  int calls = 0;

private:
  int failures_;
  int status_;
};

} // namespace

TEST(Sampling, DefaultsAndValidation) {
  const SamplingParams s;
  EXPECT_DOUBLE_EQ(s.temperature, 0.3);
  EXPECT_DOUBLE_EQ(s.top_p, 0.9);
  EXPECT_EQ(s.max_tokens, 300);
  EXPECT_EQ(s.context_length, 4096);
  EXPECT_NO_THROW(s.validate());
  SamplingParams bad = s;
  bad.temperature = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = s;
  bad.top_p = 1.5;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = s;
  bad.max_tokens = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Util, Base64RoundTrip) {
  for (std::size_t n = 0; n < 10; ++n) {
    std::vector<std::uint8_t> bytes(n);
    for (std::size_t i = 0; i < n; ++i) {
      bytes[i] = static_cast<std::uint8_t>(250 + i);
    }
    EXPECT_EQ(util::base64_decode(util::base64_encode(bytes)), bytes);
  }
  EXPECT_EQ(util::base64_encode(std::vector<std::uint8_t>{'M', 'a'}), "TWE=");
}

TEST(Util, Sha256KnownVector) {
  EXPECT_EQ(util::sha256_hex(std::string_view("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(HttpTransport, SplitUrl) {
  auto t = HttpTransport::split_url("http://127.0.0.1:8080/v1");
  EXPECT_EQ(t.origin, "http://127.0.0.1:8080");
  EXPECT_EQ(t.path, "/v1/chat/completions");
  t = HttpTransport::split_url("https://host/v1/chat/completions/");
  EXPECT_EQ(t.path, "/v1/chat/completions");
  t = HttpTransport::split_url("http://host:1234");
  EXPECT_EQ(t.path, "/chat/completions");
  EXPECT_THROW(HttpTransport::split_url("localhost:8080"), ConfigError);
}

TEST(Request, DescribeBodyIsDeterministicAndCarriesImage) {
  const auto ep = vision();
  const SamplingParams s;
  const auto a = build_describe_request(tiny_png, "prompt", ep, s);
  const auto b = build_describe_request(tiny_png, "prompt", ep, s);
  EXPECT_EQ(a, b);
  const auto j = nlohmann::json::parse(a);
  EXPECT_EQ(j.at("model"), "model.gguf");
  EXPECT_DOUBLE_EQ(j.at("temperature").get<double>(), 0.3);
  EXPECT_DOUBLE_EQ(j.at("top_p").get<double>(), 0.9);
  EXPECT_EQ(j.at("max_tokens"), 300);
  EXPECT_EQ(j.at("stream"), false);
  const auto& content = j.at("messages").at(0).at("content");
  EXPECT_EQ(content.at(0).at("text"), "prompt");
  EXPECT_EQ(content.at(1).at("image_url").at("url").get<std::string>().rfind("data:image/png;base64,", 0), 0U);
  EXPECT_EQ(request_image_bytes(a), tiny_png);
  EXPECT_FALSE(request_image_bytes(build_text_request("x", ep, s)).has_value());
}

TEST(Completion, ParsesContentAndUsage) {
  const auto c = parse_completion(
      R"({"choices":[{"message":{"role":"assistant","content":"hi"}}],"usage":{"prompt_tokens":5,"completion_tokens":1}})");
  EXPECT_EQ(c.text, "hi");
  EXPECT_EQ(c.prompt_tokens, 5);
  EXPECT_EQ(c.completion_tokens, 1);
  EXPECT_THROW(parse_completion("{\"choices\": ["), DataError);
  EXPECT_THROW(parse_completion(R"({"choices":[]})"), DataError);
}

TEST(MockBackend, ReturnsFixtureText) {
  auto mock = std::make_shared<MockBackend>(MockBackend::from_json(
      {{"virtual_time", true}, {"fixtures", {{"photo04", {{"text", photo04_text}, {"latency", 5.5}}}}}}));
  const ModelClient client(mock);
  const auto rec = client.describe_image("photo04", tiny_png, "describe", vision(), {});
  ASSERT_TRUE(rec.success);
  EXPECT_EQ(rec.text, photo04_text);
  EXPECT_EQ(rec.char_length, text::utf8_length(photo04_text));
  EXPECT_DOUBLE_EQ(rec.inference_seconds, 5.5);
  EXPECT_EQ(rec.attempts, 1);
  EXPECT_EQ(rec.image_id, "photo04");
  EXPECT_EQ(rec.endpoint_label, "Q4_K_M");
}

TEST(MockBackend, RealLatencyIsMeasured) {
  auto mock = mock_from(R"({"fixtures": {"a": {"text": "crack", "latency": 0.5}}})");
  const ModelClient client(mock);
  const auto rec = client.describe_image("a", tiny_png, "p", vision(), {});
  ASSERT_TRUE(rec.success);
  EXPECT_GE(rec.inference_seconds, 0.5);
  EXPECT_LE(rec.inference_seconds, 0.6);
}

TEST(MockBackend, ZeroLatencyStillPositive) {
  auto mock = mock_from(R"({"fixtures": {"a": "crack"}})");
  const auto rec = ModelClient(mock).describe_image("a", tiny_png, "p", vision(), {});
  ASSERT_TRUE(rec.success);
  EXPECT_GT(rec.inference_seconds, 0.0);
}

TEST(MockBackend, ContentHashKey) {
  const std::string key = "sha256:" + util::sha256_hex(tiny_png);
  auto mock = std::make_shared<MockBackend>(
      MockBackend::from_json({{"fixtures", {{key, "hash keyed"}}}, {"unknown", {{"policy", "fail"}}}}));
  const ModelClient client(mock);
  EXPECT_EQ(client.describe_image("any-name", tiny_png, "p", vision(), {}).text, "hash keyed");
  EXPECT_EQ(client.describe_image("other-name", tiny_png, "p", vision(), {}).text, "hash keyed");
}

TEST(MockBackend, UnknownImagePolicies) {
  auto fallback = mock_from(R"({"fixtures": {"a": "x"}, "unknown": {"policy": "fallback", "text": "generic"}})");
  EXPECT_EQ(ModelClient(fallback).describe_image("zzz", tiny_png, "p", vision(), {}).text, "generic");
  auto fail = mock_from(R"({"fixtures": {"a": "x"}, "unknown": {"policy": "fail"}})");
  const auto rec = ModelClient(fail).describe_image("zzz", tiny_png, "p", vision(), {});
  EXPECT_FALSE(rec.success);
  EXPECT_EQ(rec.attempts, 1);
  ASSERT_TRUE(rec.error_detail.has_value());
  EXPECT_NE(rec.error_detail->find("404"), std::string::npos);
}

TEST(MockBackend, ConfigErrors) {
  EXPECT_THROW(MockBackend::from_json(nlohmann::json::parse(R"({"fixtures": {}})")), ConfigError);
  EXPECT_THROW(MockBackend::from_json(nlohmann::json::parse(R"({"fixtures": {"a": "x"}, "failures": {"a": "meltdown"}})")),
               ConfigError);
  EXPECT_THROW(MockBackend::from_json(nlohmann::json::parse(R"({"fixtures": {"a": {"latency": 1}}})")), ConfigError);
}

TEST(MockBackend, FailureModes) {
  auto mock = mock_from(R"({"fixtures": {"ok": "x"},
    "failures": {"t": "transport", "e500": "http_500", "e400": "http_400", "bad": "malformed"}})");
  const ModelClient client(mock, ClientOptions{std::chrono::milliseconds(1000), 1, 576});
  auto rec = client.describe_image("t", tiny_png, "p", vision(), {});
  EXPECT_FALSE(rec.success);
  EXPECT_EQ(rec.attempts, 2);
  rec = client.describe_image("e500", tiny_png, "p", vision(), {});
  EXPECT_FALSE(rec.success);
  EXPECT_EQ(rec.attempts, 2);
  rec = client.describe_image("e400", tiny_png, "p", vision(), {});
  EXPECT_FALSE(rec.success);
  EXPECT_EQ(rec.attempts, 1);
  rec = client.describe_image("bad", tiny_png, "p", vision(), {});
  EXPECT_FALSE(rec.success);
  EXPECT_TRUE(rec.error_detail.has_value());
  EXPECT_TRUE(rec.text.empty());
}

TEST(ModelClient, RetryTimingCoversOnlyFinalAttempt) {
  auto flaky = std::make_shared<FlakyTransport>(1, 0);
  const auto rec = ModelClient(flaky).describe_image("a", tiny_png, "p", vision(), {});
  ASSERT_TRUE(rec.success);
  EXPECT_EQ(rec.attempts, 2);
  EXPECT_DOUBLE_EQ(rec.inference_seconds, 1.25);

  auto no_retry_on_4xx = std::make_shared<FlakyTransport>(1, 422);
  const auto rec2 = ModelClient(no_retry_on_4xx).describe_image("a", tiny_png, "p", vision(), {});
  EXPECT_FALSE(rec2.success);
  EXPECT_EQ(no_retry_on_4xx->calls, 1);

  auto exhausted = std::make_shared<FlakyTransport>(5, 503);
  const auto rec3 = ModelClient(exhausted, ClientOptions{std::chrono::milliseconds(1000), 2, 576})
                        .describe_image("a", tiny_png, "p", vision(), {});
  EXPECT_FALSE(rec3.success);
  EXPECT_EQ(exhausted->calls, 3);
}

TEST(ModelClient, ContextWarningStillSendsRequest) {
  auto mock = mock_from(R"({"fixtures": {"a": "crack"}})");
  SamplingParams s;
  s.context_length = 600;
  const auto rec = ModelClient(mock).describe_image("a", tiny_png, "p", vision(), s);
  EXPECT_TRUE(rec.success);
  ASSERT_EQ(rec.warnings.size(), 1U);
  const auto ok = ModelClient(mock).describe_image("a", tiny_png, "p", vision(), {});
  EXPECT_TRUE(ok.warnings.empty());
}

TEST(ModelClient, KindMismatchFailsWithoutSending) {
  auto flaky = std::make_shared<FlakyTransport>(0, 0);
  ModelEndpoint text_ep = vision();
  text_ep.kind = EndpointKind::text;
  EXPECT_FALSE(ModelClient(flaky).describe_image("a", tiny_png, "p", text_ep, {}).success);
  EXPECT_FALSE(ModelClient(flaky).complete_text("p", vision(), {}).success);
  EXPECT_EQ(flaky->calls, 0);
}

TEST(ModelClient, CompleteTextEchoesCannedResponse) {
  auto mock = mock_from(R"({"text_response": "{\"damage_type\": \"crack\"}"})");
  ModelEndpoint ep = vision("structurer");
  ep.kind = EndpointKind::text;
  const auto out = ModelClient(mock).complete_text("extract", ep, {});
  ASSERT_TRUE(out.success);
  EXPECT_EQ(out.text, "{\"damage_type\": \"crack\"}");
}

TEST(ModelClient, UnreachableEndpointIsRecordedFailure) {
  const auto rec = ModelClient(std::make_shared<HttpTransport>(), ClientOptions{std::chrono::milliseconds(500), 1, 576})
                       .describe_image("a", tiny_png, "p", vision("Q4", "http://127.0.0.1:1/v1"), {});
  EXPECT_FALSE(rec.success);
  ASSERT_TRUE(rec.error_detail.has_value());
  EXPECT_FALSE(rec.error_detail->empty());
  EXPECT_EQ(rec.attempts, 2);
}

TEST(DescriptionRecord, JsonRoundTrip) {
  DescriptionRecord r{"img", "Q5", "ひび割れ", 4, 5.67, true, std::nullopt, 1, 10, 20, {"w"}};
  EXPECT_EQ(nlohmann::json(r).get<DescriptionRecord>(), r);
  r.success = false;
  r.error_detail = "boom";
  r.prompt_tokens.reset();
  EXPECT_EQ(nlohmann::json(r).get<DescriptionRecord>(), r);
}

TEST(HttpTransport, TalksToOpenAiCompatibleServer) {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_path;
  nlohmann::json seen_body;
  server.Post(R"(/v1/chat/completions)", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    seen_path = req.path;
    seen_body = nlohmann::json::parse(req.body);
    if (hits == 1) {
      res.status = 503;
      res.set_content("busy", "text/plain");
      return;
    }
    res.set_content(MockBackend::completion_body("Spalling at the pier."), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const auto ep = vision("Q8_0", "http://127.0.0.1:" + std::to_string(port) + "/v1");
  const auto rec = ModelClient(std::make_shared<HttpTransport>()).describe_image("a", tiny_png, "describe", ep, {});
  server.stop();
  th.join();

  ASSERT_TRUE(rec.success) << rec.error_detail.value_or("");
  EXPECT_EQ(rec.text, "Spalling at the pier.");
  EXPECT_EQ(rec.attempts, 2);
  EXPECT_EQ(hits.load(), 2);
  EXPECT_EQ(seen_path, "/v1/chat/completions");
  EXPECT_EQ(request_image_bytes(seen_body.dump()), tiny_png);
}
