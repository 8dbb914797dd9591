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

#include <random>

#include <gtest/gtest.h>

#include "damagebench/extraction.hpp"

using namespace damagebench;
using namespace damagebench::extraction;

namespace {

const Lexicon& lex() { return Lexicon::defaults(); }

ModelEndpoint text_endpoint() { return {"structurer", "mock:", "text.gguf", EndpointKind::text, 0.0, 0}; }

DescriptionRecord description(std::string text) {
  DescriptionRecord d;
  d.image_id = "img";
  d.endpoint_label = "Q4_K_M";
  d.text = std::move(text);
  d.success = true;
  d.attempts = 1;
  return d;
}

ModelClient client_answering(const std::string& answer) {
  auto mock = std::make_shared<MockBackend>(MockBackend::from_json({{"text_response", answer}}));
  return ModelClient(mock);
}

} // namespace

TEST(RuleExtract, RebarExposureDescription) {
  const auto d = rule_extract(
      "Severe rebar exposure detected. The structural integrity is compromised with visible reinforcement bars "
      "exposed through concrete deterioration.",
      lex());
  EXPECT_EQ(d.damage_type, DamageType::rebar_exposure);
  EXPECT_EQ(d.severity, Severity::severe);
  EXPECT_EQ(d.risk, Risk::high);
  EXPECT_EQ(d.location, "");
}

TEST(RuleExtract, PriorityOrderPicksRebarOverCorrosion) {
  const auto d = rule_extract("Severe rebar exposure with corrosion.", lex());
  EXPECT_EQ(d.damage_type, DamageType::rebar_exposure);
  ASSERT_GE(d.key_features.size(), 2U);
  EXPECT_EQ(d.key_features[0], "rebar exposure");
  EXPECT_EQ(d.key_features[1], "corrosion");
}

TEST(RuleExtract, EmptyTextIsAllUnknown) {
  const auto d = rule_extract("", lex());
  EXPECT_EQ(d, StructuredDamage{});
}

TEST(RuleExtract, MinorCrackOnLeftBeam) {
  const auto d = rule_extract("minor crack on the left beam", lex());
  EXPECT_EQ(d.damage_type, DamageType::crack);
  EXPECT_EQ(d.severity, Severity::minor);
  EXPECT_NE(d.location.find("left beam"), std::string::npos);
  EXPECT_EQ(d.risk, Risk::unknown);
}

TEST(RuleExtract, LongestSeverityTermWins) {
  EXPECT_EQ(rule_extract("medium severity crack", lex()).severity, Severity::moderate);
  EXPECT_EQ(rule_extract("low severity crack", lex()).severity, Severity::minor);
}

TEST(RuleExtract, JapaneseDescription) {
  const auto d = rule_extract("主桁の下面に重度の鉄筋露出が見られる。広範囲に腐食。", lex());
  EXPECT_EQ(d.damage_type, DamageType::rebar_exposure);
  EXPECT_EQ(d.severity, Severity::severe);
  EXPECT_FALSE(d.location.empty());
}

TEST(RuleExtract, ExtentPatternBecomesKeyFeature) {
  const auto d = rule_extract("Cracking covering approximately 25% area", lex());
  ASSERT_FALSE(d.key_features.empty());
  EXPECT_EQ(d.key_features.back(), "25%");
}

TEST(RuleExtract, TotalOverArbitraryInput) {
  std::mt19937 rng(42);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> len(0, 64);
  for (int i = 0; i < 500; ++i) {
    std::string s(static_cast<std::size_t>(len(rng)), '\0');
    for (auto& c : s) {
      c = static_cast<char>(byte(rng));
    }
    const auto a = rule_extract(s, lex());
    EXPECT_EQ(a, rule_extract(s, lex()));
  }
}

TEST(FindJsonObject, SkipsProseAndBracesInStrings) {
  const auto j = find_json_object(R"(Sure! Here it is: {"a": "}{", "b": {"c": 1}} done)");
  ASSERT_TRUE(j.has_value());
  EXPECT_EQ(j->at("a"), "}{");
  EXPECT_EQ(j->at("b").at("c"), 1);
  EXPECT_FALSE(find_json_object("no braces").has_value());
  EXPECT_FALSE(find_json_object("{unbalanced").has_value());
  const auto second = find_json_object("{not json} {\"x\": 2}");
  ASSERT_TRUE(second.has_value());
  EXPECT_EQ(second->at("x"), 2);
}

TEST(Validate, CoercesSynonymsAndRejectsOutOfVocabulary) {
  auto j = nlohmann::json::parse(
      R"({"damage_type": "Exposed Rebar", "severity": "high", "location": "bottom of girder", "risk": "critical",
          "key_features": ["rust stains", " "]})");
  auto d = validate_structured(j);
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->damage_type, DamageType::rebar_exposure);
  EXPECT_EQ(d->severity, Severity::severe);
  EXPECT_EQ(d->risk, Risk::high);
  EXPECT_EQ(d->location, "bottom of girder");
  EXPECT_EQ(d->key_features, std::vector<std::string>{"rust stains"});

  j["severity"] = "medium";
  EXPECT_EQ(validate_structured(j)->severity, Severity::moderate);
  j["severity"] = "low";
  EXPECT_EQ(validate_structured(j)->severity, Severity::minor);
  j["severity"] = "catastrophic";
  EXPECT_FALSE(validate_structured(j).has_value());
  j["severity"] = "minor";
  j.erase("location");
  EXPECT_FALSE(validate_structured(j).has_value());
  j["location"] = nullptr;
  j["risk"] = nullptr;
  d = validate_structured(j);
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->risk, Risk::unknown);
  EXPECT_EQ(d->location, "");
  j["key_features"] = "not a list";
  EXPECT_FALSE(validate_structured(j).has_value());
}

TEST(Structure, LlmAnswerInProseParses) {
  const auto r = structure_completion(
      R"(The result: {"damage_type": "crack", "severity": "minor", "location": "deck", "risk": "low", "key_features": []})",
      "irrelevant", lex());
  EXPECT_EQ(r.provenance, Provenance::llm);
  EXPECT_EQ(r.damage.damage_type, DamageType::crack);
  EXPECT_EQ(r.damage.location, "deck");
  EXPECT_FALSE(r.detail.has_value());
}

TEST(Structure, UnparseableFallsBackToRules) {
  const std::string desc = "Severe rebar exposure with corrosion.";
  const auto r = structure_completion("not json at all", desc, lex());
  EXPECT_EQ(r.provenance, Provenance::fallback_unparseable);
  EXPECT_EQ(r.damage, rule_extract(desc, lex()));
  EXPECT_EQ(r.detail, "not json at all");
  EXPECT_TRUE(is_fallback(r.provenance));
}

TEST(ExtractStructured, UsesTextEndpoint) {
  const auto client =
      client_answering(R"({"damage_type": "spalling", "severity": "moderate", "location": "pier", "risk": "medium"})");
  const auto r = extract_structured(description("whatever"), client, text_endpoint(), {}, lex());
  EXPECT_EQ(r.provenance, Provenance::llm);
  EXPECT_EQ(r.damage.damage_type, DamageType::spalling);
  EXPECT_EQ(r.damage.risk, Risk::medium);
}

TEST(ExtractStructured, EndpointErrorFallsBack) {
  auto mock = std::make_shared<MockBackend>(
      MockBackend::from_json({{"fixtures", {{"other", "x"}}}, {"failures", {{"img", "http_500"}}}}));
  const ModelClient client(mock);
  const auto desc = description("minor crack on the left beam");
  const auto r = extract_structured(desc, client, text_endpoint(), {}, lex());
  EXPECT_EQ(r.provenance, Provenance::fallback_endpoint_error);
  EXPECT_EQ(r.damage, rule_extract(desc.text, lex()));
  ASSERT_TRUE(r.detail.has_value());
  EXPECT_NE(r.detail->find("500"), std::string::npos);
}

TEST(ExtractStructured, FailedDescriptionIsRejected) {
  auto desc = description("x");
  desc.success = false;
  EXPECT_THROW(extract_structured(desc, client_answering("{}"), text_endpoint(), {}, lex()), DataError);
}

TEST(Prompt, RendersPlaceholders) {
  const auto p = render_prompt("A {{description}} B {{schema}} C {{description}}", "desc", "S");
  EXPECT_EQ(p, "A desc B S C desc");
  EXPECT_NE(render_prompt(default_prompt_template, "crack").find("crack"), std::string::npos);
}

TEST(StructuredJson, RoundTrip) {
  StructuredDamage d{DamageType::efflorescence, Severity::moderate, "abutment", Risk::low, {"free lime"}};
  EXPECT_EQ(structured_from_json(structured_to_json(d)), d);
  for (const auto p : {Provenance::llm, Provenance::fallback_unparseable, Provenance::fallback_endpoint_error,
                       Provenance::rule_based}) {
    EXPECT_EQ(parse_provenance(to_string(p)), p);
  }
}
