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

#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "damagebench/damage.hpp"
#include "damagebench/lexicon.hpp"
#include "damagebench/model_client.hpp"
#include "damagebench/text.hpp"

// Stage 3: description text -> StructuredDamage, through a text endpoint with
// a deterministic keyword fallback.

namespace damagebench::extraction {

enum class Provenance { llm, fallback_unparseable, fallback_endpoint_error, rule_based };

inline std::string_view to_string(Provenance p) {
  switch (p) {
  case Provenance::llm:
    return "llm";
  case Provenance::fallback_unparseable:
    return "fallback_unparseable";
  case Provenance::fallback_endpoint_error:
    return "fallback_endpoint_error";
  case Provenance::rule_based:
    return "rule_based";
  }
  return "rule_based";
}

inline std::optional<Provenance> parse_provenance(std::string_view s) {
  for (const auto p : {Provenance::llm, Provenance::fallback_unparseable, Provenance::fallback_endpoint_error,
                       Provenance::rule_based}) {
    if (to_string(p) == s) {
      return p;
    }
  }
  return std::nullopt;
}

inline bool is_fallback(Provenance p) {
  return p == Provenance::fallback_unparseable || p == Provenance::fallback_endpoint_error;
}

inline constexpr std::string_view prompt_version = "extract-v1";

inline constexpr std::string_view default_schema =
    R"({"damage_type": "crack | rebar_exposure | corrosion | spalling | efflorescence | unknown", )"
    R"("severity": "minor | moderate | severe | unknown", )"
    R"("location": "affected member and position, empty string if not stated", )"
    R"("risk": "low | medium | high | unknown", )"
    R"("key_features": ["short phrase", "..."]})";

inline constexpr std::string_view default_prompt_template =
    "You are assisting a bridge inspector. Read the damage description below and answer with one JSON "
    "object that follows the schema exactly. Use \"unknown\" for any category that the description does "
    "not state.\n\nSchema:\n{{schema}}\n\nDescription:\n{{description}}\n\nJSON:";

/// Substitutes {{description}} and {{schema}} in the template.
inline std::string render_prompt(std::string_view tmpl, std::string_view description,
                                 std::string_view schema = default_schema) {
  std::string out(tmpl);
  auto replace_all = [&out](std::string_view key, std::string_view value) {
    for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + value.size())) {
      out.replace(pos, key.size(), value);
    }
  };
  replace_all("{{schema}}", schema);
  replace_all("{{description}}", description);
  return out;
}

/// First balanced {...} span that parses as a JSON object. Braces inside JSON
/// strings are skipped; an unparseable candidate moves the scan to the next
/// opening brace.
inline std::optional<nlohmann::json> find_json_object(std::string_view s) {
  for (std::size_t start = s.find('{'); start != std::string_view::npos; start = s.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < s.size(); ++i) {
      const char c = s[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          auto j = nlohmann::json::parse(s.substr(start, i - start + 1), nullptr, false);
          if (!j.is_discarded() && j.is_object()) {
            return j;
          }
          break;
        }
      }
    }
  }
  return std::nullopt;
}

namespace detail {

inline std::string canonical_token(std::string_view s) {
  std::string out = text::normalize(text::trim(s));
  std::replace(out.begin(), out.end(), ' ', '_');
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

inline std::optional<DamageType> coerce_damage_type(std::string_view raw) {
  static const std::map<std::string, DamageType, std::less<>> aliases{
      {"cracks", DamageType::crack},           {"cracking", DamageType::crack},
      {"rebar", DamageType::rebar_exposure},   {"exposed_rebar", DamageType::rebar_exposure},
      {"corroded", DamageType::corrosion},     {"rust", DamageType::corrosion},
      {"spall", DamageType::spalling},         {"delamination", DamageType::spalling},
      {"free_lime", DamageType::efflorescence}};
  const auto token = canonical_token(raw);
  if (auto t = parse_damage_type(token)) {
    return t;
  }
  if (const auto it = aliases.find(token); it != aliases.end()) {
    return it->second;
  }
  return std::nullopt;
}

// high/medium/low are accepted as severity words too.
inline std::optional<Severity> coerce_severity(std::string_view raw) {
  const auto token = canonical_token(raw);
  if (auto s = parse_severity(token)) {
    return s;
  }
  if (token == "high") {
    return Severity::severe;
  }
  if (token == "medium") {
    return Severity::moderate;
  }
  if (token == "low") {
    return Severity::minor;
  }
  return std::nullopt;
}

inline std::optional<Risk> coerce_risk(std::string_view raw) {
  const auto token = canonical_token(raw);
  if (auto r = parse_risk(token)) {
    return r;
  }
  if (token == "moderate") {
    return Risk::medium;
  }
  if (token == "severe" || token == "critical") {
    return Risk::high;
  }
  if (token == "minor") {
    return Risk::low;
  }
  return std::nullopt;
}

} // namespace detail

/// Validates a parsed completion against the schema. Any missing field or
/// out-of-vocabulary category rejects the whole object.
inline std::optional<StructuredDamage> validate_structured(const nlohmann::json& j) {
  if (!j.is_object()) {
    return std::nullopt;
  }
  auto string_field = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key)) {
      return std::nullopt;
    }
    const auto& v = j.at(key);
    if (v.is_null()) {
      return std::string("unknown");
    }
    if (!v.is_string()) {
      return std::nullopt;
    }
    return v.get<std::string>();
  };

  StructuredDamage out;
  const auto type = string_field("damage_type");
  const auto severity = string_field("severity");
  const auto risk = string_field("risk");
  if (!type || !severity || !risk || !j.contains("location")) {
    return std::nullopt;
  }
  const auto t = detail::coerce_damage_type(*type);
  const auto s = detail::coerce_severity(*severity);
  const auto r = detail::coerce_risk(*risk);
  if (!t || !s || !r) {
    return std::nullopt;
  }
  out.damage_type = *t;
  out.severity = *s;
  out.risk = *r;

  const auto& loc = j.at("location");
  if (loc.is_string()) {
    out.location = text::trim(loc.get<std::string>());
    if (out.location == "unknown") {
      out.location.clear();
    }
  } else if (!loc.is_null()) {
    return std::nullopt;
  }

  if (j.contains("key_features") && !j.at("key_features").is_null()) {
    const auto& kf = j.at("key_features");
    if (!kf.is_array()) {
      return std::nullopt;
    }
    for (const auto& f : kf) {
      if (!f.is_string()) {
        return std::nullopt;
      }
      auto feature = text::trim(f.get<std::string>());
      if (!feature.empty()) {
        out.key_features.push_back(std::move(feature));
      }
    }
  }
  return out;
}

namespace detail {

struct TermHit {
  std::size_t pos;
  std::size_t len;
};

inline std::optional<TermHit> earliest_hit(std::string_view text, const std::vector<std::string>& terms) {
  std::optional<TermHit> best;
  for (const auto& t : terms) {
    const auto pos = text::find_term(text, t);
    if (pos != std::string_view::npos && (!best || pos < best->pos)) {
      best = TermHit{pos, t.size()};
    }
  }
  return best;
}

// Longest matching term wins; ties go to the level listed first.
template <typename Level>
Level longest_match_level(std::string_view text, const std::map<Level, std::vector<std::string>>& table,
                          std::initializer_list<Level> order, Level none) {
  Level best = none;
  std::size_t best_len = 0;
  for (const Level level : order) {
    const auto it = table.find(level);
    if (it == table.end()) {
      continue;
    }
    for (const auto& term : it->second) {
      if (term.size() > best_len && text::contains_term(text, term)) {
        best = level;
        best_len = term.size();
      }
    }
  }
  return best;
}

// Phrase spanning every location term in the first sentence that has one.
inline std::string location_phrase(std::string_view text, const std::vector<std::string>& terms) {
  static const std::vector<std::string_view> breaks{".", "!", "?", "\n", ";", "。", "！", "？"};
  std::size_t sentence_start = 0;
  while (sentence_start < text.size()) {
    std::size_t sentence_end = text.size();
    std::size_t break_len = 0;
    for (const auto b : breaks) {
      const auto p = text.find(b, sentence_start);
      if (p != std::string_view::npos && p < sentence_end) {
        sentence_end = p;
        break_len = b.size();
      }
    }
    const auto sentence = text.substr(sentence_start, sentence_end - sentence_start);
    std::size_t first = std::string_view::npos;
    std::size_t last = 0;
    for (const auto& t : terms) {
      for (auto pos = text::find_term(sentence, t); pos != std::string_view::npos;
           pos = text::find_term(sentence, t, pos + 1)) {
        first = std::min(first, pos);
        last = std::max(last, pos + t.size());
      }
    }
    if (first != std::string_view::npos) {
      return text::trim(sentence.substr(first, last - first));
    }
    if (sentence_end == text.size()) {
      break;
    }
    sentence_start = sentence_end + break_len;
  }
  return {};
}

} // namespace detail

/// Keyword extraction. Total and deterministic for any UTF-8 input.
inline StructuredDamage rule_extract(std::string_view description, const Lexicon& lexicon) {
  const std::string norm = text::normalize(description);
  StructuredDamage out;

  for (const auto type : lexicon.damage_type_priority) {
    const auto it = lexicon.damage_type_terms.find(type);
    if (it != lexicon.damage_type_terms.end() && detail::earliest_hit(norm, it->second)) {
      out.damage_type = type;
      break;
    }
  }
  out.severity = detail::longest_match_level(norm, lexicon.severity_terms,
                                             {Severity::severe, Severity::moderate, Severity::minor},
                                             Severity::unknown);
  out.risk = detail::longest_match_level(norm, lexicon.risk_terms, {Risk::high, Risk::medium, Risk::low},
                                         Risk::unknown);
  out.location = detail::location_phrase(norm, lexicon.location_terms);

  // Key features: matched damage-type phrases in text order, then extent.
  std::vector<std::pair<std::size_t, std::string>> features;
  for (const auto& [type, terms] : lexicon.damage_type_terms) {
    if (const auto hit = detail::earliest_hit(norm, terms)) {
      features.emplace_back(hit->pos, norm.substr(hit->pos, hit->len));
    }
  }
  std::sort(features.begin(), features.end());
  for (auto& [_, f] : features) {
    out.key_features.push_back(std::move(f));
  }
  if (const auto hit = detail::earliest_hit(norm, lexicon.extent_terms)) {
    out.key_features.push_back(norm.substr(hit->pos, hit->len));
  } else {
    for (const auto& p : lexicon.extent_patterns) {
      std::smatch m;
      if (std::regex_search(norm, m, p.regex)) {
        out.key_features.push_back(m.str());
        break;
      }
    }
  }
  return out;
}

struct ExtractionResult {
  StructuredDamage damage;
  Provenance provenance = Provenance::rule_based;
  std::optional<std::string> detail;  // endpoint error or raw completion on fallback
};

/// Completion text -> structured record, falling back to rule_extract when no
/// schema-valid JSON object is present.
inline ExtractionResult structure_completion(std::string_view completion, std::string_view description,
                                             const Lexicon& lexicon) {
  if (const auto j = find_json_object(completion)) {
    if (auto damage = validate_structured(*j)) {
      return {std::move(*damage), Provenance::llm, std::nullopt};
    }
  }
  return {rule_extract(description, lexicon), Provenance::fallback_unparseable, std::string(completion)};
}

/// LLM-backed extraction. Never throws for endpoint or output problems; the
/// fallback path is recorded in the provenance.
inline ExtractionResult extract_structured(const DescriptionRecord& desc, const ModelClient& client,
                                           const ModelEndpoint& endpoint, const SamplingParams& sampling,
                                           const Lexicon& lexicon,
                                           std::string_view prompt_template = default_prompt_template) {
  if (!desc.success) {
    throw DataError("extract_structured: description " + desc.image_id + " did not succeed");
  }
  const auto prompt = render_prompt(prompt_template, desc.text);
  const auto completion = client.complete_text(prompt, endpoint, sampling, RequestContext{desc.image_id, {}});
  if (!completion.success) {
    return {rule_extract(desc.text, lexicon), Provenance::fallback_endpoint_error, completion.error_detail};
  }
  return structure_completion(completion.text, desc.text, lexicon);
}

inline nlohmann::json structured_to_json(const StructuredDamage& d) {
  return {{"damage_type", to_string(d.damage_type)},
       {"severity", to_string(d.severity)},
       {"location", d.location},
       {"risk", to_string(d.risk)},
       {"key_features", d.key_features}};
}

inline StructuredDamage structured_from_json(const nlohmann::json& j) {
  StructuredDamage d;
  d.damage_type = parse_damage_type(j.at("damage_type").get<std::string>()).value_or(DamageType::unknown);
  d.severity = parse_severity(j.at("severity").get<std::string>()).value_or(Severity::unknown);
  d.location = j.at("location").get<std::string>();
  d.risk = parse_risk(j.at("risk").get<std::string>()).value_or(Risk::unknown);
  d.key_features = j.value("key_features", std::vector<std::string>{});
  return d;
}

} // namespace damagebench::extraction
