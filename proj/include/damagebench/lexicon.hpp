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
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "damagebench/damage.hpp"
#include "damagebench/default_lexicon.hpp"
#include "damagebench/errors.hpp"
#include "damagebench/text.hpp"

namespace damagebench {

/// A compiled extent pattern together with its source text for auditing.
struct ExtentPattern {
  std::string source;
  std::regex regex;
};

/// Keyword lists shared by the rubric and the rule-based extractor.
///
/// The file format groups terms per field and per language:
///
///     "damage_types": { "crack": { "en": [...], "ja": [...] }, ... },
///     "severity":     { "severe": {...}, "moderate": {...}, "minor": {...} },
///     "risk":         { "high": {...}, "medium": {...}, "low": {...} },
///     "location":     { "en": [...], "ja": [...] },
///     "extent":       { "en": [...], "ja": [...] },
///     "extent_patterns": [ "<ECMAScript regex>", ... ],
///     "damage_type_priority": [ "rebar_exposure", ... ]
///
/// A plain array is accepted wherever a per-language object is. All terms are
/// stored normalized (NFKC + lowercase) with languages merged.
struct Lexicon {
  std::map<DamageType, std::vector<std::string>> damage_type_terms;
  std::map<Severity, std::vector<std::string>> severity_terms;
  std::map<Risk, std::vector<std::string>> risk_terms;
  std::vector<std::string> location_terms;
  std::vector<std::string> extent_terms;
  std::vector<ExtentPattern> extent_patterns;
  // Most structurally critical first; used when several types match.
  std::vector<DamageType> damage_type_priority;

  void validate() const {
    auto require = [](const std::vector<std::string>& terms, const std::string& what) {
      if (terms.empty()) {
        throw ConfigError("lexicon: empty synonym list for " + what);
      }
    };
    for (const auto& [type, name] : damage_type_names) {
      if (type == DamageType::unknown) {
        continue;
      }
      const auto it = damage_type_terms.find(type);
      require(it == damage_type_terms.end() ? std::vector<std::string>{} : it->second,
              "damage type " + std::string(name));
    }
    for (const auto& [sev, name] : severity_names) {
      if (sev == Severity::unknown) {
        continue;
      }
      const auto it = severity_terms.find(sev);
      require(it == severity_terms.end() ? std::vector<std::string>{} : it->second,
              "severity " + std::string(name));
    }
    for (const auto& [risk, name] : risk_names) {
      if (risk == Risk::unknown) {
        continue;
      }
      const auto it = risk_terms.find(risk);
      require(it == risk_terms.end() ? std::vector<std::string>{} : it->second, "risk " + std::string(name));
    }
    require(location_terms, "location");
    require(extent_terms, "extent");
  }

  /// Union of all severity levels, as used by the rubric.
  std::vector<std::string> all_severity_terms() const {
    std::vector<std::string> out;
    for (const auto& [_, terms] : severity_terms) {
      out.insert(out.end(), terms.begin(), terms.end());
    }
    return out;
  }

  static Lexicon from_json(const nlohmann::json& j) {
    Lexicon lex;
    auto terms_of = [](const nlohmann::json& node, const std::string& what) {
      std::vector<std::string> out;
      auto add_list = [&](const nlohmann::json& list) {
        if (!list.is_array()) {
          throw ConfigError("lexicon: expected a list of strings for " + what);
        }
        for (const auto& t : list) {
          if (!t.is_string()) {
            throw ConfigError("lexicon: non-string term in " + what);
          }
          auto norm = text::normalize(text::trim(t.get<std::string>()));
          if (!norm.empty() && std::find(out.begin(), out.end(), norm) == out.end()) {
            out.push_back(std::move(norm));
          }
        }
      };
      if (node.is_object()) {
        for (const auto& [lang, list] : node.items()) {
          add_list(list);
        }
      } else {
        add_list(node);
      }
      return out;
    };

    try {
      for (const auto& [name, node] : j.at("damage_types").items()) {
        const auto type = parse_damage_type(name);
        if (!type || *type == DamageType::unknown) {
          throw ConfigError("lexicon: unknown damage type '" + name + "'");
        }
        lex.damage_type_terms[*type] = terms_of(node, name);
      }
      for (const auto& [name, node] : j.at("severity").items()) {
        const auto sev = parse_severity(name);
        if (!sev || *sev == Severity::unknown) {
          throw ConfigError("lexicon: unknown severity '" + name + "'");
        }
        lex.severity_terms[*sev] = terms_of(node, name);
      }
      for (const auto& [name, node] : j.at("risk").items()) {
        const auto risk = parse_risk(name);
        if (!risk || *risk == Risk::unknown) {
          throw ConfigError("lexicon: unknown risk '" + name + "'");
        }
        lex.risk_terms[*risk] = terms_of(node, name);
      }
      lex.location_terms = terms_of(j.at("location"), "location");
      lex.extent_terms = terms_of(j.at("extent"), "extent");
      for (const auto& p : j.value("extent_patterns", nlohmann::json::array())) {
        const auto src = p.get<std::string>();
        try {
          lex.extent_patterns.push_back({src, std::regex(src, std::regex::ECMAScript)});
        } catch (const std::regex_error& e) {
          throw ConfigError("lexicon: bad extent pattern '" + src + "': " + e.what());
        }
      }
      if (j.contains("damage_type_priority")) {
        for (const auto& p : j.at("damage_type_priority")) {
          const auto type = parse_damage_type(p.get<std::string>());
          if (!type || *type == DamageType::unknown) {
            throw ConfigError("lexicon: unknown damage type in priority list");
          }
          lex.damage_type_priority.push_back(*type);
        }
      } else {
        lex.damage_type_priority = {DamageType::rebar_exposure, DamageType::spalling, DamageType::corrosion,
                                    DamageType::crack, DamageType::efflorescence};
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("lexicon: ") + e.what());
    }
    // Types missing from the priority list rank after the listed ones.
    for (const auto& [type, _] : lex.damage_type_terms) {
      if (std::find(lex.damage_type_priority.begin(), lex.damage_type_priority.end(), type) ==
          lex.damage_type_priority.end()) {
        lex.damage_type_priority.push_back(type);
      }
    }
    lex.validate();
    return lex;
  }

  static Lexicon load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
      throw ConfigError("cannot open lexicon " + path.string());
    }
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("lexicon " + path.string() + ": " + e.what());
    }
  }

  static const Lexicon& defaults() {
    static const Lexicon lex = from_json(nlohmann::json::parse(detail::default_lexicon_json));
    return lex;
  }
};

} // namespace damagebench
