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

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "damagebench/damage.hpp"
#include "damagebench/errors.hpp"
#include "damagebench/text.hpp"

// Stage 4: weighted priority score in [0, 1] and five urgency levels.

namespace damagebench::priority {

struct Weights {
  double severity = 0.40;
  double type = 0.35;
  double location = 0.15;
  double risk = 0.10;

  void validate() const {
    if (severity < 0 || type < 0 || location < 0 || risk < 0) {
      throw ConfigError("priority weights must be non-negative");
    }
    if (std::abs(severity + type + location + risk - 1.0) > 1e-9) {
      throw ConfigError("priority weights must sum to 1");
    }
  }
};

/// Normalization tables mapping each categorical field to [0, 1].
struct PhiTables {
  std::map<Severity, double> severity{
      {Severity::severe, 1.0}, {Severity::moderate, 0.6}, {Severity::minor, 0.3}, {Severity::unknown, 0.5}};
  std::map<DamageType, double> type{{DamageType::rebar_exposure, 1.0}, {DamageType::spalling, 0.85},
                                    {DamageType::corrosion, 0.7},      {DamageType::crack, 0.6},
                                    {DamageType::efflorescence, 0.4},  {DamageType::unknown, 0.5}};
  std::map<Risk, double> risk{{Risk::high, 1.0}, {Risk::medium, 0.6}, {Risk::low, 0.3}, {Risk::unknown, 0.5}};
  // Location is free text: the highest value among matching member keywords
  // wins; nonempty text with no match scores `location_other`, empty text
  // scores `location_unknown`. Keywords are stored normalized.
  std::vector<std::pair<std::string, double>> location_keywords{
      {"girder", 1.0},    {"main girder", 1.0}, {"bearing", 1.0}, {"bearings", 1.0}, {"pier", 0.9},
      {"piers", 0.9},     {"column", 0.9},      {"beam", 0.9},    {"cross beam", 0.9}, {"deck", 0.8},
      {"slab", 0.8},      {"deck slab", 0.8},   {"abutment", 0.8}, {"joint", 0.7},    {"wall", 0.6},
      {"主桁", 1.0},      {"桁", 1.0},          {"支承", 1.0},    {"橋脚", 0.9},     {"柱", 0.9},
      {"梁", 0.9},        {"横桁", 0.9},        {"床版", 0.8},    {"橋台", 0.8},     {"壁", 0.6}};
  double location_other = 0.5;
  double location_unknown = 0.5;

  void validate() const {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    auto check = [&](const auto& table, const auto& names, const char* what) {
      for (const auto& [value, name] : names) {
        const auto it = table.find(value);
        if (it == table.end()) {
          throw ConfigError(std::string("phi table ") + what + " lacks an entry for '" + std::string(name) + "'");
        }
        if (!in_unit(it->second)) {
          throw ConfigError(std::string("phi table ") + what + " value outside [0, 1]");
        }
      }
    };
    check(severity, severity_names, "severity");
    check(type, damage_type_names, "type");
    check(risk, risk_names, "risk");
    for (const auto& [kw, v] : location_keywords) {
      if (kw.empty() || !in_unit(v)) {
        throw ConfigError("phi table location: bad keyword entry");
      }
    }
    if (!in_unit(location_other) || !in_unit(location_unknown)) {
      throw ConfigError("phi table location value outside [0, 1]");
    }
  }

  double phi_location(std::string_view location) const {
    const std::string norm = text::normalize(text::trim(location));
    if (norm.empty()) {
      return location_unknown;
    }
    double best = -1.0;
    for (const auto& [kw, v] : location_keywords) {
      if (v > best && text::contains_term(norm, kw)) {
        best = v;
      }
    }
    return best < 0.0 ? location_other : best;
  }
};

struct Contributions {
  double severity = 0.0;
  double type = 0.0;
  double location = 0.0;
  double risk = 0.0;

  double sum() const { return severity + type + location + risk; }
};

struct PriorityResult {
  double score = 0.0;
  int urgency_level = 1;
  std::string timeline;
  Contributions contributions;
};

/// Normalized field values (each in [0, 1]) before weighting.
struct PhiValues {
  double severity = 0.0;
  double type = 0.0;
  double location = 0.0;
  double risk = 0.0;
};

inline Contributions weigh(const PhiValues& phi, const Weights& w) {
  return {w.severity * phi.severity, w.type * phi.type, w.location * phi.location, w.risk * phi.risk};
}

/// Four ascending cut points and the five timeline labels (index 0 = level 1).
struct UrgencyScale {
  std::array<double, 4> thresholds{0.35, 0.55, 0.70, 0.85};
  std::array<std::string, 5> timelines{"No action required (record only)",
                                       "Monitoring (next periodic inspection)", "Planned repair (1-2 years)",
                                       "Early repair (6 months)", "Immediate repair (critical)"};

  void validate() const {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      if (!(thresholds[i] > 0.0 && thresholds[i] < 1.0)) {
        throw ConfigError("urgency thresholds must lie in (0, 1)");
      }
      if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
        throw ConfigError("urgency thresholds must be strictly ascending");
      }
    }
  }
};

/// Level 5 when score >= t4, ..., level 1 when score < t1.
inline std::pair<int, std::string> urgency_level(double score, const UrgencyScale& scale) {
  int level = 1;
  for (const double t : scale.thresholds) {
    if (score >= t) {
      ++level;
    }
  }
  return {level, scale.timelines[static_cast<std::size_t>(level - 1)]};
}

struct PriorityConfig {
  Weights weights;
  PhiTables phi;
  UrgencyScale urgency;

  void validate() const {
    weights.validate();
    phi.validate();
    urgency.validate();
  }

  static PriorityConfig from_json(const nlohmann::json& j);
  static PriorityConfig load(const std::filesystem::path& path);
};

inline PriorityResult score_from_phi(const PhiValues& phi, const PriorityConfig& cfg) {
  PriorityResult r;
  r.contributions = weigh(phi, cfg.weights);
  r.score = r.contributions.sum();
  std::tie(r.urgency_level, r.timeline) = urgency_level(r.score, cfg.urgency);
  return r;
}

inline PhiValues phi_values(const StructuredDamage& j, const PhiTables& phi) {
  return {phi.severity.at(j.severity), phi.type.at(j.damage_type), phi.phi_location(j.location),
          phi.risk.at(j.risk)};
}

/// s = w_sev*phi_sev + w_type*phi_type + w_loc*phi_loc + w_risk*phi_risk.
inline PriorityResult priority_score(const StructuredDamage& j, const PriorityConfig& cfg) {
  return score_from_phi(phi_values(j, cfg.phi), cfg);
}

inline PriorityConfig PriorityConfig::from_json(const nlohmann::json& j) {
  PriorityConfig cfg;
  try {
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      cfg.weights = {w.at("severity").get<double>(), w.at("type").get<double>(), w.at("location").get<double>(),
                     w.at("risk").get<double>()};
    }
    if (j.contains("phi")) {
      const auto& phi = j.at("phi");
      auto read_enum_table = [](const nlohmann::json& node, auto& table, auto parse, const char* what) {
        table.clear();
        for (const auto& [name, value] : node.items()) {
          const auto key = parse(name);
          if (!key) {
            throw ConfigError(std::string("phi ") + what + ": unknown category '" + name + "'");
          }
          table[*key] = value.template get<double>();
        }
      };
      if (phi.contains("severity")) {
        read_enum_table(phi.at("severity"), cfg.phi.severity, parse_severity, "severity");
      }
      if (phi.contains("type")) {
        read_enum_table(phi.at("type"), cfg.phi.type, parse_damage_type, "type");
      }
      if (phi.contains("risk")) {
        read_enum_table(phi.at("risk"), cfg.phi.risk, parse_risk, "risk");
      }
      if (phi.contains("location")) {
        const auto& loc = phi.at("location");
        cfg.phi.location_keywords.clear();
        for (const auto& [kw, value] : loc.at("keywords").items()) {
          cfg.phi.location_keywords.emplace_back(text::normalize(kw), value.get<double>());
        }
        cfg.phi.location_other = loc.value("other", cfg.phi.location_other);
        cfg.phi.location_unknown = loc.value("unknown", cfg.phi.location_unknown);
      }
    }
    if (j.contains("thresholds")) {
      const auto t = j.at("thresholds").get<std::vector<double>>();
      if (t.size() != 4) {
        throw ConfigError("urgency thresholds: expected exactly 4 cut points");
      }
      std::copy(t.begin(), t.end(), cfg.urgency.thresholds.begin());
    }
    if (j.contains("timelines")) {
      for (const auto& [level, label] : j.at("timelines").items()) {
        const int l = std::stoi(level);
        if (l < 1 || l > 5) {
          throw ConfigError("timelines: level must be 1..5");
        }
        cfg.urgency.timelines[static_cast<std::size_t>(l - 1)] = label.get<std::string>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("priority config: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ConfigError("timelines: level keys must be integers");
  }
  cfg.validate();
  return cfg;
}

inline PriorityConfig PriorityConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open priority config " + path.string());
  }
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("priority config " + path.string() + ": " + e.what());
  }
}

} // namespace damagebench::priority
