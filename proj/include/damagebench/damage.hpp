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
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace damagebench {

enum class DamageType { crack, rebar_exposure, corrosion, spalling, efflorescence, unknown };
enum class Severity { minor, moderate, severe, unknown };
enum class Risk { low, medium, high, unknown };

inline constexpr std::array<std::pair<DamageType, std::string_view>, 6> damage_type_names{{
    {DamageType::crack, "crack"},
    {DamageType::rebar_exposure, "rebar_exposure"},
    {DamageType::corrosion, "corrosion"},
    {DamageType::spalling, "spalling"},
    {DamageType::efflorescence, "efflorescence"},
    {DamageType::unknown, "unknown"},
}};

inline constexpr std::array<std::pair<Severity, std::string_view>, 4> severity_names{{
    {Severity::minor, "minor"},
    {Severity::moderate, "moderate"},
    {Severity::severe, "severe"},
    {Severity::unknown, "unknown"},
}};

inline constexpr std::array<std::pair<Risk, std::string_view>, 4> risk_names{{
    {Risk::low, "low"},
    {Risk::medium, "medium"},
    {Risk::high, "high"},
    {Risk::unknown, "unknown"},
}};

namespace detail {

template <typename Enum, std::size_t N>
std::string_view enum_name(const std::array<std::pair<Enum, std::string_view>, N>& table, Enum value) {
  for (const auto& [e, name] : table) {
    if (e == value) {
      return name;
    }
  }
  return "unknown";
}

template <typename Enum, std::size_t N>
std::optional<Enum> enum_parse(const std::array<std::pair<Enum, std::string_view>, N>& table,
                               std::string_view name) {
  for (const auto& [e, n] : table) {
    if (n == name) {
      return e;
    }
  }
  return std::nullopt;
}

} // namespace detail

inline std::string_view to_string(DamageType t) { return detail::enum_name(damage_type_names, t); }
inline std::string_view to_string(Severity s) { return detail::enum_name(severity_names, s); }
inline std::string_view to_string(Risk r) { return detail::enum_name(risk_names, r); }

inline std::optional<DamageType> parse_damage_type(std::string_view s) {
  return detail::enum_parse(damage_type_names, s);
}
inline std::optional<Severity> parse_severity(std::string_view s) {
  return detail::enum_parse(severity_names, s);
}
inline std::optional<Risk> parse_risk(std::string_view s) { return detail::enum_parse(risk_names, s); }

/// The four categorical fields extracted from a description, plus short
/// free-text key features. "unknown" marks an absent field.
struct StructuredDamage {
  DamageType damage_type = DamageType::unknown;
  Severity severity = Severity::unknown;
  std::string location;
  Risk risk = Risk::unknown;
  std::vector<std::string> key_features;

  friend bool operator==(const StructuredDamage&, const StructuredDamage&) = default;
};

} // namespace damagebench
