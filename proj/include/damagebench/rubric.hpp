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
#include <cmath>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "damagebench/damage.hpp"
#include "damagebench/errors.hpp"
#include "damagebench/lexicon.hpp"
#include "damagebench/text.hpp"

// Automated 5-point description quality rubric:
//   damage types  up to 2.0 (0.5 per distinct recognized type)
//   severity      1.0 when any severity term is present
//   location      1.0 when any spatial term is present
//   extent        1.0 when any coverage term or quantity pattern is present

namespace damagebench::rubric {

inline constexpr double perfect_threshold = 4.5;

struct Weights {
  std::vector<DamageType> scored_types{DamageType::crack, DamageType::rebar_exposure, DamageType::corrosion,
                                       DamageType::spalling};
  double type_weight = 0.5;
  double types_cap = 2.0;

  void validate() const {
    if (scored_types.empty() || !(type_weight > 0.0) || !(types_cap > 0.0)) {
      throw ConfigError("rubric: scored types must be nonempty and weights positive");
    }
  }
};

enum class Component { types, severity, location, extent };

inline std::string_view to_string(Component c) {
  switch (c) {
  case Component::types:
    return "types";
  case Component::severity:
    return "severity";
  case Component::location:
    return "location";
  case Component::extent:
    return "extent";
  }
  return "?";
}

struct MatchedTerm {
  Component component;
  // For the types component: the damage type name; otherwise the matched term.
  std::string term;

  friend bool operator==(const MatchedTerm&, const MatchedTerm&) = default;
};

struct QualityScore {
  double types_points = 0.0;
  double severity_points = 0.0;
  double location_points = 0.0;
  double extent_points = 0.0;
  double total = 0.0;
  std::vector<MatchedTerm> matched_terms;

  friend bool operator==(const QualityScore&, const QualityScore&) = default;
};

namespace detail {

inline const std::string* first_match(std::string_view normalized, std::span<const std::string> terms) {
  for (const auto& t : terms) {
    if (text::contains_term(normalized, t)) {
      return &t;
    }
  }
  return nullptr;
}

} // namespace detail

/// Distinct scored damage types mentioned, weight each, capped.
inline double score_damage_types(std::string_view normalized, const Lexicon& lexicon, const Weights& weights,
                                 std::vector<MatchedTerm>* audit = nullptr) {
  double points = 0.0;
  for (const auto type : weights.scored_types) {
    const auto it = lexicon.damage_type_terms.find(type);
    if (it == lexicon.damage_type_terms.end()) {
      continue;
    }
    if (detail::first_match(normalized, it->second) != nullptr) {
      points += weights.type_weight;
      if (audit) {
        audit->push_back({Component::types, std::string(to_string(type))});
      }
    }
  }
  return std::min(points, weights.types_cap);
}

inline double score_severity(std::string_view normalized, const Lexicon& lexicon,
                             std::vector<MatchedTerm>* audit = nullptr) {
  const auto terms = lexicon.all_severity_terms();
  if (const auto* t = detail::first_match(normalized, terms)) {
    if (audit) {
      audit->push_back({Component::severity, *t});
    }
    return 1.0;
  }
  return 0.0;
}

inline double score_location(std::string_view normalized, const Lexicon& lexicon,
                             std::vector<MatchedTerm>* audit = nullptr) {
  if (const auto* t = detail::first_match(normalized, lexicon.location_terms)) {
    if (audit) {
      audit->push_back({Component::location, *t});
    }
    return 1.0;
  }
  return 0.0;
}

inline double score_extent(std::string_view normalized, const Lexicon& lexicon,
                           std::vector<MatchedTerm>* audit = nullptr) {
  if (const auto* t = detail::first_match(normalized, lexicon.extent_terms)) {
    if (audit) {
      audit->push_back({Component::extent, *t});
    }
    return 1.0;
  }
  const std::string haystack(normalized);
  for (const auto& pattern : lexicon.extent_patterns) {
    std::smatch m;
    if (std::regex_search(haystack, m, pattern.regex)) {
      if (audit) {
        audit->push_back({Component::extent, m.str()});
      }
      return 1.0;
    }
  }
  return 0.0;
}

/// Scores raw description text (normalization happens here).
inline QualityScore score_description(std::string_view description, const Lexicon& lexicon,
                                      const Weights& weights = {}) {
  const std::string normalized = text::normalize(description);
  QualityScore s;
  s.types_points = score_damage_types(normalized, lexicon, weights, &s.matched_terms);
  s.severity_points = score_severity(normalized, lexicon, &s.matched_terms);
  s.location_points = score_location(normalized, lexicon, &s.matched_terms);
  s.extent_points = score_extent(normalized, lexicon, &s.matched_terms);
  s.total = s.types_points + s.severity_points + s.location_points + s.extent_points;
  return s;
}

/// Rebuilds the total from the audit trail and weight table alone.
inline double total_from_audit(std::span<const MatchedTerm> audit, const Weights& weights = {}) {
  double types = 0.0;
  bool severity = false;
  bool location = false;
  bool extent = false;
  for (const auto& m : audit) {
    switch (m.component) {
    case Component::types:
      types += weights.type_weight;
      break;
    case Component::severity:
      severity = true;
      break;
    case Component::location:
      location = true;
      break;
    case Component::extent:
      extent = true;
      break;
    }
  }
  return std::min(types, weights.types_cap) + (severity ? 1.0 : 0.0) + (location ? 1.0 : 0.0) +
         (extent ? 1.0 : 0.0);
}

struct QualitySummary {
  double mean = 0.0;
  double std_dev = 0.0;  // sample (N-1); 0 when n == 1
  double perfect_rate = 0.0;
  std::size_t n = 0;
  bool std_dev_degenerate = false;  // set when n == 1

  friend bool operator==(const QualitySummary&, const QualitySummary&) = default;
};

inline QualitySummary aggregate_totals(std::span<const double> totals) {
  if (totals.empty()) {
    throw StatsError("aggregate_quality: no scores to aggregate");
  }
  QualitySummary q;
  q.n = totals.size();
  // Sorting first makes the floating-point sums order independent.
  std::vector<double> sorted(totals.begin(), totals.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  std::size_t perfect = 0;
  for (const double t : sorted) {
    sum += t;
    if (t >= perfect_threshold) {
      ++perfect;
    }
  }
  q.mean = sum / static_cast<double>(q.n);
  if (q.n == 1) {
    q.std_dev_degenerate = true;
  } else {
    double ss = 0.0;
    for (const double t : sorted) {
      ss += (t - q.mean) * (t - q.mean);
    }
    q.std_dev = std::sqrt(ss / static_cast<double>(q.n - 1));
  }
  q.perfect_rate = static_cast<double>(perfect) / static_cast<double>(q.n);
  return q;
}

inline QualitySummary aggregate_quality(std::span<const QualityScore> scores) {
  std::vector<double> totals;
  totals.reserve(scores.size());
  for (const auto& s : scores) {
    totals.push_back(s.total);
  }
  return aggregate_totals(totals);
}

} // namespace damagebench::rubric
