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

#include <cmath>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "damagebench/records.hpp"
#include "damagebench/rubric.hpp"
#include "damagebench/stats.hpp"

// Text artifacts produced by `compare` and `score-only`. Every number goes
// through fixed-precision formatting so output is byte-stable.

namespace damagebench::report {

inline std::string fixed(double v, int precision) {
  if (v == 0.0) {
    v = 0.0;  // no "-0.00"
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') {
    s.erase(0, 1);
  }
  return s;
}

inline std::string signed_percent(double v, int precision = 1) {
  const auto s = fixed(v, precision);
  return (s.front() == '-' ? s : "+" + s) + "%";
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(s);
  }
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') {
      out += "\"\"";
    } else {
      out.push_back(c);
    }
  }
  out += '"';
  return out;
}

inline constexpr std::string_view per_image_header =
    "image_id,endpoint,text_length,inference_seconds,types_points,severity_points,location_points,"
    "extent_points,quality_total,priority_score,urgency_level";

struct EndpointRecords {
  std::string label;
  double declared_size_gb = 0.0;
  int declared_bits = 0;
  std::vector<ImageRecord> records;
};

/// One row per successful record, endpoints in the given order and records
/// sorted by image id.
inline std::string per_image_csv(std::span<const EndpointRecords> endpoints) {
  std::string out(per_image_header);
  out += '\n';
  for (const auto& ep : endpoints) {
    std::map<std::string, const ImageRecord*> sorted;
    for (const auto& r : ep.records) {
      if (r.success() && r.quality && r.priority) {
        sorted.emplace(r.image_id, &r);
      }
    }
    for (const auto& [id, r] : sorted) {
      const auto& q = *r->quality;
      out += csv_field(id) + ',' + csv_field(ep.label) + ',' + std::to_string(r->description.char_length) + ',' +
             fixed(r->description.inference_seconds, 6) + ',' + fixed(q.types_points, 2) + ',' +
             fixed(q.severity_points, 2) + ',' + fixed(q.location_points, 2) + ',' + fixed(q.extent_points, 2) +
             ',' + fixed(q.total, 2) + ',' + fixed(r->priority->score, 4) + ',' +
             std::to_string(r->priority->urgency_level) + '\n';
    }
  }
  return out;
}

/// Observations fed to the statistics module.
inline stats::EndpointSamples samples_from(const EndpointRecords& ep) {
  stats::EndpointSamples s;
  s.label = ep.label;
  s.declared_size_gb = ep.declared_size_gb;
  s.declared_bits = ep.declared_bits;
  s.total_count = ep.records.size();
  std::map<std::string, const ImageRecord*> sorted;
  for (const auto& r : ep.records) {
    if (r.success() && r.quality) {
      sorted.emplace(r.image_id, &r);
    }
  }
  for (const auto& [_, r] : sorted) {
    const auto& q = *r->quality;
    s.quality_totals.push_back(q.total);
    s.inference_seconds.push_back(r->description.inference_seconds);
    s.char_lengths.push_back(static_cast<double>(r->description.char_length));
    s.components.push_back({q.types_points, q.severity_points, q.location_points, q.extent_points});
  }
  return s;
}

inline std::string markdown_report(const stats::ComparisonReport& rep) {
  std::string md = "# Quantization comparison\n\n";
  md += "- Comparisons: " + std::to_string(rep.pairwise.size()) + "\n";
  md += "- Family alpha: " + fixed(rep.alpha, 2) + "\n";
  md += "- Bonferroni-adjusted alpha: " + fixed(rep.adjusted_alpha, 5) + " (≈ " + fixed(rep.adjusted_alpha, 3) +
        ")\n\n";

  md += "## Quality and speed\n\n";
  md += "| Endpoint | Size (GB) | Quality (mean ± std) | Time s (mean ± std) | Efficiency (Q/T) | Perfect rate | "
        "Successes |\n";
  md += "|---|---|---|---|---|---|---|\n";
  for (const auto& s : rep.summaries) {
    md += "| " + s.endpoint_label + " | " + (s.declared_size_gb > 0.0 ? fixed(s.declared_size_gb, 1) : "n/a") +
          " | " + fixed(s.quality.mean, 2) + " ± " + fixed(s.quality.std_dev, 2) + " | " + fixed(s.mean_time, 2) +
          " ± " + fixed(s.time_std, 2) + " | " + fixed(s.efficiency, 2) + " | " +
          fixed(s.quality.perfect_rate * 100.0, 1) + "% | " + std::to_string(s.success_count) + "/" +
          std::to_string(s.total_count) + " |\n";
  }

  md += "\n## Throughput\n\n";
  md += "| Endpoint | Total time (s) | Total time (min) | Images per minute |\n";
  md += "|---|---|---|---|\n";
  for (const auto& s : rep.summaries) {
    md += "| " + s.endpoint_label + " | " + fixed(s.total_time, 1) + " | " + fixed(s.total_time / 60.0, 1) + " | " +
          fixed(s.throughput * 60.0, 2) + " |\n";
  }

  md += "\n## Rubric components (mean points)\n\n";
  md += "| Endpoint | Damage types | Severity | Location | Extent | Mean length (chars) |\n";
  md += "|---|---|---|---|---|---|\n";
  for (const auto& s : rep.summaries) {
    md += "| " + s.endpoint_label + " | " + fixed(s.component_means[0], 2) + " | " + fixed(s.component_means[1], 2) +
          " | " + fixed(s.component_means[2], 2) + " | " + fixed(s.component_means[3], 2) + " | " +
          fixed(s.mean_char_length, 1) + " ± " + fixed(s.char_length_std, 1) + " |\n";
  }

  md += "\n## Pairwise Mann-Whitney U tests on quality\n\n";
  md += "| Comparison | U | p-value | Significant (α = " + fixed(rep.adjusted_alpha, 3) +
        ") | Quality Δ | Time Δ | Size Δ |\n";
  md += "|---|---|---|---|---|---|---|\n";
  for (const auto& p : rep.pairwise) {
    md += "| " + p.first + " vs " + p.second + " | " + fixed(p.test.u_statistic, 1) + " | " +
          fixed(p.test.p_value, 4) + " | " + (p.significant ? "yes" : "no") + " | " +
          signed_percent(p.quality_delta_pct) + " | " + signed_percent(p.time_delta_pct) + " | " +
          (p.size_delta_pct ? signed_percent(*p.size_delta_pct) : "n/a") + " |\n";
  }

  md += "\n## Length and quality correlation\n\n";
  md += "| Endpoint | Pearson r |\n|---|---|\n";
  for (const auto& c : rep.correlations) {
    md += "| " + c.endpoint_label + " | " + (c.r ? fixed(*c.r, 3) : "undefined") + " |\n";
  }

  md += "\nQuality scores come from an automated keyword rubric. They approximate, and do not reproduce, "
        "human ratings. Times are wall-clock seconds per HTTP request. Model initialization time and GPU memory "
        "are not measured.\n";
  return md;
}

inline constexpr std::string_view score_only_header =
    "id,text_length,types_points,severity_points,location_points,extent_points,total,matched_terms";

struct ScoredText {
  std::string id;
  std::string text;
  rubric::QualityScore score;
};

inline std::string matched_terms_cell(const rubric::QualityScore& q) {
  std::string out;
  for (const auto& m : q.matched_terms) {
    if (!out.empty()) {
      out += ';';
    }
    out += std::string(rubric::to_string(m.component)) + ':' + m.term;
  }
  return out;
}

inline std::string score_only_csv(std::span<const ScoredText> rows) {
  std::string out(score_only_header);
  out += '\n';
  for (const auto& r : rows) {
    const auto& q = r.score;
    out += csv_field(r.id) + ',' + std::to_string(text::utf8_length(r.text)) + ',' + fixed(q.types_points, 2) +
           ',' + fixed(q.severity_points, 2) + ',' + fixed(q.location_points, 2) + ',' + fixed(q.extent_points, 2) +
           ',' + fixed(q.total, 2) + ',' + csv_field(matched_terms_cell(q)) + '\n';
  }
  return out;
}

} // namespace damagebench::report
