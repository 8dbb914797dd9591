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
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "damagebench/errors.hpp"
#include "damagebench/rubric.hpp"

namespace damagebench::stats {

struct MannWhitneyResult {
  double u_statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t tie_count = 0;  // tied groups in the pooled sample

  friend bool operator==(const MannWhitneyResult&, const MannWhitneyResult&) = default;
};

/// Two-sided Mann-Whitney U test.
///
/// U counts pairs with x > y plus one half per tied pair, computed from
/// pooled mid-ranks. The p-value uses the normal approximation with
/// mu = n1*n2/2, tie-corrected variance
///   n1*n2/12 * ((N+1) - sum(t^3 - t) / (N*(N-1)))
/// and a 0.5 continuity correction. A degenerate (zero) variance yields p = 1.
inline MannWhitneyResult mann_whitney_u(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) {
    throw StatsError("mann_whitney_u: both samples must be nonempty");
  }
  struct Obs {
    double value;
    bool from_x;
  };
  std::vector<Obs> pooled;
  pooled.reserve(x.size() + y.size());
  for (const double v : x) {
    pooled.push_back({v, true});
  }
  for (const double v : y) {
    pooled.push_back({v, false});
  }
  std::sort(pooled.begin(), pooled.end(), [](const Obs& a, const Obs& b) { return a.value < b.value; });

  const double n1 = static_cast<double>(x.size());
  const double n2 = static_cast<double>(y.size());
  const double n = n1 + n2;
  double rank_sum_x = 0.0;
  double tie_term = 0.0;
  std::size_t tie_groups = 0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].value == pooled[i].value) {
      ++j;
    }
    const double t = static_cast<double>(j - i);
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].from_x) {
        rank_sum_x += mid_rank;
      }
    }
    if (t > 1.0) {
      ++tie_groups;
      tie_term += t * t * t - t;
    }
    i = j;
  }

  MannWhitneyResult r;
  r.n1 = x.size();
  r.n2 = y.size();
  r.tie_count = tie_groups;
  r.u_statistic = rank_sum_x - n1 * (n1 + 1.0) / 2.0;

  const double mu = n1 * n2 / 2.0;
  const double variance = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(variance > 0.0)) {
    r.p_value = 1.0;
    return r;
  }
  const double z = std::max(std::abs(r.u_statistic - mu) - 0.5, 0.0) / std::sqrt(variance);
  r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

/// Pearson product-moment correlation. Throws StatsError when either vector
/// is constant (correlation undefined).
inline double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw StatsError("pearson_r: vectors differ in length");
  }
  if (x.size() < 2) {
    throw StatsError("pearson_r: need at least two observations");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw StatsError("pearson_r: correlation undefined for a constant vector");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct TimeStats {
  double mean = 0.0;
  double std_dev = 0.0;  // sample (N-1); 0 when n == 1
  double throughput = 0.0;  // images per second
  double total = 0.0;
  std::size_t n = 0;
};

inline TimeStats time_stats(std::span<const double> seconds) {
  if (seconds.empty()) {
    throw StatsError("time_stats: no timings");
  }
  TimeStats t;
  t.n = seconds.size();
  for (const double s : seconds) {
    if (!(s > 0.0)) {
      throw StatsError("time_stats: timings must be positive");
    }
    t.total += s;
  }
  t.mean = t.total / static_cast<double>(t.n);
  if (t.n > 1) {
    double ss = 0.0;
    for (const double s : seconds) {
      ss += (s - t.mean) * (s - t.mean);
    }
    t.std_dev = std::sqrt(ss / static_cast<double>(t.n - 1));
  }
  t.throughput = static_cast<double>(t.n) / t.total;
  return t;
}

/// Mean quality per second of mean inference time.
inline double efficiency(double mean_quality, double mean_time) {
  if (!(mean_time > 0.0)) {
    throw StatsError("efficiency: mean time must be positive");
  }
  return mean_quality / mean_time;
}

inline double bonferroni(double alpha, std::size_t comparisons) {
  if (!(alpha > 0.0 && alpha < 1.0) || comparisons < 1) {
    throw StatsError("bonferroni: alpha must be in (0,1) and comparisons >= 1");
  }
  return alpha / static_cast<double>(comparisons);
}

/// Relative change of a over b, in percent.
inline double percent_delta(double a, double b) {
  if (b == 0.0) {
    throw StatsError("percent_delta: reference value is zero");
  }
  return (a - b) / b * 100.0;
}

/// Successful per-image observations for one endpoint.
struct EndpointSamples {
  std::string label;
  double declared_size_gb = 0.0;
  int declared_bits = 0;
  std::vector<double> quality_totals;
  std::vector<double> inference_seconds;
  std::vector<double> char_lengths;
  // Per-image (types, severity, location, extent) points; may be empty.
  std::vector<std::array<double, 4>> components;
  std::size_t total_count = 0;  // attempted images, including failures
};

struct RunSummary {
  std::string endpoint_label;
  double declared_size_gb = 0.0;
  int declared_bits = 0;
  rubric::QualitySummary quality;
  double mean_time = 0.0;
  double time_std = 0.0;
  double total_time = 0.0;
  double throughput = 0.0;
  double efficiency = 0.0;
  double mean_char_length = 0.0;
  double char_length_std = 0.0;
  std::array<double, 4> component_means{};
  std::size_t success_count = 0;
  std::size_t total_count = 0;

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

struct PairwiseComparison {
  std::string first;
  std::string second;
  MannWhitneyResult test;
  bool significant = false;
  double quality_delta_pct = 0.0;  // (mu_first - mu_second) / mu_second
  double time_delta_pct = 0.0;
  std::optional<double> size_delta_pct;

  friend bool operator==(const PairwiseComparison&, const PairwiseComparison&) = default;
};

struct LengthCorrelation {
  std::string endpoint_label;
  std::optional<double> r;  // empty when undefined (constant lengths or scores)

  friend bool operator==(const LengthCorrelation&, const LengthCorrelation&) = default;
};

struct ComparisonReport {
  std::vector<RunSummary> summaries;
  std::vector<PairwiseComparison> pairwise;
  std::vector<LengthCorrelation> correlations;
  double alpha = 0.05;
  double adjusted_alpha = 0.05;

  friend bool operator==(const ComparisonReport&, const ComparisonReport&) = default;
};

inline RunSummary summarize(const EndpointSamples& s) {
  if (s.quality_totals.size() != s.inference_seconds.size() || s.quality_totals.size() != s.char_lengths.size()) {
    throw DataError("endpoint " + s.label + ": per-image vectors differ in length");
  }
  RunSummary r;
  r.endpoint_label = s.label;
  r.declared_size_gb = s.declared_size_gb;
  r.declared_bits = s.declared_bits;
  r.quality = rubric::aggregate_totals(s.quality_totals);
  const auto t = time_stats(s.inference_seconds);
  r.mean_time = t.mean;
  r.time_std = t.std_dev;
  r.total_time = t.total;
  r.throughput = t.throughput;
  r.efficiency = efficiency(r.quality.mean, r.mean_time);
  const auto len = rubric::aggregate_totals(s.char_lengths);
  r.mean_char_length = len.mean;
  r.char_length_std = len.std_dev;
  if (!s.components.empty()) {
    for (const auto& c : s.components) {
      for (std::size_t k = 0; k < 4; ++k) {
        r.component_means[k] += c[k];
      }
    }
    for (auto& m : r.component_means) {
      m /= static_cast<double>(s.components.size());
    }
  }
  r.success_count = s.quality_totals.size();
  r.total_count = std::max(s.total_count, r.success_count);
  return r;
}

/// Per-endpoint summaries, every pairwise U test on quality totals (later
/// group vs earlier group) at a Bonferroni-adjusted alpha, and per-endpoint
/// length/quality correlations.
inline ComparisonReport compare_runs(std::span<const EndpointSamples> groups, double alpha = 0.05) {
  if (groups.size() < 2) {
    throw DataError("compare_runs: need at least two endpoint groups");
  }
  for (const auto& g : groups) {
    if (g.quality_totals.size() < 2) {
      throw DataError("compare_runs: endpoint " + g.label + " has fewer than two successful records");
    }
  }
  ComparisonReport report;
  report.alpha = alpha;
  for (const auto& g : groups) {
    report.summaries.push_back(summarize(g));
    LengthCorrelation c{g.label, std::nullopt};
    try {
      c.r = pearson_r(g.char_lengths, g.quality_totals);
    } catch (const StatsError&) {
    }
    report.correlations.push_back(c);
  }
  const std::size_t m = groups.size() * (groups.size() - 1) / 2;
  report.adjusted_alpha = bonferroni(alpha, m);
  for (std::size_t j = 1; j < groups.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const auto& a = report.summaries[j];
      const auto& b = report.summaries[i];
      PairwiseComparison pc;
      pc.first = a.endpoint_label;
      pc.second = b.endpoint_label;
      pc.test = mann_whitney_u(groups[j].quality_totals, groups[i].quality_totals);
      pc.significant = pc.test.p_value < report.adjusted_alpha;
      pc.quality_delta_pct = b.quality.mean != 0.0 ? percent_delta(a.quality.mean, b.quality.mean) : 0.0;
      pc.time_delta_pct = percent_delta(a.mean_time, b.mean_time);
      if (a.declared_size_gb > 0.0 && b.declared_size_gb > 0.0) {
        pc.size_delta_pct = percent_delta(a.declared_size_gb, b.declared_size_gb);
      }
      report.pairwise.push_back(pc);
    }
  }
  return report;
}

// JSON mapping for the summary file. Doubles are written with round-trip
// precision so a re-parsed report compares equal.

inline void to_json(nlohmann::json& j, const MannWhitneyResult& r) {
  j = {{"u_statistic", r.u_statistic}, {"p_value", r.p_value}, {"n1", r.n1}, {"n2", r.n2},
       {"tie_count", r.tie_count}};
}
inline void from_json(const nlohmann::json& j, MannWhitneyResult& r) {
  j.at("u_statistic").get_to(r.u_statistic);
  j.at("p_value").get_to(r.p_value);
  j.at("n1").get_to(r.n1);
  j.at("n2").get_to(r.n2);
  j.at("tie_count").get_to(r.tie_count);
}

inline void to_json(nlohmann::json& j, const RunSummary& s) {
  j = {{"endpoint_label", s.endpoint_label},
       {"declared_size_gb", s.declared_size_gb},
       {"declared_bits", s.declared_bits},
       {"quality",
        {{"mean", s.quality.mean},
         {"std_dev", s.quality.std_dev},
         {"perfect_rate", s.quality.perfect_rate},
         {"n", s.quality.n},
         {"std_dev_degenerate", s.quality.std_dev_degenerate}}},
       {"mean_time", s.mean_time},
       {"time_std", s.time_std},
       {"total_time", s.total_time},
       {"throughput", s.throughput},
       {"efficiency", s.efficiency},
       {"mean_char_length", s.mean_char_length},
       {"char_length_std", s.char_length_std},
       {"component_means",
        {{"types", s.component_means[0]},
         {"severity", s.component_means[1]},
         {"location", s.component_means[2]},
         {"extent", s.component_means[3]}}},
       {"success_count", s.success_count},
       {"total_count", s.total_count}};
}
inline void from_json(const nlohmann::json& j, RunSummary& s) {
  j.at("endpoint_label").get_to(s.endpoint_label);
  j.at("declared_size_gb").get_to(s.declared_size_gb);
  j.at("declared_bits").get_to(s.declared_bits);
  const auto& q = j.at("quality");
  q.at("mean").get_to(s.quality.mean);
  q.at("std_dev").get_to(s.quality.std_dev);
  q.at("perfect_rate").get_to(s.quality.perfect_rate);
  q.at("n").get_to(s.quality.n);
  q.at("std_dev_degenerate").get_to(s.quality.std_dev_degenerate);
  j.at("mean_time").get_to(s.mean_time);
  j.at("time_std").get_to(s.time_std);
  j.at("total_time").get_to(s.total_time);
  j.at("throughput").get_to(s.throughput);
  j.at("efficiency").get_to(s.efficiency);
  j.at("mean_char_length").get_to(s.mean_char_length);
  j.at("char_length_std").get_to(s.char_length_std);
  const auto& c = j.at("component_means");
  c.at("types").get_to(s.component_means[0]);
  c.at("severity").get_to(s.component_means[1]);
  c.at("location").get_to(s.component_means[2]);
  c.at("extent").get_to(s.component_means[3]);
  j.at("success_count").get_to(s.success_count);
  j.at("total_count").get_to(s.total_count);
}

inline void to_json(nlohmann::json& j, const PairwiseComparison& p) {
  j = {{"first", p.first},
       {"second", p.second},
       {"mann_whitney", p.test},
       {"significant", p.significant},
       {"quality_delta_pct", p.quality_delta_pct},
       {"time_delta_pct", p.time_delta_pct},
       {"size_delta_pct", p.size_delta_pct ? nlohmann::json(*p.size_delta_pct) : nlohmann::json(nullptr)}};
}
inline void from_json(const nlohmann::json& j, PairwiseComparison& p) {
  j.at("first").get_to(p.first);
  j.at("second").get_to(p.second);
  j.at("mann_whitney").get_to(p.test);
  j.at("significant").get_to(p.significant);
  j.at("quality_delta_pct").get_to(p.quality_delta_pct);
  j.at("time_delta_pct").get_to(p.time_delta_pct);
  const auto& s = j.at("size_delta_pct");
  p.size_delta_pct = s.is_null() ? std::nullopt : std::optional<double>(s.get<double>());
}

inline void to_json(nlohmann::json& j, const LengthCorrelation& c) {
  j = {{"endpoint_label", c.endpoint_label}, {"r", c.r ? nlohmann::json(*c.r) : nlohmann::json(nullptr)}};
}
inline void from_json(const nlohmann::json& j, LengthCorrelation& c) {
  j.at("endpoint_label").get_to(c.endpoint_label);
  const auto& r = j.at("r");
  c.r = r.is_null() ? std::nullopt : std::optional<double>(r.get<double>());
}

inline void to_json(nlohmann::json& j, const ComparisonReport& r) {
  j = {{"alpha", r.alpha},
       {"adjusted_alpha", r.adjusted_alpha},
       {"comparisons", r.pairwise.size()},
       {"summaries", r.summaries},
       {"pairwise", r.pairwise},
       {"correlations", r.correlations}};
}
inline void from_json(const nlohmann::json& j, ComparisonReport& r) {
  j.at("alpha").get_to(r.alpha);
  j.at("adjusted_alpha").get_to(r.adjusted_alpha);
  j.at("summaries").get_to(r.summaries);
  j.at("pairwise").get_to(r.pairwise);
  j.at("correlations").get_to(r.correlations);
}

} // namespace damagebench::stats
