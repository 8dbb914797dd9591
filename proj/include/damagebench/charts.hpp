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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "damagebench/report.hpp"
#include "damagebench/stats.hpp"

// Static SVG charts for `compare`. Coordinates are printed with fixed
// precision so identical inputs give identical files.

namespace damagebench::charts {

inline constexpr double width = 640.0;
inline constexpr double height = 400.0;
inline constexpr double margin_left = 64.0;
inline constexpr double margin_right = 24.0;
inline constexpr double margin_top = 40.0;
inline constexpr double margin_bottom = 56.0;

inline constexpr std::string_view palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                               "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

inline std::string_view colour(std::size_t i) { return palette[i % std::size(palette)]; }

inline std::string escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
    case '&':
      out += "&amp;";
      break;
    case '<':
      out += "&lt;";
      break;
    case '>':
      out += "&gt;";
      break;
    case '"':
      out += "&quot;";
      break;
    default:
      out.push_back(c);
    }
  }
  return out;
}

inline std::string num(double v) { return report::fixed(v, 2); }

/// Step from {1, 2, 5} x 10^k giving at most ~6 ticks over [0, hi].
inline double nice_step(double hi) {
  if (!(hi > 0.0)) {
    return 1.0;
  }
  const double raw = hi / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (const double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      return m * mag;
    }
  }
  return 10.0 * mag;
}

inline double nice_max(double hi) {
  const double step = nice_step(hi);
  return std::max(step, std::ceil(hi / step - 1e-9) * step);
}

struct Axes {
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;

  double px(double x) const {
    return margin_left + (x - x_min) / (x_max - x_min) * (width - margin_left - margin_right);
  }
  double py(double y) const {
    return height - margin_bottom - (y - y_min) / (y_max - y_min) * (height - margin_top - margin_bottom);
  }
};

class Svg {
public:
  explicit Svg(std::string_view title) {
    body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
             "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    body_ += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) + "\" fill=\"white\"/>\n";
    text(width / 2.0, 22.0, title, "middle", 15);
  }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke, std::string_view extra = {}) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
             "\" stroke=\"" + std::string(stroke) + "\"" + (extra.empty() ? "" : " " + std::string(extra)) + "/>\n";
  }

  void rect(double x, double y, double w, double h, std::string_view fill) {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
             "\" fill=\"" + std::string(fill) + "\"/>\n";
  }

  void circle(double x, double y, double r, std::string_view fill) {
    body_ += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"" + num(r) + "\" fill=\"" + std::string(fill) +
             "\" fill-opacity=\"0.75\"/>\n";
  }

  void text(double x, double y, std::string_view s, std::string_view anchor = "start", int size = 12,
            std::string_view extra = {}) {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + std::string(anchor) +
             "\" font-size=\"" + std::to_string(size) + "\"" + (extra.empty() ? "" : " " + std::string(extra)) + ">" +
             escape(s) + "</text>\n";
  }

  /// Frame, ticks and axis titles. x ticks are skipped when `x_ticks` is false.
  void axes(const Axes& a, std::string_view x_title, std::string_view y_title, bool x_ticks = true) {
    const double x0 = a.px(a.x_min), x1 = a.px(a.x_max), y0 = a.py(a.y_min), y1 = a.py(a.y_max);
    line(x0, y0, x1, y0, "black");
    line(x0, y0, x0, y1, "black");
    const double ys = nice_step(a.y_max - a.y_min);
    for (double v = a.y_min; v <= a.y_max + ys * 1e-6; v += ys) {
      line(x0 - 4.0, a.py(v), x0, a.py(v), "black");
      line(x0, a.py(v), x1, a.py(v), "#dddddd");
      text(x0 - 7.0, a.py(v) + 4.0, report::fixed(v, ys < 1.0 ? 1 : 0), "end", 11);
    }
    if (x_ticks) {
      const double xs = nice_step(a.x_max - a.x_min);
      for (double v = a.x_min; v <= a.x_max + xs * 1e-6; v += xs) {
        line(a.px(v), y0, a.px(v), y0 + 4.0, "black");
        text(a.px(v), y0 + 17.0, report::fixed(v, xs < 1.0 ? 1 : 0), "middle", 11);
      }
    }
    text((x0 + x1) / 2.0, height - 12.0, x_title, "middle");
    text(16.0, (y0 + y1) / 2.0, y_title, "middle", 12,
         "transform=\"rotate(-90 16.00 " + num((y0 + y1) / 2.0) + ")\"");
  }

  void legend(std::span<const std::string> labels) {
    double y = margin_top + 6.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      rect(width - margin_right - 110.0, y, 10.0, 10.0, colour(i));
      text(width - margin_right - 95.0, y + 9.0, labels[i], "start", 11);
      y += 16.0;
    }
  }

  std::string finish() && {
    body_ += "</svg>\n";
    return std::move(body_);
  }

private:
  std::string body_;
};

/// Bars of mean inference time per endpoint with +/- one std error bars.
inline std::string mean_time_bars(const stats::ComparisonReport& rep) {
  Svg svg("Mean inference time per endpoint");
  double hi = 0.0;
  for (const auto& s : rep.summaries) {
    hi = std::max(hi, s.mean_time + s.time_std);
  }
  const Axes a{0.0, static_cast<double>(std::max<std::size_t>(rep.summaries.size(), 1)), 0.0, nice_max(hi)};
  svg.axes(a, "Endpoint", "Seconds per image", false);
  for (std::size_t i = 0; i < rep.summaries.size(); ++i) {
    const auto& s = rep.summaries[i];
    const double left = a.px(static_cast<double>(i) + 0.2);
    const double right = a.px(static_cast<double>(i) + 0.8);
    const double centre = (left + right) / 2.0;
    svg.rect(left, a.py(s.mean_time), right - left, a.py(0.0) - a.py(s.mean_time), colour(i));
    const double lo = a.py(std::max(0.0, s.mean_time - s.time_std));
    const double up = a.py(s.mean_time + s.time_std);
    svg.line(centre, lo, centre, up, "black");
    svg.line(centre - 6.0, lo, centre + 6.0, lo, "black");
    svg.line(centre - 6.0, up, centre + 6.0, up, "black");
    svg.text(centre, a.py(0.0) + 17.0, s.endpoint_label, "middle", 11);
    svg.text(centre, up - 6.0, report::fixed(s.mean_time, 2), "middle", 11);
  }
  return std::move(svg).finish();
}

/// Declared model size against total inference time.
inline std::string size_vs_total_time(const stats::ComparisonReport& rep) {
  Svg svg("Model size vs total inference time");
  double x_hi = 0.0, y_hi = 0.0;
  for (const auto& s : rep.summaries) {
    x_hi = std::max(x_hi, s.declared_size_gb);
    y_hi = std::max(y_hi, s.total_time);
  }
  const Axes a{0.0, nice_max(x_hi), 0.0, nice_max(y_hi)};
  svg.axes(a, "Declared model size (GB)", "Total time (s)");
  for (std::size_t i = 0; i < rep.summaries.size(); ++i) {
    const auto& s = rep.summaries[i];
    svg.circle(a.px(s.declared_size_gb), a.py(s.total_time), 6.0, colour(i));
    svg.text(a.px(s.declared_size_gb) + 9.0, a.py(s.total_time) - 6.0, s.endpoint_label, "start", 11);
  }
  return std::move(svg).finish();
}

/// Grouped histogram of quality totals in half-point bins over [0, 5], with a
/// dashed reference line at the baseline score.
inline std::string quality_histogram(std::span<const stats::EndpointSamples> groups, double baseline = 3.0) {
  Svg svg("Quality score distribution");
  constexpr int bins = 11;  // centres 0.0, 0.5, ..., 5.0
  std::vector<std::array<std::size_t, bins>> counts(groups.size());
  std::size_t hi = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    counts[g].fill(0);
    for (const double q : groups[g].quality_totals) {
      const int b = std::clamp(static_cast<int>(std::lround(q * 2.0)), 0, bins - 1);
      hi = std::max(hi, ++counts[g][static_cast<std::size_t>(b)]);
    }
  }
  const Axes a{-0.25, 5.25, 0.0, nice_max(static_cast<double>(hi))};
  svg.axes(a, "Quality score (0-5)", "Images", false);
  for (int b = 0; b < bins; ++b) {
    const double centre = b * 0.5;
    svg.text(a.px(centre), a.py(0.0) + 17.0, report::fixed(centre, 1), "middle", 11);
  }
  const double group_width = 0.4;
  const double bar = groups.empty() ? group_width : group_width / static_cast<double>(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (int b = 0; b < bins; ++b) {
      const auto c = counts[g][static_cast<std::size_t>(b)];
      if (c == 0) {
        continue;
      }
      const double left = b * 0.5 - group_width / 2.0 + bar * static_cast<double>(g);
      svg.rect(a.px(left), a.py(static_cast<double>(c)), a.px(left + bar) - a.px(left),
               a.py(0.0) - a.py(static_cast<double>(c)), colour(g));
    }
  }
  svg.line(a.px(baseline), a.py(0.0), a.px(baseline), a.py(a.y_max), "#444444", "stroke-dasharray=\"6 4\"");
  svg.text(a.px(baseline) + 4.0, a.py(a.y_max) + 12.0, "baseline " + report::fixed(baseline, 1), "start", 11);
  std::vector<std::string> labels;
  for (const auto& g : groups) {
    labels.push_back(g.label);
  }
  svg.legend(labels);
  return std::move(svg).finish();
}

/// Description length against quality total, one colour per endpoint.
inline std::string quality_vs_length(std::span<const stats::EndpointSamples> groups) {
  Svg svg("Quality score vs description length");
  double x_hi = 0.0;
  for (const auto& g : groups) {
    for (const double l : g.char_lengths) {
      x_hi = std::max(x_hi, l);
    }
  }
  const Axes a{0.0, nice_max(x_hi), 0.0, 5.0};
  svg.axes(a, "Description length (characters)", "Quality score");
  std::vector<std::string> labels;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    labels.push_back(groups[g].label);
    for (std::size_t i = 0; i < groups[g].quality_totals.size(); ++i) {
      svg.circle(a.px(groups[g].char_lengths[i]), a.py(groups[g].quality_totals[i]), 4.0, colour(g));
    }
  }
  svg.legend(labels);
  return std::move(svg).finish();
}

} // namespace damagebench::charts
