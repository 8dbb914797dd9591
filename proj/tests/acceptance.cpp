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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "damagebench/harness.hpp"
#include "damagebench/imageprep.hpp"
#include "damagebench/priority.hpp"
#include "damagebench/rubric.hpp"
#include "damagebench/stats.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace damagebench;
namespace fs = std::filesystem;

namespace tol {
constexpr double delta_pp = 0.1;  // percentage points
constexpr double bonferroni = 1e-6;
constexpr double p_value = 1e-9;
constexpr double pearson_exact = 1e-12;
constexpr double pearson_affine = 1e-9;
constexpr double nlm_levels = 1.0;  // intensity levels
constexpr double throughput_rel = 0.01;
constexpr double mann_whitney_seconds = 5.0;
constexpr double pearson_seconds = 5.0;
constexpr double preprocess_seconds = 10.0;
constexpr double mock_run_seconds = 30.0;
} // namespace tol

namespace {

using V = std::vector<double>;

struct Verdict {
  bool pass = true;
  std::vector<std::string> failures;
  std::string summary;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures.push_back(what);
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec) { return report::fixed(v, prec); }

Verdict efficiency_reproduction() {
  Verdict v;
  struct Row {
    const char* label;
    double quality, time, published;
  };
  const Row rows[] = {{"Q4_K_M", 2.93, 5.43, 0.54}, {"Q5_K_M", 3.18, 5.67, 0.56}, {"Q8_0", 3.27, 7.63, 0.43}};
  std::string effs;
  for (const auto& r : rows) {
    const double e = stats::efficiency(r.quality, r.time);
    effs += (effs.empty() ? "" : "/") + fmt(e, 2);
    v.require(fmt(e, 2) == fmt(r.published, 2), std::string(r.label) + " efficiency " + fmt(e, 4));
  }
  const double dq = stats::percent_delta(3.18, 2.93);
  const double dt = stats::percent_delta(7.63, 5.67);
  v.require(std::abs(dq - 8.5) <= tol::delta_pp, "quality delta " + fmt(dq, 3));
  v.require(std::abs(dt - 34.6) <= tol::delta_pp, "time delta " + fmt(dt, 3));
  v.summary = "efficiencies " + effs + ", quality " + report::signed_percent(dq, 2) + ", time " +
              report::signed_percent(dt, 2);
  return v;
}

Verdict bonferroni() {
  Verdict v;
  const double a = stats::bonferroni(0.05, 3);
  v.require(std::abs(a - 0.016667) <= tol::bonferroni, "adjusted alpha " + fmt(a, 8));
  v.require(fmt(a, 3) == "0.017", "displayed " + fmt(a, 3));
  v.summary = "alpha " + fmt(a, 6) + " shown as " + fmt(a, 3);
  return v;
}

Verdict mann_whitney_suite() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  double worst_p = 0.0;
  int u_mismatch = 0, sym_mismatch = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = oracle::rubric_sample(rng, 1 + rng() % 12);
    const auto y = oracle::rubric_sample(rng, 1 + rng() % 12);
    const auto xy = stats::mann_whitney_u(x, y);
    const auto yx = stats::mann_whitney_u(y, x);
    u_mismatch += xy.u_statistic != oracle::u_brute_force(x, y);
    sym_mismatch += xy.u_statistic + yx.u_statistic != static_cast<double>(x.size() * y.size());
    worst_p = std::max(worst_p, std::abs(xy.p_value - oracle::u_reference_p(x, y)));
  }
  const double elapsed = seconds_since(t0);
  v.require(u_mismatch == 0, std::to_string(u_mismatch) + " U mismatches");
  v.require(sym_mismatch == 0, std::to_string(sym_mismatch) + " symmetry violations");
  v.require(worst_p <= tol::p_value, "max p error " + std::to_string(worst_p));
  v.require(elapsed < tol::mann_whitney_seconds, "took " + fmt(elapsed, 2) + " s");
  std::ostringstream s;
  s << "1000 pairs, max |dp| " << worst_p << ", " << fmt(elapsed, 3) << " s";
  v.summary = s.str();
  return v;
}

Verdict pearson_suite() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const double pos = stats::pearson_r(V{1, 2, 3, 4, 5}, V{3, 5, 7, 9, 11});
  const double neg = stats::pearson_r(V{1, 2, 3, 4, 5}, V{10, 8, 6, 4, 2});
  const double mid = stats::pearson_r(V{1, 2, 3, 4}, V{1, 3, 2, 4});
  v.require(std::abs(pos - 1.0) <= tol::pearson_exact, "linear r " + std::to_string(pos));
  v.require(std::abs(neg + 1.0) <= tol::pearson_exact, "anti-linear r " + std::to_string(neg));
  v.require(std::abs(mid - 0.8) <= tol::pearson_exact, "[1,3,2,4] r " + std::to_string(mid));
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-10.0, 10.0), scale(0.1, 5.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 3 + rng() % 20;
    V x(n), y(n), xt(n), yt(n);
    for (auto& e : x) e = u(rng);
    for (auto& e : y) e = u(rng);
    const double a = scale(rng), b = u(rng), c = scale(rng), d = u(rng);
    for (std::size_t k = 0; k < n; ++k) {
      xt[k] = a * x[k] + b;
      yt[k] = c * y[k] + d;
    }
    worst = std::max(worst, std::abs(stats::pearson_r(xt, yt) - stats::pearson_r(x, y)));
  }
  const double elapsed = seconds_since(t0);
  v.require(worst <= tol::pearson_affine, "affine drift " + std::to_string(worst));
  v.require(elapsed < tol::pearson_seconds, "took " + fmt(elapsed, 2) + " s");
  std::ostringstream s;
  s << "r(1,3,2,4)=" << fmt(mid, 12) << ", max affine drift " << worst;
  v.summary = s.str();
  return v;
}

Verdict rubric_determinism() {
  Verdict v;
  std::ifstream in(testsupport::source_dir / "fixtures/descriptions.txt");
  std::vector<std::string> texts;
  for (std::string line; std::getline(in, line);) {
    texts.push_back(line);
  }
  v.require(texts.size() == 12, "expected 12 texts, found " + std::to_string(texts.size()));
  const auto& lex = Lexicon::defaults();
  std::string totals;
  for (const auto& t : texts) {
    const auto a = rubric::score_description(t, lex);
    const auto b = rubric::score_description(t, lex);
    v.require(a == b, "nondeterministic score");
    v.require(a.total >= 0.0 && a.total <= 5.0, "total out of range " + fmt(a.total, 2));
    totals += (totals.empty() ? "" : " ") + fmt(a.total, 1);
  }
  if (texts.size() >= 9) {
    const auto s9 = rubric::score_description(texts[8], lex);
    v.require(texts[8].find("approximately 25%") != std::string::npos, "photo 9 text lacks the 25% phrase");
    v.require(s9.extent_points == 1.0, "photo 9 extent " + fmt(s9.extent_points, 2));
  }
  v.summary = "totals " + totals;
  return v;
}

Verdict priority_calibration() {
  Verdict v;
  const priority::PriorityConfig cfg;
  const std::vector<std::tuple<double, int, std::string>> cases{{0.692, 3, "Planned repair (1-2 years)"},
                                                                {0.712, 4, "Early repair (6 months)"},
                                                                {0.952, 5, "Immediate repair (critical)"},
                                                                {1.0, 5, "Immediate repair (critical)"}};
  for (const auto& [score, level, label] : cases) {
    const auto [l, t] = priority::urgency_level(score, cfg.urgency);
    v.require(l == level && t == label, fmt(score, 3) + " -> L" + std::to_string(l) + " " + t);
  }
  v.summary = "0.692->L3, 0.712->L4, 0.952->L5, 1.0->L5";
  return v;
}

bool constant(const ImageBuffer& img, std::uint8_t value) {
  for (const auto s : img.data()) {
    if (s != value) {
      return false;
    }
  }
  return true;
}

Verdict preprocessing_properties() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const PreprocessConfig cfg;
  const ImageBuffer flat(64, 48, 3, 128);
  v.require(nlm_denoise(flat, cfg) == flat, "NLM moved a constant image");
  const auto eq = clahe(flat, cfg);
  v.require(constant(eq, eq.data()[0]), "CLAHE broke uniformity");
  v.require(resized_dimensions(2048, 1536, 1024) == std::make_pair(1024, 768), "2048x1536 resize");
  v.require(resized_dimensions(800, 600, 1024) == std::make_pair(800, 600), "800x600 resize");
  const ImageBuffer small(800, 600, 1, 50);
  v.require(resize_max_dim(small, 1024) == small, "800x600 image changed");

  ImageBuffer salt(5, 5, 1, 100);
  salt.at(2, 2) = 255;
  PreprocessConfig sc;
  sc.nlm_strength = 5.0;
  const auto den = nlm_denoise(salt, sc);
  oracle::Img o{5, 5, 1, {}};
  for (const auto s : salt.data()) {
    o.px.push_back(s);
  }
  double worst = 0.0;
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) {
      const auto ref = oracle::nlm_pixel(o, x, y, sc.nlm_strength, sc.nlm_template_radius, sc.nlm_search_radius);
      worst = std::max(worst, std::abs(den.at(x, y) - ref.values[0]));
    }
  }
  v.require(worst <= tol::nlm_levels, "salt case off by " + fmt(worst, 3));
  const double elapsed = seconds_since(t0);
  v.require(elapsed < tol::preprocess_seconds, "took " + fmt(elapsed, 2) + " s");
  v.summary = "salt max deviation " + fmt(worst, 3) + " levels, " + fmt(elapsed, 3) + " s";
  return v;
}

Verdict end_to_end_mock_run() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  testsupport::TempDir a, b;
  std::ostringstream sink;
  harness::RunOptions quiet;
  quiet.log = &sink;
  const auto doc = testsupport::mock_run_json("run");
  const auto cfg_a = RunConfig::from_json(doc, a.path());
  const auto cfg_b = RunConfig::from_json(doc, b.path());

  // Interrupted after 7 records, then resumed twice (the second resume is a no-op).
  auto interrupted = quiet;
  interrupted.limit = 7;
  const auto partial = harness::run(cfg_a, interrupted);
  v.require(!partial.complete && partial.success_count == 7, "interrupted run state");
  const auto resumed = harness::run(cfg_a, quiet);
  const auto again = harness::run(cfg_a, quiet);
  v.require(resumed.complete && resumed.success_count == 24 && resumed.failure_count == 0,
            "resumed run " + std::to_string(resumed.success_count) + "/24");
  v.require(again.success_count == 24, "idempotent resume");

  const auto straight = harness::run(cfg_b, quiet);
  v.require(straight.success_count == 24, "uninterrupted run " + std::to_string(straight.success_count) + "/24");

  auto manifest = [](const fs::path& dir) {
    return harness::manifest_without_timestamps(nlohmann::json::parse(util::read_text_file(dir / "manifest.json")));
  };
  v.require(manifest(a / "run") == manifest(b / "run"), "resumed manifest differs");
  for (const auto& ep : cfg_a.endpoints) {
    v.require(util::read_text_file(harness::records_path(a / "run", ep.label)) ==
                  util::read_text_file(harness::records_path(b / "run", ep.label)),
              "records differ for " + ep.label);
  }

  harness::compare({a / "run"}, a / "report");
  harness::compare({b / "run"}, b / "report");
  std::vector<std::string> files{"per_image.csv", "summary.json", "report.md"};
  for (const auto name : harness::chart_files) {
    files.emplace_back(name);
  }
  std::size_t rows = 0;
  for (const auto& f : files) {
    if (!fs::exists(a / ("report/" + f))) {
      v.require(false, "missing " + f);
      continue;
    }
    const auto content = util::read_text_file(a / ("report/" + f));
    v.require(content == util::read_text_file(b / ("report/" + f)), f + " not byte-identical");
    if (f == "per_image.csv") {
      rows = static_cast<std::size_t>(std::count(content.begin(), content.end(), '\n')) - 1;
    }
  }
  v.require(rows == 24, "CSV data rows " + std::to_string(rows));
  const double elapsed = seconds_since(t0);
  v.require(elapsed < tol::mock_run_seconds, "took " + fmt(elapsed, 1) + " s");
  v.summary = "24/24 after resume, " + std::to_string(rows) + " CSV rows, 7 artifacts byte-identical, " +
              fmt(elapsed, 2) + " s";
  return v;
}

Verdict throughput_arithmetic() {
  Verdict v;
  std::mt19937_64 rng(254);
  std::normal_distribution<double> d(5.67, 1.0);
  V times(254);
  for (auto& t : times) {
    t = std::max(0.5, d(rng));
  }
  double sum = 0.0;
  for (const double t : times) {
    sum += t;
  }
  const double shift = 5.67 - sum / 254.0;
  for (auto& t : times) {
    t += shift;
  }
  const auto ts = stats::time_stats(times);
  v.require(std::abs(ts.mean - 5.67) < 1e-9, "mean " + fmt(ts.mean, 6));
  v.require(std::abs(ts.total - 1440.0) / 1440.0 <= tol::throughput_rel, "total " + fmt(ts.total, 2) + " s");
  v.require(std::abs(ts.total / 60.0 - 24.0) / 24.0 <= tol::throughput_rel, "minutes " + fmt(ts.total / 60.0, 2));
  v.summary = "total " + fmt(ts.total, 2) + " s = " + fmt(ts.total / 60.0, 2) + " min, " +
              fmt(ts.throughput * 60.0, 2) + " images/min";
  return v;
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"efficiency reproduction", efficiency_reproduction},
      {"bonferroni adjustment", bonferroni},
      {"mann-whitney oracle suite", mann_whitney_suite},
      {"pearson suite", pearson_suite},
      {"rubric determinism and bounds", rubric_determinism},
      {"priority calibration", priority_calibration},
      {"preprocessing properties", preprocessing_properties},
      {"end-to-end mock run", end_to_end_mock_run},
      {"throughput arithmetic", throughput_arithmetic},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.failures.push_back(std::string("exception: ") + e.what());
    }
    std::string detail = v.summary;
    for (const auto& f : v.failures) {
      detail += (detail.empty() ? "" : "; ") + f;
    }
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << "): " << detail
              << "\n";
    failed += v.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
