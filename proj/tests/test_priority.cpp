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
#include <set>

#include <gtest/gtest.h>

#include "damagebench/priority.hpp"

using namespace damagebench;
using namespace damagebench::priority;

namespace {

const PriorityConfig defaults{};

} // namespace

TEST(Priority, ExtremesAndMidpoint) {
  EXPECT_DOUBLE_EQ(score_from_phi({0, 0, 0, 0}, defaults).score, 0.0);
  EXPECT_NEAR(score_from_phi({1, 1, 1, 1}, defaults).score, 1.0, 1e-12);
  EXPECT_NEAR(score_from_phi({1, 1, 0.5, 0.5}, defaults).score, 0.875, 1e-12);
  EXPECT_EQ(score_from_phi({0, 0, 0, 0}, defaults).urgency_level, 1);
}

TEST(Priority, PublishedScoresMapToPublishedLevels) {
  const std::vector<std::tuple<double, int, std::string>> cases{
      {0.692, 3, "Planned repair (1-2 years)"},
      {0.712, 4, "Early repair (6 months)"},
      {0.952, 5, "Immediate repair (critical)"},
      {1.0, 5, "Immediate repair (critical)"},
  };
  for (const auto& [score, level, label] : cases) {
    const auto [l, t] = urgency_level(score, defaults.urgency);
    EXPECT_EQ(l, level) << score;
    EXPECT_EQ(t, label) << score;
  }
}

TEST(Priority, ThresholdBoundariesAreInclusive) {
  const auto& th = defaults.urgency.thresholds;
  for (std::size_t i = 0; i < th.size(); ++i) {
    EXPECT_EQ(urgency_level(th[i], defaults.urgency).first, static_cast<int>(i) + 2);
    EXPECT_EQ(urgency_level(std::nextafter(th[i], 0.0), defaults.urgency).first, static_cast<int>(i) + 1);
  }
}

TEST(Priority, ValidationRejectsBadConfigs) {
  UrgencyScale s;
  s.thresholds = {0.35, 0.35, 0.7, 0.85};
  EXPECT_THROW(s.validate(), ConfigError);
  s.thresholds = {0.0, 0.5, 0.7, 0.85};
  EXPECT_THROW(s.validate(), ConfigError);
  Weights w{0.5, 0.5, 0.5, -0.5};
  EXPECT_THROW(w.validate(), ConfigError);
  w = {0.4, 0.35, 0.15, 0.2};
  EXPECT_THROW(w.validate(), ConfigError);
  EXPECT_THROW(PriorityConfig::from_json(nlohmann::json::parse(R"({"thresholds": [0.1, 0.2]})")), ConfigError);
  EXPECT_THROW(PriorityConfig::from_json(nlohmann::json::parse(R"({"phi": {"type": {"scour": 1.0}}})")),
               ConfigError);
  EXPECT_THROW(PriorityConfig::from_json(nlohmann::json::parse(R"({"phi": {"risk": {"high": 1.0}}})")),
               ConfigError);
  EXPECT_THROW(PriorityConfig::load("/nonexistent/priority.json"), ConfigError);
}

TEST(Priority, ShippedConfigEqualsDefaults) {
  const auto file = PriorityConfig::load(std::string(DAMAGEBENCH_SOURCE_DIR) + "/configs/priority.json");
  EXPECT_DOUBLE_EQ(file.weights.severity, defaults.weights.severity);
  EXPECT_DOUBLE_EQ(file.weights.type, defaults.weights.type);
  EXPECT_DOUBLE_EQ(file.weights.location, defaults.weights.location);
  EXPECT_DOUBLE_EQ(file.weights.risk, defaults.weights.risk);
  EXPECT_EQ(file.phi.severity, defaults.phi.severity);
  EXPECT_EQ(file.phi.type, defaults.phi.type);
  EXPECT_EQ(file.phi.risk, defaults.phi.risk);
  using Kw = std::set<std::pair<std::string, double>>;
  EXPECT_EQ(Kw(file.phi.location_keywords.begin(), file.phi.location_keywords.end()),
            Kw(defaults.phi.location_keywords.begin(), defaults.phi.location_keywords.end()));
  EXPECT_EQ(file.urgency.thresholds, defaults.urgency.thresholds);
  EXPECT_EQ(file.urgency.timelines, defaults.urgency.timelines);
}

TEST(Priority, LocationPhi) {
  const auto& phi = defaults.phi;
  EXPECT_DOUBLE_EQ(phi.phi_location("bottom of the main girder near the wall"), 1.0);
  EXPECT_DOUBLE_EQ(phi.phi_location("Deck Slab"), 0.8);
  EXPECT_DOUBLE_EQ(phi.phi_location("left side"), phi.location_other);
  EXPECT_DOUBLE_EQ(phi.phi_location("  "), phi.location_unknown);
  EXPECT_DOUBLE_EQ(phi.phi_location("橋脚の下部"), 0.9);
}

TEST(Priority, StructuredRecordScore) {
  const StructuredDamage d{DamageType::rebar_exposure, Severity::severe, "girder", Risk::high, {}};
  const auto r = priority_score(d, defaults);
  EXPECT_NEAR(r.score, 1.0, 1e-12);
  EXPECT_EQ(r.urgency_level, 5);
  const StructuredDamage unknown{};
  EXPECT_NEAR(priority_score(unknown, defaults).score, 0.5, 1e-12);
  EXPECT_EQ(priority_score(unknown, defaults).urgency_level, 2);
}

TEST(PriorityProperty, ContributionsSumAndBounds) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    const PhiValues phi{u(rng), u(rng), u(rng), u(rng)};
    const auto r = score_from_phi(phi, defaults);
    ASSERT_DOUBLE_EQ(r.contributions.sum(), r.score);
    ASSERT_GE(r.score, 0.0);
    ASSERT_LE(r.score, 1.0 + 1e-12);
    ASSERT_GE(r.urgency_level, 1);
    ASSERT_LE(r.urgency_level, 5);
  }
}

TEST(PriorityProperty, MonotoneInEveryField) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    PhiValues lo{u(rng), u(rng), u(rng), u(rng)};
    PhiValues hi = lo;
    switch (i % 4) {
    case 0:
      hi.severity = std::min(1.0, lo.severity + u(rng));
      break;
    case 1:
      hi.type = std::min(1.0, lo.type + u(rng));
      break;
    case 2:
      hi.location = std::min(1.0, lo.location + u(rng));
      break;
    default:
      hi.risk = std::min(1.0, lo.risk + u(rng));
    }
    const auto a = score_from_phi(lo, defaults);
    const auto b = score_from_phi(hi, defaults);
    ASSERT_GE(b.score, a.score);
    ASSERT_GE(b.urgency_level, a.urgency_level);
  }
}
