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

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "damagebench/errors.hpp"
#include "damagebench/extraction.hpp"
#include "damagebench/model_client.hpp"
#include "damagebench/priority.hpp"
#include "damagebench/rubric.hpp"
#include "damagebench/util.hpp"

namespace damagebench {

struct StructuredRecord {
  StructuredDamage damage;
  extraction::Provenance provenance = extraction::Provenance::rule_based;
  std::optional<std::string> detail;

  friend bool operator==(const StructuredRecord&, const StructuredRecord&) = default;
};

/// One image through one endpoint. The optional parts are present iff the
/// description succeeded.
struct ImageRecord {
  std::string image_id;
  DescriptionRecord description;
  std::optional<StructuredRecord> structured;
  std::optional<rubric::QualityScore> quality;
  std::optional<priority::PriorityResult> priority;

  bool success() const noexcept { return description.success; }

  bool consistent() const {
    if (description.image_id != image_id) {
      return false;
    }
    const bool all = structured && quality && priority;
    const bool none = !structured && !quality && !priority;
    return description.success ? all : none;
  }
};

namespace rubric {

inline void to_json(nlohmann::json& j, const QualityScore& q) {
  auto terms = nlohmann::json::array();
  for (const auto& m : q.matched_terms) {
    terms.push_back({{"component", to_string(m.component)}, {"term", m.term}});
  }
  j = {{"types_points", q.types_points},       {"severity_points", q.severity_points},
       {"location_points", q.location_points}, {"extent_points", q.extent_points},
       {"total", q.total},                     {"matched_terms", terms}};
}

inline void from_json(const nlohmann::json& j, QualityScore& q) {
  j.at("types_points").get_to(q.types_points);
  j.at("severity_points").get_to(q.severity_points);
  j.at("location_points").get_to(q.location_points);
  j.at("extent_points").get_to(q.extent_points);
  j.at("total").get_to(q.total);
  q.matched_terms.clear();
  for (const auto& m : j.at("matched_terms")) {
    const auto c = m.at("component").get<std::string>();
    Component comp;
    if (c == "types") {
      comp = Component::types;
    } else if (c == "severity") {
      comp = Component::severity;
    } else if (c == "location") {
      comp = Component::location;
    } else if (c == "extent") {
      comp = Component::extent;
    } else {
      throw DataError("unknown rubric component '" + c + "'");
    }
    q.matched_terms.push_back({comp, m.at("term").get<std::string>()});
  }
}

} // namespace rubric

namespace priority {

inline void to_json(nlohmann::json& j, const PriorityResult& p) {
  j = {{"score", p.score},
       {"urgency_level", p.urgency_level},
       {"timeline", p.timeline},
       {"contributions",
        {{"severity", p.contributions.severity},
         {"type", p.contributions.type},
         {"location", p.contributions.location},
         {"risk", p.contributions.risk}}}};
}

inline void from_json(const nlohmann::json& j, PriorityResult& p) {
  j.at("score").get_to(p.score);
  j.at("urgency_level").get_to(p.urgency_level);
  j.at("timeline").get_to(p.timeline);
  const auto& c = j.at("contributions");
  c.at("severity").get_to(p.contributions.severity);
  c.at("type").get_to(p.contributions.type);
  c.at("location").get_to(p.contributions.location);
  c.at("risk").get_to(p.contributions.risk);
}

} // namespace priority

inline void to_json(nlohmann::json& j, const ImageRecord& r) {
  j = {{"image_id", r.image_id}, {"description", r.description}};
  if (r.structured) {
    auto s = extraction::structured_to_json(r.structured->damage);
    s["provenance"] = extraction::to_string(r.structured->provenance);
    s["detail"] = r.structured->detail ? nlohmann::json(*r.structured->detail) : nlohmann::json(nullptr);
    j["structured"] = std::move(s);
  } else {
    j["structured"] = nullptr;
  }
  j["quality"] = r.quality ? nlohmann::json(*r.quality) : nlohmann::json(nullptr);
  j["priority"] = r.priority ? nlohmann::json(*r.priority) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, ImageRecord& r) {
  j.at("image_id").get_to(r.image_id);
  j.at("description").get_to(r.description);
  r.structured.reset();
  r.quality.reset();
  r.priority.reset();
  if (const auto& s = j.at("structured"); !s.is_null()) {
    StructuredRecord sr;
    sr.damage = extraction::structured_from_json(s);
    const auto prov = extraction::parse_provenance(s.at("provenance").get<std::string>());
    if (!prov) {
      throw DataError("unknown provenance in record " + r.image_id);
    }
    sr.provenance = *prov;
    if (s.contains("detail") && !s.at("detail").is_null()) {
      sr.detail = s.at("detail").get<std::string>();
    }
    r.structured = std::move(sr);
  }
  if (const auto& q = j.at("quality"); !q.is_null()) {
    r.quality = q.get<rubric::QualityScore>();
  }
  if (const auto& p = j.at("priority"); !p.is_null()) {
    r.priority = p.get<priority::PriorityResult>();
  }
}

/// Append-only JSON-lines file of ImageRecords for one endpoint.
///
/// Lines that fail to parse (a write cut short by an interruption) are dropped
/// on open, and the file is rewritten without them before appending.
class RecordStore {
public:
  explicit RecordStore(std::filesystem::path path) : path_{std::move(path)} {
    std::filesystem::create_directories(path_.parent_path());
    bool dirty = false;
    if (std::filesystem::exists(path_)) {
      std::ifstream in(path_, std::ios::binary);
      std::string line;
      std::set<std::string> seen;
      while (std::getline(in, line)) {
        if (line.empty()) {
          continue;
        }
        ImageRecord r;
        try {
          r = nlohmann::json::parse(line).get<ImageRecord>();
        } catch (const nlohmann::json::exception&) {
          dirty = true;
          continue;
        } catch (const DataError&) {
          dirty = true;
          continue;
        }
        if (!seen.insert(r.image_id).second) {
          dirty = true;
          continue;
        }
        records_.push_back(std::move(r));
      }
      if (!dirty) {
        // A final line without its newline is rewritten so appends stay line aligned.
        const auto size = std::filesystem::file_size(path_);
        if (size > 0) {
          std::ifstream tail(path_, std::ios::binary);
          tail.seekg(static_cast<std::streamoff>(size - 1));
          dirty = tail.get() != '\n';
        }
      }
    }
    if (dirty) {
      std::string content;
      for (const auto& r : records_) {
        content += nlohmann::json(r).dump() + "\n";
      }
      util::write_text_file(path_, content);
    }
  }

  const std::vector<ImageRecord>& records() const noexcept { return records_; }
  const std::filesystem::path& path() const noexcept { return path_; }

  bool contains(const std::string& image_id) const {
    std::lock_guard lock(mutex_);
    for (const auto& r : records_) {
      if (r.image_id == image_id) {
        return true;
      }
    }
    return false;
  }

  void append(const ImageRecord& record) {
    const auto line = nlohmann::json(record).dump() + "\n";
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) {
      throw DataError("cannot append to " + path_.string());
    }
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.flush();
    if (!out) {
      throw DataError("write failed for " + path_.string());
    }
    records_.push_back(record);
  }

  /// Read-only load for reporting; malformed lines are skipped.
  static std::vector<ImageRecord> read(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
      throw DataError("records file not found: " + path.string());
    }
    std::vector<ImageRecord> out;
    std::set<std::string> seen;
    std::ifstream in(path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) {
        continue;
      }
      try {
        auto r = nlohmann::json::parse(line).get<ImageRecord>();
        if (seen.insert(r.image_id).second) {
          out.push_back(std::move(r));
        }
      } catch (const nlohmann::json::exception&) {
      } catch (const DataError&) {
      }
    }
    return out;
  }

private:
  std::filesystem::path path_;
  std::vector<ImageRecord> records_;
  mutable std::mutex mutex_;
};

} // namespace damagebench
