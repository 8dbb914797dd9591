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

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "damagebench/errors.hpp"
#include "damagebench/extraction.hpp"
#include "damagebench/imageprep.hpp"
#include "damagebench/lexicon.hpp"
#include "damagebench/model_client.hpp"
#include "damagebench/priority.hpp"
#include "damagebench/rubric.hpp"
#include "damagebench/util.hpp"

namespace damagebench {

namespace prompts {

inline constexpr std::string_view describe_en =
    "You are a bridge inspection expert. Describe the damage shown in this image using civil engineering "
    "terminology. Include damage type, severity, location/extent, and structural risk.";

inline constexpr std::string_view describe_ja =
    "あなたは橋梁点検の専門家です。次の画像に写る損傷を、土木構造物の専門用語を用いて簡潔に説明してください。"
    "損傷の種類、程度、位置/範囲、構造上のリスクを含めて説明してください。";

} // namespace prompts

/// Environment variable that overrides an endpoint's base_url:
/// DAMAGEBENCH_URL_<LABEL>, label uppercased with non-alphanumerics as '_'.
inline std::string endpoint_env_var(std::string_view label) {
  std::string name = "DAMAGEBENCH_URL_";
  for (const char c : label) {
    name.push_back(std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c)) : '_');
  }
  return name;
}

/// Filesystem-safe directory name for an endpoint label.
inline std::string label_dir_name(std::string_view label) {
  std::string out;
  for (const char c : label) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? "_" : out;
}

struct StructuringConfig {
  enum class Mode { rule_based, llm };
  Mode mode = Mode::rule_based;
  ModelEndpoint endpoint;  // kind == text when mode == llm
  std::string prompt_template{extraction::default_prompt_template};
};

/// Everything a run needs, resolved and validated at load time.
///
/// Paths inside the file are relative to the file's directory. Endpoints
/// whose base_url starts with "mock:" are served by a MockBackend loaded from
/// the fixture file named after the prefix.
struct RunConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path output_dir;
  std::vector<ModelEndpoint> endpoints;
  StructuringConfig structuring;
  PreprocessConfig preprocess;
  SamplingParams sampling;
  std::string describe_prompt{prompts::describe_en};
  int parallelism = 1;
  ClientOptions client;
  rubric::Weights rubric_weights;
  Lexicon lexicon = Lexicon::defaults();
  priority::PriorityConfig priority;
  std::map<std::string, std::shared_ptr<MockBackend>> mocks;  // keyed by endpoint label
  std::string config_hash;

  std::shared_ptr<Transport> transport_for(const ModelEndpoint& endpoint) const {
    if (const auto it = mocks.find(endpoint.label); it != mocks.end()) {
      return it->second;
    }
    return std::make_shared<HttpTransport>();
  }

  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

  static RunConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
      throw ConfigError("cannot open config " + path.string());
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return from_json(j, path.parent_path());
  }
};

namespace detail {

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

inline ModelEndpoint endpoint_from_json(const nlohmann::json& j, EndpointKind default_kind) {
  ModelEndpoint e;
  e.label = j.at("label").get<std::string>();
  e.base_url = j.at("base_url").get<std::string>();
  e.model_name = j.value("model_name", std::string());
  const auto kind = j.value("kind", std::string(default_kind == EndpointKind::vision ? "vision" : "text"));
  if (kind == "vision") {
    e.kind = EndpointKind::vision;
  } else if (kind == "text") {
    e.kind = EndpointKind::text;
  } else {
    throw ConfigError("endpoint " + e.label + ": kind must be 'vision' or 'text'");
  }
  e.declared_size_gb = j.value("declared_size_gb", 0.0);
  e.declared_bits = j.value("declared_bits", 0);
  if (e.label.empty()) {
    throw ConfigError("endpoint label must be nonempty");
  }
  if (const char* env = std::getenv(endpoint_env_var(e.label).c_str()); env != nullptr && *env != '\0') {
    e.base_url = env;
  }
  return e;
}

} // namespace detail

inline RunConfig RunConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  namespace fs = std::filesystem;
  RunConfig cfg;
  // Hash covers the config document plus the content of every file it pulls in.
  nlohmann::json hashed = {{"config", j}, {"files", nlohmann::json::object()}};
  auto read_referenced = [&](const fs::path& p, const std::string& what) {
    if (!fs::exists(p)) {
      throw ConfigError(what + " not found: " + p.string());
    }
    auto content = util::read_text_file(p);
    hashed["files"][what] = util::sha256_hex(content);
    return content;
  };
  auto parse_referenced = [&](const fs::path& p, const std::string& what) {
    try {
      return nlohmann::json::parse(read_referenced(p, what));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(what + " " + p.string() + ": " + e.what());
    }
  };

  try {
    cfg.corpus_dir = detail::resolve(base_dir, j.at("corpus_dir").get<std::string>());
    cfg.output_dir = detail::resolve(base_dir, j.value("output_dir", std::string("runs/latest")));
    if (!fs::is_directory(cfg.corpus_dir)) {
      throw ConfigError("corpus_dir is not a directory: " + cfg.corpus_dir.string());
    }

    std::set<std::string> labels;
    for (const auto& ej : j.at("endpoints")) {
      auto e = detail::endpoint_from_json(ej, EndpointKind::vision);
      if (e.kind != EndpointKind::vision) {
        throw ConfigError("endpoint " + e.label + ": run endpoints must be vision endpoints");
      }
      if (!labels.insert(e.label).second) {
        throw ConfigError("duplicate endpoint label " + e.label);
      }
      cfg.endpoints.push_back(std::move(e));
    }
    if (cfg.endpoints.empty()) {
      throw ConfigError("config needs at least one vision endpoint");
    }

    if (j.contains("structuring")) {
      const auto& s = j.at("structuring");
      const auto mode = s.value("mode", std::string("rule-based"));
      if (mode == "rule-based") {
        cfg.structuring.mode = StructuringConfig::Mode::rule_based;
      } else if (mode == "llm") {
        cfg.structuring.mode = StructuringConfig::Mode::llm;
        cfg.structuring.endpoint = detail::endpoint_from_json(s.at("endpoint"), EndpointKind::text);
        if (cfg.structuring.endpoint.kind != EndpointKind::text) {
          throw ConfigError("structuring endpoint must be a text endpoint");
        }
        if (labels.count(cfg.structuring.endpoint.label) != 0) {
          throw ConfigError("structuring endpoint label clashes with a vision endpoint");
        }
        if (s.contains("prompt_template")) {
          cfg.structuring.prompt_template =
              read_referenced(detail::resolve(base_dir, s.at("prompt_template").get<std::string>()),
                              "extraction prompt");
        }
      } else {
        throw ConfigError("structuring.mode must be 'rule-based' or 'llm'");
      }
    }

    if (j.contains("preprocess")) {
      const auto& p = j.at("preprocess");
      auto& pc = cfg.preprocess;
      pc.nlm_strength = p.value("nlm_strength", pc.nlm_strength);
      pc.nlm_template_radius = p.value("nlm_template_radius", pc.nlm_template_radius);
      pc.nlm_search_radius = p.value("nlm_search_radius", pc.nlm_search_radius);
      pc.nlm_sigma = p.value("nlm_sigma", pc.nlm_sigma);
      pc.max_dimension = p.value("max_dimension", pc.max_dimension);
      pc.clahe_clip_limit = p.value("clahe_clip_limit", pc.clahe_clip_limit);
      pc.clahe_tiles_x = p.value("clahe_tiles_x", pc.clahe_tiles_x);
      pc.clahe_tiles_y = p.value("clahe_tiles_y", pc.clahe_tiles_y);
    }
    cfg.preprocess.validate();

    if (j.contains("sampling")) {
      const auto& s = j.at("sampling");
      auto& sp = cfg.sampling;
      sp.temperature = s.value("temperature", sp.temperature);
      sp.top_p = s.value("top_p", sp.top_p);
      sp.max_tokens = s.value("max_tokens", sp.max_tokens);
      sp.context_length = s.value("context_length", sp.context_length);
    }
    cfg.sampling.validate();

    if (j.contains("prompt")) {
      const auto& p = j.at("prompt");
      if (p.contains("file")) {
        cfg.describe_prompt =
            text::trim(read_referenced(detail::resolve(base_dir, p.at("file").get<std::string>()), "prompt"));
      } else {
        const auto lang = p.value("language", std::string("en"));
        if (lang == "en") {
          cfg.describe_prompt = prompts::describe_en;
        } else if (lang == "ja") {
          cfg.describe_prompt = prompts::describe_ja;
        } else {
          throw ConfigError("prompt.language must be 'en' or 'ja'");
        }
      }
    }

    if (j.contains("lexicon_path")) {
      cfg.lexicon = Lexicon::from_json(
          parse_referenced(detail::resolve(base_dir, j.at("lexicon_path").get<std::string>()), "lexicon"));
    }
    if (j.contains("priority_path")) {
      cfg.priority = priority::PriorityConfig::from_json(
          parse_referenced(detail::resolve(base_dir, j.at("priority_path").get<std::string>()), "priority"));
    }
    if (j.contains("rubric")) {
      const auto& r = j.at("rubric");
      cfg.rubric_weights.type_weight = r.value("type_weight", cfg.rubric_weights.type_weight);
      cfg.rubric_weights.types_cap = r.value("types_cap", cfg.rubric_weights.types_cap);
      if (r.contains("scored_types")) {
        cfg.rubric_weights.scored_types.clear();
        for (const auto& t : r.at("scored_types")) {
          const auto type = parse_damage_type(t.get<std::string>());
          if (!type || *type == DamageType::unknown) {
            throw ConfigError("rubric.scored_types: unknown damage type");
          }
          cfg.rubric_weights.scored_types.push_back(*type);
        }
      }
    }
    cfg.rubric_weights.validate();

    cfg.parallelism = j.value("parallelism", 1);
    if (cfg.parallelism < 1) {
      throw ConfigError("parallelism must be >= 1");
    }
    cfg.client.timeout = std::chrono::milliseconds(static_cast<long long>(j.value("timeout_seconds", 120.0) * 1000));
    cfg.client.retries = j.value("retries", 1);
    if (cfg.client.timeout.count() <= 0 || cfg.client.retries < 0) {
      throw ConfigError("timeout_seconds must be > 0 and retries >= 0");
    }

    std::vector<const ModelEndpoint*> all;
    for (const auto& e : cfg.endpoints) {
      all.push_back(&e);
    }
    if (cfg.structuring.mode == StructuringConfig::Mode::llm) {
      all.push_back(&cfg.structuring.endpoint);
    }
    for (const auto* e : all) {
      constexpr std::string_view prefix = "mock:";
      if (e->base_url.rfind(prefix, 0) == 0) {
        const auto fixture = detail::resolve(base_dir, e->base_url.substr(prefix.size()));
        cfg.mocks[e->label] = std::make_shared<MockBackend>(
            MockBackend::from_json(parse_referenced(fixture, "mock fixtures " + e->label)));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  cfg.config_hash = util::sha256_hex(hashed.dump());
  return cfg;
}

} // namespace damagebench
