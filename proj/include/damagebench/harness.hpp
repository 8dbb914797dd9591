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
#include <atomic>
#include <cctype>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "damagebench/charts.hpp"
#include "damagebench/config.hpp"
#include "damagebench/extraction.hpp"
#include "damagebench/image_io.hpp"
#include "damagebench/imageprep.hpp"
#include "damagebench/records.hpp"
#include "damagebench/report.hpp"
#include "damagebench/rubric.hpp"
#include "damagebench/stats.hpp"

namespace damagebench::harness {

namespace fs = std::filesystem;

inline constexpr int manifest_format_version = 1;

struct CorpusImage {
  std::string image_id;  // file name, unique within the corpus directory
  fs::path path;
};

/// PNG and JPEG files directly inside `dir`, sorted by file name.
inline std::vector<CorpusImage> list_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw ConfigError("corpus directory not found: " + dir.string());
  }
  std::vector<CorpusImage> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) {
      continue;
    }
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") {
      out.push_back({entry.path().filename().string(), entry.path()});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
  return out;
}

/// Runs `task(i)` for i in [0, n) on up to `workers` threads. The first
/// exception thrown by a task is rethrown after all threads join.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task) {
  const std::size_t count = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (count <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      task(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < count; ++t) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) {
            error = std::current_exception();
          }
          failed = true;
        }
      }
    });
  }
  for (auto& t : threads) {
    t.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

struct PreparedImage {
  std::string image_id;
  std::optional<std::vector<std::uint8_t>> png;  // empty when the image could not be prepared
  std::string error;
  std::vector<std::string> warnings;
};

/// Preprocesses every corpus image into `out_dir/<image_id>.png`, reusing
/// files already present there.
inline std::vector<PreparedImage> prepare_corpus(const std::vector<CorpusImage>& corpus, const fs::path& out_dir,
                                                 const PreprocessConfig& cfg, int parallelism) {
  fs::create_directories(out_dir);
  std::vector<PreparedImage> out(corpus.size());
  parallel_for(corpus.size(), parallelism, [&](std::size_t i) {
    auto& p = out[i];
    p.image_id = corpus[i].image_id;
    const fs::path target = out_dir / (corpus[i].image_id + ".png");
    try {
      if (fs::exists(target)) {
        p.png = read_binary_file(target);
        const auto img = decode_image(*p.png);
        if (clahe_uses_global_fallback(img.width(), img.height(), cfg)) {
          p.warnings.push_back(p.image_id + ": smaller than the CLAHE tile grid, used a single global tile");
        }
        return;
      }
      const auto processed = preprocess(load_image(corpus[i].path), cfg);
      if (clahe_uses_global_fallback(processed.width(), processed.height(), cfg)) {
        p.warnings.push_back(p.image_id + ": smaller than the CLAHE tile grid, used a single global tile");
      }
      p.png = encode_png(processed);
      const fs::path tmp = target.string() + ".tmp";
      write_binary_file(tmp, *p.png);
      fs::rename(tmp, target);
    } catch (const std::exception& e) {
      p.png.reset();
      p.error = std::string("preprocess: ") + e.what();
    }
  });
  return out;
}

struct RunOptions {
  std::optional<std::size_t> limit;  // stop after this many new (endpoint, image) records
  std::ostream* log = &std::cerr;
};

struct RunOutcome {
  fs::path run_dir;
  std::size_t success_count = 0;
  std::size_t failure_count = 0;
  bool complete = false;
  std::vector<std::string> warnings;
};

inline fs::path records_path(const fs::path& run_dir, const std::string& label) {
  return run_dir / "endpoints" / label_dir_name(label) / "records.jsonl";
}

/// One image through the full per-image pipeline for one endpoint.
inline ImageRecord process_image(const PreparedImage& image, const ModelEndpoint& endpoint, const RunConfig& cfg,
                                 const ModelClient& client, const ModelClient* structuring_client) {
  ImageRecord rec;
  rec.image_id = image.image_id;
  if (!image.png) {
    rec.description.image_id = image.image_id;
    rec.description.endpoint_label = endpoint.label;
    rec.description.error_detail = image.error;
    return rec;
  }
  rec.description = client.describe_image(image.image_id, *image.png, cfg.describe_prompt, endpoint, cfg.sampling);
  if (!rec.description.success) {
    return rec;
  }
  extraction::ExtractionResult ex;
  if (structuring_client != nullptr) {
    ex = extraction::extract_structured(rec.description, *structuring_client, cfg.structuring.endpoint, cfg.sampling,
                                        cfg.lexicon, cfg.structuring.prompt_template);
  } else {
    ex = {extraction::rule_extract(rec.description.text, cfg.lexicon), extraction::Provenance::rule_based,
          std::nullopt};
  }
  rec.quality = rubric::score_description(rec.description.text, cfg.lexicon, cfg.rubric_weights);
  rec.priority = priority::priority_score(ex.damage, cfg.priority);
  rec.structured = StructuredRecord{std::move(ex.damage), ex.provenance, std::move(ex.detail)};
  return rec;
}

namespace detail {

inline nlohmann::json read_manifest(const fs::path& run_dir) {
  const auto path = run_dir / "manifest.json";
  if (!fs::exists(path)) {
    return nullptr;
  }
  try {
    return nlohmann::json::parse(util::read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  }
}

inline void write_manifest(const fs::path& run_dir, const nlohmann::json& manifest) {
  const auto path = run_dir / "manifest.json";
  const fs::path tmp = path.string() + ".tmp";
  util::write_text_file(tmp, manifest.dump(2) + "\n");
  fs::rename(tmp, path);
}

} // namespace detail

/// Describe, extract, score and prioritise every corpus image on every
/// endpoint, persisting each record as soon as it exists. Pairs already
/// recorded in the run directory are skipped.
inline RunOutcome run(const RunConfig& cfg, const RunOptions& opts = {}) {
  auto& log = *opts.log;
  const auto corpus = list_corpus(cfg.corpus_dir);
  if (corpus.empty()) {
    throw ConfigError("corpus is empty: " + cfg.corpus_dir.string());
  }
  RunOutcome outcome;
  outcome.run_dir = cfg.output_dir;
  fs::create_directories(cfg.output_dir);

  auto previous = detail::read_manifest(cfg.output_dir);
  if (!previous.is_null() && previous.value("config_hash", std::string()) != cfg.config_hash) {
    throw ConfigError("output_dir " + cfg.output_dir.string() +
                      " holds a run made with a different configuration; choose another output_dir");
  }
  const std::string created_at =
      previous.is_null() ? util::utc_timestamp() : previous.value("created_at", util::utc_timestamp());

  std::set<std::string> warnings;
  if (cfg.parallelism > 1) {
    warnings.insert("parallelism " + std::to_string(cfg.parallelism) +
                    " > 1: per-image timings are not comparable with a sequential run");
  }

  log << "preprocessing " << corpus.size() << " images\n";
  const auto prepared = prepare_corpus(corpus, cfg.output_dir / "preprocessed", cfg.preprocess, cfg.parallelism);
  for (const auto& p : prepared) {
    warnings.insert(p.warnings.begin(), p.warnings.end());
    if (!p.png) {
      warnings.insert(p.image_id + ": " + p.error);
    }
  }

  std::optional<ModelClient> structuring_client;
  if (cfg.structuring.mode == StructuringConfig::Mode::llm) {
    structuring_client.emplace(cfg.transport_for(cfg.structuring.endpoint), cfg.client);
  }

  std::atomic<std::size_t> budget{opts.limit.value_or(SIZE_MAX)};
  bool interrupted = false;
  auto endpoints_json = nlohmann::json::array();

  for (const auto& endpoint : cfg.endpoints) {
    RecordStore store(records_path(cfg.output_dir, endpoint.label));
    const ModelClient client(cfg.transport_for(endpoint), cfg.client);
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < prepared.size(); ++i) {
      if (!store.contains(prepared[i].image_id)) {
        pending.push_back(i);
      }
    }
    log << endpoint.label << ": " << pending.size() << " of " << prepared.size() << " images pending\n";

    std::atomic<std::size_t> done{0};
    parallel_for(pending.size(), cfg.parallelism, [&](std::size_t k) {
      for (std::size_t b = budget.load(); ; ) {
        if (b == 0) {
          return;
        }
        if (budget.compare_exchange_weak(b, b - 1)) {
          break;
        }
      }
      const auto& image = prepared[pending[k]];
      const auto rec = process_image(image, endpoint, cfg, client, structuring_client ? &*structuring_client : nullptr);
      store.append(rec);
      const auto n = ++done;
      if (!rec.success()) {
        log << "  [" << n << "/" << pending.size() << "] " << image.image_id << " failed: "
            << rec.description.error_detail.value_or("unknown error") << "\n";
      }
    });
    if (done < pending.size()) {
      interrupted = true;
    }

    std::size_t ok = 0, failed = 0;
    std::map<std::string, std::size_t> provenance;
    std::set<std::string> corpus_ids;
    for (const auto& p : prepared) {
      corpus_ids.insert(p.image_id);
    }
    for (const auto& r : store.records()) {
      if (corpus_ids.count(r.image_id) == 0) {
        continue;
      }
      if (r.success()) {
        ++ok;
        ++provenance[std::string(extraction::to_string(r.structured->provenance))];
      } else {
        ++failed;
      }
      for (const auto& w : r.description.warnings) {
        warnings.insert(r.image_id + " @ " + endpoint.label + ": " + w);
      }
    }
    outcome.success_count += ok;
    outcome.failure_count += failed;
    endpoints_json.push_back({{"label", endpoint.label},
                              {"model_name", endpoint.model_name},
                              {"declared_size_gb", endpoint.declared_size_gb},
                              {"declared_bits", endpoint.declared_bits},
                              {"records", fs::relative(store.path(), cfg.output_dir).generic_string()},
                              {"success_count", ok},
                              {"failure_count", failed},
                              {"extraction_provenance", provenance}});
  }

  std::vector<std::string> image_ids;
  for (const auto& c : corpus) {
    image_ids.push_back(c.image_id);
  }
  const std::size_t expected = corpus.size() * cfg.endpoints.size();
  outcome.complete = !interrupted && outcome.success_count + outcome.failure_count == expected;
  outcome.warnings.assign(warnings.begin(), warnings.end());

  const nlohmann::json manifest = {
      {"format_version", manifest_format_version},
      {"config_hash", cfg.config_hash},
      {"created_at", created_at},
      {"updated_at", util::utc_timestamp()},
      {"corpus", {{"dir", cfg.corpus_dir.generic_string()}, {"size", corpus.size()}, {"image_ids", image_ids}}},
      {"structuring", cfg.structuring.mode == StructuringConfig::Mode::llm ? "llm" : "rule-based"},
      {"extraction_prompt_version", extraction::prompt_version},
      {"parallelism", cfg.parallelism},
      {"endpoints", endpoints_json},
      {"expected_count", expected},
      {"success_count", outcome.success_count},
      {"failure_count", outcome.failure_count},
      {"complete", outcome.complete},
      {"warnings", outcome.warnings}};
  detail::write_manifest(cfg.output_dir, manifest);
  log << "run " << (outcome.complete ? "complete" : "incomplete") << ": " << outcome.success_count
      << " succeeded, " << outcome.failure_count << " failed\n";
  return outcome;
}

/// Manifest fields that must match between an interrupted-then-resumed run
/// and an uninterrupted one.
inline nlohmann::json manifest_without_timestamps(nlohmann::json manifest) {
  manifest.erase("created_at");
  manifest.erase("updated_at");
  return manifest;
}

struct CompareOutcome {
  stats::ComparisonReport report;
  std::vector<fs::path> files;
};

inline constexpr std::string_view chart_files[] = {"mean_time.svg", "size_vs_total_time.svg",
                                                   "quality_histogram.svg", "quality_vs_length.svg"};

/// Loads every endpoint of every run directory, in order.
inline std::vector<report::EndpointRecords> load_runs(const std::vector<fs::path>& run_dirs) {
  std::vector<report::EndpointRecords> out;
  std::optional<std::pair<fs::path, std::set<std::string>>> reference;
  std::set<std::string> labels;
  for (const auto& dir : run_dirs) {
    const auto manifest = detail::read_manifest(dir);
    if (manifest.is_null()) {
      throw ConfigError("no manifest.json in " + dir.string());
    }
    if (!manifest.value("complete", false)) {
      throw ConfigError("run " + dir.string() + " is incomplete; resume it with `run` first");
    }
    const auto ids = manifest.at("corpus").at("image_ids").get<std::vector<std::string>>();
    const std::set<std::string> id_set(ids.begin(), ids.end());
    if (!reference) {
      reference.emplace(dir, id_set);
    } else if (reference->second != id_set) {
      std::vector<std::string> only_ref, only_this;
      std::set_difference(reference->second.begin(), reference->second.end(), id_set.begin(), id_set.end(),
                          std::back_inserter(only_ref));
      std::set_difference(id_set.begin(), id_set.end(), reference->second.begin(), reference->second.end(),
                          std::back_inserter(only_this));
      auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v) {
          s += (s.empty() ? "" : ", ") + x;
        }
        return s.empty() ? std::string("(none)") : s;
      };
      throw ConfigError("corpus mismatch: only in " + reference->first.string() + ": " + join(only_ref) +
                        "; only in " + dir.string() + ": " + join(only_this));
    }
    for (const auto& ep : manifest.at("endpoints")) {
      report::EndpointRecords er;
      er.label = ep.at("label").get<std::string>();
      er.declared_size_gb = ep.value("declared_size_gb", 0.0);
      er.declared_bits = ep.value("declared_bits", 0);
      if (!labels.insert(er.label).second) {
        throw ConfigError("endpoint label " + er.label + " appears in more than one run");
      }
      for (auto& r : RecordStore::read(dir / ep.at("records").get<std::string>())) {
        if (id_set.count(r.image_id) != 0) {
          er.records.push_back(std::move(r));
        }
      }
      out.push_back(std::move(er));
    }
  }
  return out;
}

/// Statistics across all endpoints of the given runs, written to `out_dir`
/// as per_image.csv, summary.json, report.md and four SVG charts.
inline CompareOutcome compare(const std::vector<fs::path>& run_dirs, const fs::path& out_dir, double alpha = 0.05) {
  const auto endpoints = load_runs(run_dirs);
  if (endpoints.size() < 2) {
    throw ConfigError("compare needs at least two endpoints across the given runs");
  }
  std::vector<stats::EndpointSamples> groups;
  for (const auto& ep : endpoints) {
    groups.push_back(report::samples_from(ep));
  }
  CompareOutcome out;
  out.report = stats::compare_runs(groups, alpha);

  fs::create_directories(out_dir);
  auto emit = [&](std::string_view name, const std::string& content) {
    const auto path = out_dir / name;
    util::write_text_file(path, content);
    out.files.push_back(path);
  };
  emit("per_image.csv", report::per_image_csv(endpoints));
  emit("summary.json", nlohmann::json(out.report).dump(2) + "\n");
  emit("report.md", report::markdown_report(out.report));
  emit(chart_files[0], charts::mean_time_bars(out.report));
  emit(chart_files[1], charts::size_vs_total_time(out.report));
  emit(chart_files[2], charts::quality_histogram(groups));
  emit(chart_files[3], charts::quality_vs_length(groups));
  return out;
}

/// Rubric scores for an existing description corpus. A `.jsonl` file holds
/// one JSON object per line with "text" and optional "id" (or a bare JSON
/// string); any other file holds one description per line.
inline std::vector<report::ScoredText> score_only(const fs::path& path, const Lexicon& lexicon,
                                                  const rubric::Weights& weights = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot read " + path.string());
  }
  const bool jsonl = path.extension() == ".jsonl";
  std::vector<report::ScoredText> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    report::ScoredText row;
    row.id = std::to_string(line_no);
    if (jsonl) {
      if (text::trim(line).empty()) {
        continue;
      }
      try {
        const auto j = nlohmann::json::parse(line);
        if (j.is_string()) {
          row.text = j.get<std::string>();
        } else {
          row.text = j.at("text").get<std::string>();
          if (j.contains("id")) {
            row.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
          } else if (j.contains("image_id")) {
            row.id = j.at("image_id").get<std::string>();
          }
        }
      } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    } else {
      row.text = line;
    }
    row.score = rubric::score_description(row.text, lexicon, weights);
    out.push_back(std::move(row));
  }
  return out;
}

} // namespace damagebench::harness
