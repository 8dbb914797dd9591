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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "damagebench/config.hpp"
#include "damagebench/errors.hpp"
#include "damagebench/harness.hpp"
#include "damagebench/image_io.hpp"
#include "damagebench/imageprep.hpp"
#include "damagebench/lexicon.hpp"
#include "damagebench/report.hpp"

namespace fs = std::filesystem;
using namespace damagebench;

namespace {

enum ExitCode : int { ok = 0, config_error = 1, run_failures = 2, fatal = 3 };

int cmd_preprocess(const fs::path& input, const fs::path& output, const std::optional<fs::path>& config,
                   int parallelism) {
  PreprocessConfig pc;
  if (config) {
    const auto cfg = RunConfig::load(*config);
    pc = cfg.preprocess;
  }
  std::vector<harness::CorpusImage> corpus;
  if (fs::is_directory(input)) {
    corpus = harness::list_corpus(input);
  } else if (fs::exists(input)) {
    corpus.push_back({input.filename().string(), input});
  } else {
    throw ConfigError("input not found: " + input.string());
  }
  if (corpus.empty()) {
    throw ConfigError("no PNG or JPEG images in " + input.string());
  }
  const auto prepared = harness::prepare_corpus(corpus, output, pc, parallelism);
  int failures = 0;
  for (const auto& p : prepared) {
    for (const auto& w : p.warnings) {
      std::cerr << "warning: " << w << "\n";
    }
    if (!p.png) {
      std::cerr << p.image_id << ": " << p.error << "\n";
      ++failures;
    }
  }
  std::cerr << prepared.size() - static_cast<std::size_t>(failures) << " of " << prepared.size()
            << " images written to " << output.string() << "\n";
  return failures == 0 ? ok : run_failures;
}

int cmd_run(const fs::path& config, const std::optional<fs::path>& output_dir, std::optional<int> parallelism,
            std::optional<std::size_t> limit) {
  auto cfg = RunConfig::load(config);
  if (output_dir) {
    cfg.output_dir = *output_dir;
  }
  if (parallelism) {
    if (*parallelism < 1) {
      throw ConfigError("--parallelism must be >= 1");
    }
    cfg.parallelism = *parallelism;
  }
  harness::RunOptions opts;
  opts.limit = limit;
  const auto outcome = harness::run(cfg, opts);
  for (const auto& w : outcome.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  std::cout << outcome.run_dir.string() << "\n";
  return outcome.failure_count == 0 ? ok : run_failures;
}

int cmd_compare(const std::vector<fs::path>& runs, const fs::path& output, double alpha) {
  const auto outcome = harness::compare(runs, output, alpha);
  for (const auto& f : outcome.files) {
    std::cout << f.string() << "\n";
  }
  return ok;
}

int cmd_score_only(const fs::path& input, const std::optional<fs::path>& lexicon_path,
                   const std::optional<fs::path>& output) {
  const Lexicon lexicon = lexicon_path ? Lexicon::load(*lexicon_path) : Lexicon::defaults();
  const auto rows = harness::score_only(input, lexicon);
  const auto csv = report::score_only_csv(rows);
  if (output) {
    util::write_text_file(*output, csv);
  } else {
    std::cout << csv;
  }
  return ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for quantized vision-language damage description models"};
  app.require_subcommand(1);

  auto* pre = app.add_subcommand("preprocess", "Denoise, resize and contrast-enhance images");
  fs::path pre_input, pre_output;
  std::optional<fs::path> pre_config;
  int pre_parallelism = 1;
  pre->add_option("input", pre_input, "Image file or directory")->required();
  pre->add_option("-o,--output", pre_output, "Output directory")->required();
  pre->add_option("-c,--config", pre_config, "Run config whose preprocess section is used");
  pre->add_option("-j,--parallelism", pre_parallelism, "Worker threads")->check(CLI::PositiveNumber);

  auto* run = app.add_subcommand("run", "Run every endpoint over the corpus; resumes an existing run directory");
  fs::path run_config;
  std::optional<fs::path> run_output;
  std::optional<int> run_parallelism;
  std::optional<std::size_t> run_limit;
  run->add_option("-c,--config", run_config, "Run config (JSON)")->required();
  run->add_option("-o,--output-dir", run_output, "Override output_dir");
  run->add_option("-j,--parallelism", run_parallelism, "Override parallelism");
  run->add_option("--limit", run_limit, "Stop after this many new records");

  auto* cmp = app.add_subcommand("compare", "Compare endpoints across completed runs");
  std::vector<fs::path> cmp_runs;
  fs::path cmp_output;
  double cmp_alpha = 0.05;
  cmp->add_option("runs", cmp_runs, "Run directories")->required();
  cmp->add_option("-o,--output", cmp_output, "Report directory")->required();
  cmp->add_option("--alpha", cmp_alpha, "Family-wise significance level");

  auto* score = app.add_subcommand("score-only", "Rubric-score existing descriptions (text lines or JSONL)");
  fs::path score_input;
  std::optional<fs::path> score_lexicon, score_output;
  score->add_option("input", score_input, "Descriptions file")->required();
  score->add_option("-l,--lexicon", score_lexicon, "Lexicon JSON");
  score->add_option("-o,--output", score_output, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*pre) {
      return cmd_preprocess(pre_input, pre_output, pre_config, pre_parallelism);
    }
    if (*run) {
      return cmd_run(run_config, run_output, run_parallelism, run_limit);
    }
    if (*cmp) {
      return cmd_compare(cmp_runs, cmp_output, cmp_alpha);
    }
    return cmd_score_only(score_input, score_lexicon, score_output);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return fatal;
  }
}
