// Copyright 2026 The clintext Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLINTEXT_CLI_HPP
#define CLINTEXT_CLI_HPP

// Command-line front end. Exit codes: 0 success, 1 usage / configuration /
// rule errors, 2 I/O errors. Per-document failures are logged and counted
// on the error stream but do not change the exit code.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "clintext/errors.hpp"
#include "clintext/io_util.hpp"
#include "clintext/normalizer.hpp"
#include "clintext/pipeline.hpp"
#include "clintext/sectionizer.hpp"
#include "clintext/tabular.hpp"
#include "clintext/visualizer.hpp"

namespace clintext {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitIo = 2;

namespace detail {

inline void log_event(std::ostream& err, std::string_view doc_id,
                      std::string_view event) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  err << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << '\t'
      << (doc_id.empty() ? "-" : doc_id) << '\t' << event << '\n';
}

// Runs `body`, mapping exceptions to exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    log_event(err, "", std::string("io_error: ") + e.what());
    return kExitIo;
  } catch (const RuleError& e) {
    log_event(err, "", std::string("rule_error: ") + e.what());
    return kExitConfig;
  } catch (const ConfigError& e) {
    log_event(err, "", std::string("config_error: ") + e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    log_event(err, "", std::string("error: ") + e.what());
    return kExitConfig;
  }
}

inline std::string safe_file_name(std::string_view id) {
  std::string out;
  for (char c : id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                    c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out.empty() ? "doc" : out;
}

}  // namespace detail

inline int run_cli(std::vector<std::string> args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"clintext: rule-based clinical text processing"};
  app.require_subcommand(1);

  std::string config_path, input, output, format, viz_dir;
  std::size_t parallelism = 0;
  auto* process = app.add_subcommand("process", "Run the pipeline over a corpus");
  process->add_option("--config", config_path, "Pipeline config JSON")->required();
  process->add_option("--input", input, "Directory of .txt files or a JSONL corpus");
  process->add_option("--output", output, "Output table path");
  process->add_option("--format", format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  process->add_option("--viz-dir", viz_dir, "Write one HTML page per document here");
  process->add_option("--parallelism", parallelism, "Worker threads")
      ->check(CLI::PositiveNumber);

  std::string validate_config;
  auto* validate_cmd =
      app.add_subcommand("validate-rules", "Compile every rule file of a config");
  validate_cmd->add_option("--config", validate_config, "Pipeline config JSON")
      ->required();

  std::string template_path, prefix, rules_out;
  auto* tmpl = app.add_subcommand("rules-from-template",
                                  "Generate section rules from an empty template");
  tmpl->add_option("--template", template_path, "Template text file")->required();
  tmpl->add_option("--prefix", prefix, "Category prefix")->required();
  tmpl->add_option("--output", rules_out, "Section rule JSON to write")->required();

  std::string dict_path, index_out;
  std::size_t ngram = 3;
  auto* build = app.add_subcommand("build-index", "Build and persist the n-gram index");
  build->add_option("--dict", dict_path, "Dictionary TSV")->required();
  build->add_option("--n", ngram, "n-gram length")->check(CLI::Range(2, 16));
  build->add_option("--output", index_out, "Index cache file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kExitConfig;
  }

  if (*process) {
    return detail::guarded(err, [&] {
      PipelineConfig cfg = load_config(config_path);
      if (!input.empty()) cfg.input = input;
      if (!output.empty()) cfg.output = output;
      if (!format.empty()) cfg.format = format;
      if (!viz_dir.empty()) cfg.viz_dir = viz_dir;
      if (parallelism > 0) cfg.parallelism = parallelism;
      if (!cfg.input || !cfg.output) {
        throw ConfigError("process needs --input and --output");
      }
      const Format fmt = parse_format(cfg.format.value_or("csv"));
      const Pipeline pipeline(cfg);
      const std::vector<CorpusDoc> corpus = read_corpus(*cfg.input);
      if (cfg.viz_dir) std::filesystem::create_directories(*cfg.viz_dir);
      RowWriter writer(*cfg.output, fmt);
      std::size_t next = 0, failed = 0, processed = 0;
      pipeline.run(
          [&]() -> std::optional<std::pair<std::string, std::string>> {
            if (next == corpus.size()) return std::nullopt;
            const CorpusDoc& d = corpus[next++];
            return std::make_pair(d.doc_id, d.text);
          },
          [&](DocResult r) {
            if (!r.ok()) {
              ++failed;
              detail::log_event(err, r.doc_id, "skipped: " + r.error().message);
              return;
            }
            ++processed;
            for (const auto& row : to_rows(r.document(), r.doc_id)) writer.write(row);
            if (cfg.viz_dir) {
              write_file(std::filesystem::path(*cfg.viz_dir) /
                             (detail::safe_file_name(r.doc_id) + ".html"),
                         render_page(r.document(), r.doc_id));
            }
          });
      const std::size_t rows = writer.finish();
      detail::log_event(err, "", "done: " + std::to_string(processed) +
                                     " documents, " + std::to_string(rows) +
                                     " rows, " + std::to_string(failed) +
                                     " skipped");
      return kExitOk;
    });
  }
  if (*validate_cmd) {
    return detail::guarded(err, [&] {
      const Pipeline pipeline(load_config(validate_config));
      out << "ok: " << pipeline.config().stages.size() << " stages\n";
      return kExitOk;
    });
  }
  if (*tmpl) {
    return detail::guarded(err, [&] {
      const auto rules = rules_from_template(read_file(template_path), prefix);
      write_file(rules_out, to_json(rules).dump(2) + "\n");
      out << "wrote " << rules.size() << " section rules\n";
      return kExitOk;
    });
  }
  if (*build) {
    return detail::guarded(err, [&] {
      const std::string content = read_file(dict_path);
      NgramIndex idx;
      try {
        idx = build_index(parse_dictionary(content, dict_path), ngram);
      } catch (const std::invalid_argument& e) {
        throw RuleError("", dict_path + ": " + e.what());
      }
      idx.save(index_out, content_hash(content));
      out << "indexed " << idx.entries().size() << " entries\n";
      return kExitOk;
    });
  }
  return kExitConfig;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out,
                   std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(std::move(args), out, err);
}

}  // namespace clintext

#endif  // CLINTEXT_CLI_HPP
