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

#ifndef CLINTEXT_PIPELINE_HPP
#define CLINTEXT_PIPELINE_HPP

// Configurable end-to-end pipeline with batched, order-preserving parallel
// execution. Rule packs and the dictionary index are built once and shared
// read-only by all workers.

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "json.hpp"

#include "clintext/context.hpp"
#include "clintext/document.hpp"
#include "clintext/errors.hpp"
#include "clintext/io_util.hpp"
#include "clintext/matcher.hpp"
#include "clintext/normalizer.hpp"
#include "clintext/sectionizer.hpp"
#include "clintext/sentencizer.hpp"
#include "clintext/tokenizer.hpp"

namespace clintext {

enum class Stage {
  kTokenizer,
  kSentencizer,
  kSectionizer,
  kTargetMatcher,
  kContext,
  kNormalizer,
  kSectionAttributes,
};

inline std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kTokenizer: return "tokenizer";
    case Stage::kSentencizer: return "sentencizer";
    case Stage::kSectionizer: return "sectionizer";
    case Stage::kTargetMatcher: return "target_matcher";
    case Stage::kContext: return "context";
    case Stage::kNormalizer: return "normalizer";
    case Stage::kSectionAttributes: return "section_attributes";
  }
  return "";
}

inline std::optional<Stage> parse_stage(std::string_view s) {
  for (Stage st : {Stage::kTokenizer, Stage::kSentencizer, Stage::kSectionizer,
                   Stage::kTargetMatcher, Stage::kContext, Stage::kNormalizer,
                   Stage::kSectionAttributes}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

struct PipelineConfig {
  std::vector<Stage> stages;
  // Rule file per stage; the normalizer entry is the dictionary TSV.
  std::map<Stage, std::filesystem::path> rules;
  NormalizerParams normalizer;
  std::optional<std::filesystem::path> index_cache;
  std::size_t batch_size = 64;
  std::size_t parallelism = 1;
  // Optional I/O defaults for the CLI.
  std::optional<std::string> input;
  std::optional<std::string> output;
  std::optional<std::string> format;
  std::optional<std::string> viz_dir;

  bool has(Stage s) const {
    return std::find(stages.begin(), stages.end(), s) != stages.end();
  }
};

// Checks the stage ordering constraints. Throws ConfigError naming both
// stages of a violated constraint.
inline void validate_stage_order(const std::vector<Stage>& stages) {
  if (stages.empty() || stages.front() != Stage::kTokenizer) {
    throw ConfigError("stage order: tokenizer must be the first stage");
  }
  std::map<Stage, std::size_t> pos;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (!pos.emplace(stages[i], i).second) {
      throw ConfigError("stage order: duplicate stage '" +
                        std::string(to_string(stages[i])) + "'");
    }
  }
  const auto before = [&](Stage first, Stage second, bool first_required) {
    auto s = pos.find(second);
    if (s == pos.end()) return;
    auto f = pos.find(first);
    if (f == pos.end()) {
      if (!first_required) return;
      throw ConfigError("stage order: '" + std::string(to_string(second)) +
                        "' requires '" + std::string(to_string(first)) +
                        "' before it");
    }
    if (f->second > s->second) {
      throw ConfigError("stage order: '" + std::string(to_string(first)) +
                        "' must precede '" + std::string(to_string(second)) + "'");
    }
  };
  before(Stage::kSentencizer, Stage::kSectionizer, true);
  before(Stage::kSentencizer, Stage::kContext, true);
  before(Stage::kSentencizer, Stage::kNormalizer, true);
  before(Stage::kSectionizer, Stage::kSectionAttributes, true);
  before(Stage::kContext, Stage::kSectionAttributes, false);
}

inline PipelineConfig parse_config(const nlohmann::json& j,
                                   const std::filesystem::path& base_dir) {
  PipelineConfig cfg;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& s : j.at("stages")) {
      const std::string name = s.get<std::string>();
      auto st = parse_stage(name);
      if (!st) throw ConfigError("unknown stage '" + name + "'");
      cfg.stages.push_back(*st);
    }
    validate_stage_order(cfg.stages);
    if (j.contains("rules")) {
      for (const auto& [name, path] : j.at("rules").items()) {
        auto st = parse_stage(name);
        if (!st) throw ConfigError("rules: unknown stage '" + name + "'");
        std::filesystem::path p = path.get<std::string>();
        cfg.rules[*st] = p.is_absolute() ? p : base_dir / p;
      }
    }
    if (j.contains("normalizer")) {
      const auto& n = j.at("normalizer");
      cfg.normalizer.n = n.value("n", cfg.normalizer.n);
      cfg.normalizer.threshold = n.value("threshold", cfg.normalizer.threshold);
      cfg.normalizer.window = n.value("window", cfg.normalizer.window);
      cfg.normalizer.best_match_only =
          n.value("best_match_only", cfg.normalizer.best_match_only);
      if (n.contains("measure")) {
        cfg.normalizer.measure = parse_measure(n.at("measure").get<std::string>());
      }
      if (n.contains("index_cache")) {
        std::filesystem::path p = n.at("index_cache").get<std::string>();
        cfg.index_cache = p.is_absolute() ? p : base_dir / p;
      }
      validate(cfg.normalizer);
    }
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.parallelism = j.value("parallelism", cfg.parallelism);
    if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
    if (cfg.parallelism == 0) throw ConfigError("parallelism must be positive");
    const auto opt_path = [&](const char* key) -> std::optional<std::string> {
      if (!j.contains(key)) return std::nullopt;
      std::filesystem::path p = j.at(key).get<std::string>();
      return (p.is_absolute() ? p : base_dir / p).string();
    };
    cfg.input = opt_path("input");
    cfg.output = opt_path("output");
    cfg.viz_dir = opt_path("viz_dir");
    if (j.contains("format")) cfg.format = j.at("format").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (Stage s : cfg.stages) {
    if (s == Stage::kTokenizer || s == Stage::kSectionAttributes) continue;
    auto it = cfg.rules.find(s);
    if (it == cfg.rules.end()) {
      throw ConfigError("config: stage '" + std::string(to_string(s)) +
                        "' has no rule file");
    }
  }
  for (const auto& [stage, path] : cfg.rules) {
    if (cfg.has(stage) && !std::filesystem::exists(path)) {
      throw ConfigError("missing rule file for '" + std::string(to_string(stage)) +
                        "': " + path.string());
    }
  }
  return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::string content;
  try {
    content = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

// Builds (or loads from a matching cache) the dictionary index.
inline NgramIndex load_or_build_index(const std::filesystem::path& dictionary,
                                      std::size_t n,
                                      const std::optional<std::filesystem::path>& cache) {
  const std::string content = read_file(dictionary);
  const std::uint64_t hash = content_hash(content);
  if (cache) {
    if (auto idx = NgramIndex::load(*cache, hash); idx && idx->n() == n) {
      return std::move(*idx);
    }
  }
  NgramIndex idx;
  try {
    idx = build_index(parse_dictionary(content, dictionary.string()), n);
  } catch (const std::invalid_argument& e) {
    throw RuleError("", dictionary.string() + ": " + e.what());
  }
  if (cache) idx.save(*cache, hash);
  return idx;
}

struct DocError {
  std::string doc_id;
  std::string message;
};

struct DocResult {
  std::string doc_id;
  std::variant<Document, DocError> outcome;

  bool ok() const { return std::holds_alternative<Document>(outcome); }
  const Document& document() const { return std::get<Document>(outcome); }
  const DocError& error() const { return std::get<DocError>(outcome); }
};

class Pipeline {
 public:
  // Compiles every rule pack named by the config. Throws RuleError or
  // ConfigError; IoError for unreadable files.
  explicit Pipeline(PipelineConfig config) : config_(std::move(config)) {
    validate_stage_order(config_.stages);
    const auto path = [&](Stage s) -> const std::filesystem::path* {
      auto it = config_.rules.find(s);
      return it == config_.rules.end() ? nullptr : &it->second;
    };
    if (const auto* p = path(Stage::kTokenizer)) {
      tokenizer_rules_ = load_tokenizer_rules(*p);
    }
    tokenizer_ = std::make_shared<Tokenizer>(tokenizer_rules_);
    for (Stage s : config_.stages) {
      const auto* p = path(s);
      switch (s) {
        case Stage::kSentencizer:
          boundaries_ = std::make_shared<BoundaryRuleSet>(load_boundary_rules(*p));
          break;
        case Stage::kSectionizer:
          sections_ = std::make_shared<SectionRuleSet>(load_section_rules(*p));
          break;
        case Stage::kTargetMatcher:
          targets_ = std::make_shared<TargetMatcher>(
              compile_rules(load_target_rules(*p), tokenizer_rules_));
          break;
        case Stage::kContext:
          context_ = std::make_shared<ContextRuleSet>(
              load_context_rules(*p, tokenizer_rules_));
          break;
        case Stage::kNormalizer:
          index_ = std::make_shared<NgramIndex>(
              load_or_build_index(*p, config_.normalizer.n, config_.index_cache));
          break;
        default:
          break;
      }
    }
  }

  const PipelineConfig& config() const { return config_; }

  // Runs every stage on one text. Throws on per-document failures.
  Document process(std::string text) const {
    Document doc = (*tokenizer_)(std::move(text));
    for (Stage s : config_.stages) {
      switch (s) {
        case Stage::kTokenizer: break;
        case Stage::kSentencizer: segment(doc, *boundaries_); break;
        case Stage::kSectionizer: detect_sections(doc, *sections_); break;
        case Stage::kTargetMatcher: match(doc, *targets_); break;
        case Stage::kContext: apply_context(doc, *context_); break;
        case Stage::kNormalizer: map_concepts(doc, *index_, config_.normalizer); break;
        case Stage::kSectionAttributes:
          apply_section_attributes(doc, *sections_);
          break;
      }
    }
    return doc;
  }

  DocResult process_one(const std::string& doc_id, std::string text) const {
    try {
      return {doc_id, process(std::move(text))};
    } catch (const std::exception& e) {
      return {doc_id, DocError{doc_id, e.what()}};
    }
  }

  // Pulls (doc_id, text) pairs from `source` until it returns nullopt,
  // processes them in batches of config.batch_size on `parallelism` workers
  // and hands results to `sink` in input order.
  template <typename Source, typename Sink>
  void run(Source&& source, Sink&& sink,
           std::optional<std::size_t> parallelism = std::nullopt) const {
    const std::size_t workers =
        std::max<std::size_t>(1, parallelism.value_or(config_.parallelism));
    bool done = false;
    while (!done) {
      std::vector<std::pair<std::string, std::string>> batch;
      while (batch.size() < config_.batch_size) {
        std::optional<std::pair<std::string, std::string>> item = source();
        if (!item) {
          done = true;
          break;
        }
        batch.push_back(std::move(*item));
      }
      if (batch.empty()) break;
      std::vector<std::optional<DocResult>> results(batch.size());
      std::atomic<std::size_t> next{0};
      const std::function<void()> work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < batch.size();) {
          results[i] = process_one(batch[i].first, std::move(batch[i].second));
        }
      };
      const std::size_t threads = std::min(workers, batch.size());
      if (threads <= 1) {
        work();
      } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
      }
      for (auto& r : results) sink(std::move(*r));
    }
  }

 private:
  PipelineConfig config_;
  TokenizerRules tokenizer_rules_ = default_tokenizer_rules();
  std::shared_ptr<const Tokenizer> tokenizer_;
  std::shared_ptr<const BoundaryRuleSet> boundaries_;
  std::shared_ptr<const SectionRuleSet> sections_;
  std::shared_ptr<const TargetMatcher> targets_;
  std::shared_ptr<const ContextRuleSet> context_;
  std::shared_ptr<const NgramIndex> index_;
};

// Convenience: processes a whole vector of documents.
inline std::vector<DocResult> run_pipeline(
    const Pipeline& pipeline,
    const std::vector<std::pair<std::string, std::string>>& docs,
    std::optional<std::size_t> parallelism = std::nullopt) {
  std::vector<DocResult> out;
  std::size_t i = 0;
  pipeline.run(
      [&]() -> std::optional<std::pair<std::string, std::string>> {
        if (i == docs.size()) return std::nullopt;
        return docs[i++];
      },
      [&](DocResult r) { out.push_back(std::move(r)); }, parallelism);
  return out;
}

}  // namespace clintext

#endif  // CLINTEXT_PIPELINE_HPP
