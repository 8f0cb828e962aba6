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

#include <gtest/gtest.h>

#include <filesystem>

#include "clintext/clintext.hpp"
#include "support/oracles.hpp"

namespace clintext {
namespace {

namespace fs = std::filesystem;

nlohmann::json default_json() {
  return nlohmann::json::parse(read_file(testing::data_path("default_config.json")));
}

PipelineConfig config_from(const nlohmann::json& j) {
  return parse_config(j, testing::data_path(""));
}

std::vector<std::pair<std::string, std::string>> corpus_pairs() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& d : read_corpus(testing::data_path("corpus"))) out.emplace_back(d.doc_id, d.text);
  return out;
}

std::string export_csv(const std::vector<DocResult>& results) {
  std::string out;
  for (const auto& r : results) {
    if (!r.ok()) {
      out += "error:" + r.doc_id + "\n";
      continue;
    }
    for (const auto& row : to_rows(r.document(), r.doc_id)) out += to_csv_line(row);
  }
  return out;
}

TEST(Config, DefaultHasSevenStages) {
  const PipelineConfig cfg = load_config(testing::data_path("default_config.json"));
  EXPECT_EQ(cfg.stages.size(), 7u);
  EXPECT_EQ(cfg.stages.front(), Stage::kTokenizer);
  EXPECT_EQ(cfg.normalizer.measure, Measure::kJaccard);
  EXPECT_EQ(cfg.normalizer.threshold, 0.7);
  EXPECT_TRUE(fs::exists(cfg.rules.at(Stage::kContext)));
}

TEST(Config, ContextBeforeSentencizerRejected) {
  auto j = default_json();
  j["stages"] = {"tokenizer", "context", "sentencizer", "target_matcher"};
  try {
    config_from(j);
    FAIL();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("sentencizer"), std::string::npos);
    EXPECT_NE(what.find("context"), std::string::npos);
  }
}

TEST(Config, NormalizerIsOptional) {
  auto j = default_json();
  j["stages"] = {"tokenizer", "sentencizer", "sectionizer", "target_matcher",
                 "context", "section_attributes"};
  const PipelineConfig cfg = config_from(j);
  EXPECT_EQ(cfg.stages.size(), 6u);
  const Document doc = Pipeline(cfg).process("no nausea");
  ASSERT_EQ(doc.entities.size(), 1u);
  EXPECT_FALSE(doc.entities[0].cui);
}

TEST(Config, MissingRuleFileNamesPath) {
  auto j = default_json();
  j["rules"]["context"] = "rules/does_not_exist.json";
  try {
    config_from(j);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("does_not_exist.json"), std::string::npos);
  }
}

TEST(Config, OtherErrors) {
  auto j = default_json();
  j["stages"] = {"sentencizer", "tokenizer"};
  EXPECT_THROW(config_from(j), ConfigError);
  j = default_json();
  j["stages"] = {"tokenizer", "tokenizer"};
  EXPECT_THROW(config_from(j), ConfigError);
  j = default_json();
  j["stages"] = {"tokenizer", "sentencizer", "spellcheck"};
  EXPECT_THROW(config_from(j), ConfigError);
  j = default_json();
  j["stages"] = {"tokenizer", "section_attributes"};
  EXPECT_THROW(config_from(j), ConfigError);
  j = default_json();
  j["stages"] = {"tokenizer", "sentencizer", "sectionizer", "section_attributes", "context"};
  EXPECT_THROW(config_from(j), ConfigError);
  j = default_json();
  j["normalizer"]["threshold"] = 1.5;
  EXPECT_THROW(config_from(j), ConfigError);
  j = default_json();
  j["rules"].erase("target_matcher");
  EXPECT_THROW(config_from(j), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Pipeline, BadRuleFileRaisesRuleError) {
  const fs::path dir = fs::temp_directory_path() / "clintext_pipeline_bad";
  fs::create_directories(dir);
  write_file(dir / "targets.json", R"([{"id":"bad_regex","category":"P","regex":"("}])");
  auto j = default_json();
  j["rules"]["target_matcher"] = (dir / "targets.json").string();
  try {
    Pipeline p(config_from(j));
    FAIL();
  } catch (const RuleError& e) {
    EXPECT_EQ(e.rule_id(), "bad_regex");
  }
  fs::remove_all(dir);
}

TEST(Pipeline, ThreeDocumentsInOrder) {
  const Pipeline p(load_config(testing::data_path("default_config.json")));
  const auto results = run_pipeline(
      p, {{"a", "No cough."}, {"b", "History of stroke."}, {"c", "Fever today."}});
  ASSERT_EQ(results.size(), 3u);
  EXPECT_EQ(results[0].doc_id, "a");
  EXPECT_EQ(results[1].doc_id, "b");
  EXPECT_EQ(results[2].doc_id, "c");
  EXPECT_TRUE(results[0].document().entities.at(0).is_negated());
  EXPECT_TRUE(results[1].document().entities.at(0).is_historical());
  EXPECT_FALSE(results[2].document().entities.at(0).is_negated());
  for (const auto& r : results) EXPECT_EQ(r.document().sentences.size(), 1u);
}

TEST(Pipeline, PoisonDocumentIsIsolated) {
  const Pipeline p(load_config(testing::data_path("default_config.json")));
  std::vector<std::pair<std::string, std::string>> docs;
  for (int i = 0; i < 10; ++i) docs.emplace_back("d" + std::to_string(i), "no cough " + std::to_string(i));
  docs[4].second = "bad \xff\xfe bytes";
  for (std::size_t par : {1u, 4u}) {
    const auto results = run_pipeline(p, docs, par);
    ASSERT_EQ(results.size(), 10u);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
      EXPECT_EQ(results[i].doc_id, docs[i].first);
      if (results[i].ok()) ++ok;
    }
    EXPECT_EQ(ok, 9u);
    ASSERT_FALSE(results[4].ok());
    EXPECT_EQ(results[4].error().doc_id, "d4");
    EXPECT_FALSE(results[4].error().message.empty());
  }
}

TEST(Pipeline, ParallelismDoesNotChangeOutput) {
  const Pipeline p(load_config(testing::data_path("default_config.json")));
  auto docs = corpus_pairs();
  for (int rep = 0; rep < 3; ++rep) {
    for (const auto& d : corpus_pairs()) docs.emplace_back(d.first + "_" + std::to_string(rep), d.second);
  }
  const std::string serial = export_csv(run_pipeline(p, docs, 1));
  EXPECT_FALSE(serial.empty());
  for (std::size_t par : {2u, 8u}) EXPECT_EQ(export_csv(run_pipeline(p, docs, par)), serial);
}

TEST(Pipeline, IndexCacheIsUsed) {
  const fs::path dir = fs::temp_directory_path() / "clintext_pipeline_cache";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto j = default_json();
  j["normalizer"]["index_cache"] = (dir / "index.bin").string();
  const PipelineConfig cfg = config_from(j);
  const std::string first = export_csv(run_pipeline(Pipeline(cfg), corpus_pairs()));
  ASSERT_TRUE(fs::exists(dir / "index.bin"));
  const std::string second = export_csv(run_pipeline(Pipeline(cfg), corpus_pairs()));
  EXPECT_EQ(first, second);
  fs::remove_all(dir);
}

// Each stage leaves the text, tokens and every layer outside its contract
// untouched.
TEST(PipelineProperty, StageIsolation) {
  const PipelineConfig cfg = load_config(testing::data_path("default_config.json"));
  const BoundaryRuleSet boundaries = load_boundary_rules(cfg.rules.at(Stage::kSentencizer));
  const SectionRuleSet sections = load_section_rules(cfg.rules.at(Stage::kSectionizer));
  const TargetMatcher targets = compile_rules(load_target_rules(cfg.rules.at(Stage::kTargetMatcher)));
  const ContextRuleSet context = load_context_rules(cfg.rules.at(Stage::kContext));
  const NgramIndex index = build_index(load_dictionary(cfg.rules.at(Stage::kNormalizer)), 3);

  const auto spans_of = [](const Document& d) {
    std::vector<std::tuple<std::size_t, std::size_t, std::string, std::optional<std::string>>> out;
    for (const auto& e : d.entities) out.emplace_back(e.span.start_token, e.span.end_token, e.category, e.cui);
    return out;
  };

  for (const auto& [id, text] : corpus_pairs()) {
    Document doc = tokenize(text, default_tokenizer_rules());
    const std::uint64_t base = base_fingerprint(doc);

    Document before = doc;
    segment(doc, boundaries);
    EXPECT_EQ(base_fingerprint(doc), base);
    EXPECT_EQ(doc.sections, before.sections);
    EXPECT_EQ(doc.entities, before.entities);

    before = doc;
    detect_sections(doc, sections);
    EXPECT_EQ(doc.sentences, before.sentences);
    EXPECT_EQ(doc.entities, before.entities);

    before = doc;
    match(doc, targets);
    EXPECT_EQ(doc.sentences, before.sentences);
    EXPECT_EQ(doc.sections, before.sections);
    EXPECT_TRUE(doc.modifiers.empty());

    before = doc;
    map_concepts(doc, index, cfg.normalizer);
    EXPECT_EQ(doc.sentences, before.sentences);
    EXPECT_EQ(doc.sections, before.sections);
    EXPECT_GE(doc.entities.size(), before.entities.size());

    before = doc;
    apply_context(doc, context);
    EXPECT_EQ(doc.sentences, before.sentences);
    EXPECT_EQ(doc.sections, before.sections);
    EXPECT_EQ(spans_of(doc), spans_of(before));

    before = doc;
    apply_section_attributes(doc, sections);
    EXPECT_EQ(doc.sentences, before.sentences);
    EXPECT_EQ(doc.sections, before.sections);
    EXPECT_EQ(doc.modifiers, before.modifiers);
    EXPECT_EQ(doc.links, before.links);
    EXPECT_EQ(spans_of(doc), spans_of(before));
    EXPECT_EQ(base_fingerprint(doc), base) << id;
    EXPECT_EQ(reconstruct(doc), text);
  }
}

}  // namespace
}  // namespace clintext
