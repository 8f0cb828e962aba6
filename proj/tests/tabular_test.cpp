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
#include <random>

#include "clintext/clintext.hpp"
#include "support/oracles.hpp"

namespace clintext {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("clintext_tabular_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const Pipeline& pipeline() {
  static const Pipeline p(load_config(testing::data_path("default_config.json")));
  return p;
}

ExtractionRow sample_row() {
  ExtractionRow r;
  r.doc_id = "d1";
  r.ent_text = "pain, \"sharp\"";
  r.start_char = 4;
  r.end_char = 17;
  r.category = "PROBLEM";
  r.cui = "C0030193";
  r.similarity = 0.1 + 0.2;
  r.is_negated = true;
  r.section_category = "plan";
  r.sentence_text = "no pain, \"sharp\"\nnoted";
  return r;
}

TEST(Rows, NegatedEntity) {
  const Document doc = pipeline().process("no pneumonia");
  const auto rows = to_rows(doc, "d1");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].ent_text, "pneumonia");
  EXPECT_EQ(rows[0].start_char, 3u);
  EXPECT_EQ(rows[0].end_char, 12u);
  EXPECT_TRUE(rows[0].is_negated);
  EXPECT_FALSE(rows[0].is_historical);
  EXPECT_EQ(rows[0].sentence_text, "no pneumonia");
  EXPECT_EQ(rows[0].cui, "C0032285");
}

TEST(Rows, NoEntitiesNoRows) {
  EXPECT_TRUE(to_rows(pipeline().process("Patient resting comfortably."), "d").empty());
}

TEST(Rows, SectionCategoriesPerEntity) {
  const Document doc =
      pipeline().process("History: stroke.\nPlan: aspirin daily.");
  const auto rows = to_rows(doc, "d");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].section_category, "past_medical_history");
  EXPECT_TRUE(rows[0].is_historical);
  EXPECT_EQ(rows[1].section_category, "plan");
  EXPECT_FALSE(rows[1].is_historical);
}

TEST(Csv, HeaderOnlyForNoRows) {
  const fs::path dir = temp_dir("empty");
  EXPECT_EQ(write(std::span<const ExtractionRow>{}, Format::kCsv, dir / "out.csv"), 0u);
  EXPECT_EQ(read_file(dir / "out.csv"), std::string(kCsvHeader) + "\n");
  EXPECT_EQ(write(std::span<const ExtractionRow>{}, Format::kJsonl, dir / "out.jsonl"), 0u);
  EXPECT_EQ(read_file(dir / "out.jsonl"), "");
}

TEST(Csv, QuotingRoundTrips) {
  const ExtractionRow r = sample_row();
  const auto parsed = parse_csv(std::string(kCsvHeader) + "\n" + to_csv_line(r));
  ASSERT_EQ(parsed.size(), 2u);
  ASSERT_EQ(parsed[1].size(), 14u);
  EXPECT_EQ(parsed[1][1], r.ent_text);
  EXPECT_EQ(parsed[1][13], r.sentence_text);
  EXPECT_EQ(std::stod(parsed[1][6]), *r.similarity);
  EXPECT_EQ(parsed[1][7], "true");
  EXPECT_EQ(parsed[1][8], "false");
}

TEST(Csv, NullsAreEmptyFields) {
  ExtractionRow r;
  r.doc_id = "d";
  r.ent_text = "x";
  r.category = "P";
  const auto parsed = parse_csv(to_csv_line(r));
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0][5], "");
  EXPECT_EQ(parsed[0][6], "");
  EXPECT_EQ(parsed[0][12], "");
}

TEST(Jsonl, NullsAndExtras) {
  ExtractionRow r = sample_row();
  r.cui.reset();
  r.extras.emplace("source", std::string("abbr"));
  const auto j = nlohmann::json::parse(to_jsonl_line(r));
  EXPECT_TRUE(j.at("cui").is_null());
  EXPECT_EQ(j.at("similarity").get<double>(), *r.similarity);
  EXPECT_EQ(j.at("extras").at("source"), "abbr");
  EXPECT_FALSE(nlohmann::json::parse(to_jsonl_line(sample_row())).contains("extras"));
}

// CSV and JSONL serialize the same logical table.
TEST(TabularProperty, CsvAndJsonlAgree) {
  const fs::path dir = temp_dir("agree");
  std::vector<ExtractionRow> rows;
  for (const auto& d : read_corpus(testing::data_path("corpus"))) {
    const auto r = to_rows(pipeline().process(d.text), d.doc_id);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  rows.push_back(sample_row());
  ASSERT_GT(rows.size(), 20u);
  write(rows, Format::kCsv, dir / "a.csv");
  write(rows, Format::kJsonl, dir / "a.jsonl");
  const auto csv = parse_csv(read_file(dir / "a.csv"));
  ASSERT_EQ(csv.size(), rows.size() + 1);
  const auto header = csv[0];
  std::istringstream jl(read_file(dir / "a.jsonl"));
  std::string line;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_TRUE(std::getline(jl, line));
    const auto j = nlohmann::json::parse(line);
    for (std::size_t c = 0; c < header.size(); ++c) {
      const auto& v = j.at(header[c]);
      std::string s;
      if (v.is_null()) s = "";
      else if (v.is_string()) s = v.get<std::string>();
      else if (v.is_boolean()) s = v.get<bool>() ? "true" : "false";
      else if (v.is_number_float()) s = format_double(v.get<double>());
      else s = v.dump();
      EXPECT_EQ(s, csv[i + 1][c]) << header[c] << " row " << i;
    }
  }
}

// start/end offsets recover the entity text from the source.
TEST(TabularProperty, OffsetsAreLossless) {
  for (const auto& d : read_corpus(testing::data_path("corpus"))) {
    const Document doc = pipeline().process(d.text);
    const std::u32string cps = utf8::decode(d.text);
    for (const auto& r : to_rows(doc, d.doc_id)) {
      EXPECT_EQ(utf8::encode(cps.substr(r.start_char, r.end_char - r.start_char)), r.ent_text);
      EXPECT_NE(r.sentence_text.find(r.ent_text), std::string::npos);
    }
  }
}

TEST(Corpus, DirectoryAndJsonl) {
  const fs::path dir = temp_dir("corpus");
  write_file(dir / "b.txt", "second");
  write_file(dir / "a.txt", "first");
  write_file(dir / "skip.md", "ignored");
  const auto docs = read_corpus(dir);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].doc_id, "a");
  EXPECT_EQ(docs[1].text, "second");
  write_file(dir / "c.jsonl", "{\"doc_id\":\"x\",\"text\":\"t1\"}\n\n{\"doc_id\":\"y\",\"text\":\"t2\"}\n");
  const auto jl = read_corpus(dir / "c.jsonl");
  ASSERT_EQ(jl.size(), 2u);
  EXPECT_EQ(jl[1].doc_id, "y");
  write_file(dir / "bad.jsonl", "{\"doc_id\":1}\n");
  EXPECT_THROW(read_corpus(dir / "bad.jsonl"), IoError);
  EXPECT_THROW(read_corpus(dir / "missing"), IoError);
  EXPECT_THROW(RowWriter(dir / "no_such_dir" / "x.csv", Format::kCsv), IoError);
}

TEST(Format, Parse) {
  EXPECT_EQ(parse_format("csv"), Format::kCsv);
  EXPECT_EQ(parse_format("jsonl"), Format::kJsonl);
  EXPECT_THROW(parse_format("xml"), std::invalid_argument);
  EXPECT_EQ(format_double(0.7), "0.7");
  EXPECT_EQ(format_double(1.0), "1");
}

}  // namespace
}  // namespace clintext
