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

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

#include "clintext/cli.hpp"
#include "clintext/clintext.hpp"
#include "support/oracles.hpp"

namespace clintext {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("clintext_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_ / "in");
    write_file(dir_ / "in" / "a.txt", "No cough. History of stroke.");
    write_file(dir_ / "in" / "b.txt", "Plan: aspirin, \"low dose\".");
    write_file(dir_ / "in" / "c.txt", "Patient resting.");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string config() const { return testing::data_path("default_config.json"); }
  fs::path dir_;
};

TEST_F(CliTest, ProcessDirectoryToCsv) {
  const auto r = cli({"process", "--config", config(), "--input", (dir_ / "in").string(),
                      "--output", (dir_ / "out.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto table = parse_csv(read_file(dir_ / "out.csv"));
  ASSERT_GE(table.size(), 4u);
  EXPECT_EQ(read_file(dir_ / "out.csv").substr(0, kCsvHeader.size()), kCsvHeader);
  EXPECT_EQ(table[1][0], "a");
  EXPECT_EQ(table[1][1], "cough");
  EXPECT_EQ(table[1][7], "true");
  EXPECT_NE(r.err.find("done: 3 documents"), std::string::npos);
}

TEST_F(CliTest, ProcessJsonlWithVisualization) {
  const auto r = cli({"process", "--config", config(), "--input", (dir_ / "in").string(),
                      "--output", (dir_ / "out.jsonl").string(), "--format", "jsonl",
                      "--viz-dir", (dir_ / "viz").string(), "--parallelism", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream in(read_file(dir_ / "out.jsonl"));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    EXPECT_TRUE(nlohmann::json::parse(line).contains("sentence_text"));
    ++n;
  }
  EXPECT_GE(n, 3u);
  for (const char* id : {"a", "b", "c"}) EXPECT_TRUE(fs::exists(dir_ / "viz" / (std::string(id) + ".html")));
}

TEST_F(CliTest, RepeatRunsAreByteIdentical) {
  for (const char* name : {"1.csv", "2.csv"}) {
    ASSERT_EQ(cli({"process", "--config", config(), "--input", testing::data_path("corpus"),
                   "--output", (dir_ / name).string(), "--parallelism", name[0] == '1' ? "1" : "8"})
                  .code,
              kExitOk);
  }
  EXPECT_EQ(read_file(dir_ / "1.csv"), read_file(dir_ / "2.csv"));
}

TEST_F(CliTest, PoisonDocumentIsLoggedAndSkipped) {
  write_file(dir_ / "in" / "bad.txt", "broken \xc3");
  const auto r = cli({"process", "--config", config(), "--input", (dir_ / "in").string(),
                      "--output", (dir_ / "out.csv").string()});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_NE(r.err.find("\tbad\tskipped:"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("1 skipped"), std::string::npos);
}

TEST_F(CliTest, ValidateRules) {
  const auto ok = cli({"validate-rules", "--config", config()});
  EXPECT_EQ(ok.code, kExitOk);
  EXPECT_EQ(ok.out, "ok: 7 stages\n");

  write_file(dir_ / "targets.json", R"([{"id":"broken_pattern","category":"P","regex":"(unclosed"}])");
  auto j = nlohmann::json::parse(read_file(config()));
  for (auto& [k, v] : j["rules"].items()) v = testing::data_path(v.get<std::string>());
  j["rules"]["target_matcher"] = (dir_ / "targets.json").string();
  write_file(dir_ / "bad_config.json", j.dump());
  const auto bad = cli({"validate-rules", "--config", (dir_ / "bad_config.json").string()});
  EXPECT_NE(bad.code, kExitOk);
  EXPECT_NE(bad.err.find("broken_pattern"), std::string::npos) << bad.err;
}

TEST_F(CliTest, RulesFromTemplate) {
  const auto r = cli({"rules-from-template", "--template",
                      testing::data_path("templates/two_question_template.txt"), "--prefix",
                      "screen_", "--output", (dir_ / "rules.json").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rules = parse_section_rules(nlohmann::json::parse(read_file(dir_ / "rules.json")));
  ASSERT_EQ(rules.size(), 2u);
  EXPECT_EQ(rules[0].category, "screen_any_cough");
  EXPECT_EQ(rules[1].category, "screen_fever");
}

TEST_F(CliTest, BuildIndex) {
  const auto r = cli({"build-index", "--dict", testing::data_path("rules/dictionary.tsv"),
                      "--output", (dir_ / "idx.bin").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto hash = content_hash(read_file(testing::data_path("rules/dictionary.tsv")));
  const auto idx = NgramIndex::load(dir_ / "idx.bin", hash);
  ASSERT_TRUE(idx);
  EXPECT_EQ(idx->n(), 3u);
  EXPECT_EQ(idx->entries().size(), load_dictionary(testing::data_path("rules/dictionary.tsv")).size());
}

TEST_F(CliTest, UsageAndIoErrors) {
  EXPECT_EQ(cli({"process", "--config", config(), "--bogus-flag"}).code, kExitConfig);
  EXPECT_EQ(cli({}).code, kExitConfig);
  EXPECT_EQ(cli({"process", "--config", config(), "--input", (dir_ / "in").string(),
                 "--output", (dir_ / "o.csv").string(), "--format", "xml"})
                .code,
            kExitConfig);
  EXPECT_EQ(cli({"process", "--config", (dir_ / "missing.json").string(), "--input", "x",
                 "--output", "y"})
                .code,
            kExitConfig);
  EXPECT_EQ(cli({"process", "--config", config(), "--input", (dir_ / "nowhere").string(),
                 "--output", (dir_ / "o.csv").string()})
                .code,
            kExitIo);
  EXPECT_EQ(cli({"build-index", "--dict", (dir_ / "none.tsv").string(), "--output",
                 (dir_ / "i.bin").string()})
                .code,
            kExitIo);
}

TEST_F(CliTest, BinaryExitCodes) {
  const std::string bin = CLINTEXT_CLI_PATH;
  const auto status = [&](const std::string& args) {
    const int rc = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  EXPECT_EQ(status("validate-rules --config " + config()), 0);
  EXPECT_EQ(status("process --config " + config() + " --nope"), 1);
  EXPECT_EQ(status("process --config " + config() + " --input " + (dir_ / "in").string() +
                   " --output " + (dir_ / "bin.csv").string()),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "bin.csv"));
}

}  // namespace
}  // namespace clintext
