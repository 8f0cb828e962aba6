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

#include <random>

#include "clintext/clintext.hpp"
#include "support/oracles.hpp"

namespace clintext {
namespace {

TEST(CharSpan, ExpandSnapsPartialTokenOutward) {
  const Document doc = tokenize("no cp", default_tokenizer_rules());
  const auto s = char_span(doc, 3, 5, Align::kExpand);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->range(), (TokenRange{1, 2}));
  EXPECT_EQ(span_text(doc, *s), "cp");
}

TEST(CharSpan, ExpandAcrossWhitespaceMatchesOracle) {
  const Document doc = tokenize("no cp", default_tokenizer_rules());
  const auto s = char_span(doc, 1, 4, Align::kExpand);
  const auto want = testing::char_span_oracle(doc, 1, 4, Align::kExpand);
  ASSERT_TRUE(s);
  ASSERT_TRUE(want);
  EXPECT_EQ(s->range(), *want);
  EXPECT_EQ(span_text(doc, *s), "no cp");
}

TEST(CharSpan, ContractInsideOneTokenIsEmpty) {
  const Document doc = tokenize("no cp", default_tokenizer_rules());
  EXPECT_FALSE(char_span(doc, 1, 2, Align::kContract));
  EXPECT_FALSE(char_span(doc, 2, 3, Align::kExpand));  // whitespace only
}

TEST(CharSpan, OutOfRangeThrows) {
  const Document doc = tokenize("no cp", default_tokenizer_rules());
  EXPECT_THROW(char_span(doc, 0, 6, Align::kExpand), std::out_of_range);
  EXPECT_THROW(char_span(doc, 4, 2, Align::kContract), std::out_of_range);
}

TEST(CharSpan, OffsetsAreCodePoints) {
  const Document doc = tokenize("\xc3\xa9t\xc3\xa9 cp", default_tokenizer_rules());
  EXPECT_EQ(doc.length(), 6u);
  const auto s = char_span(doc, 4, 6, Align::kContract);
  ASSERT_TRUE(s);
  EXPECT_EQ(span_text(doc, *s), "cp");
}

TEST(CharSpan, RandomRangesAgreeWithOracle) {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 400; ++iter) {
    const Document doc = tokenize(testing::random_text(rng, 12), default_tokenizer_rules());
    const std::size_t n = doc.length();
    for (std::size_t s = 0; s <= n; ++s) {
      for (std::size_t e = s; e <= n; ++e) {
        for (Align mode : {Align::kExpand, Align::kContract}) {
          const auto got = char_span(doc, s, e, mode);
          const auto want = testing::char_span_oracle(doc, s, e, mode);
          ASSERT_EQ(got.has_value(), want.has_value())
              << doc.text() << " [" << s << "," << e << ")";
          if (got) {
            EXPECT_EQ(got->range(), *want);
            const auto [cs, ce] = doc.char_range(got->range());
            if (mode == Align::kContract) {
              EXPECT_GE(cs, s);
              EXPECT_LE(ce, e);
            }
          }
        }
      }
    }
  }
}

TEST(SpanText, KeepsInteriorWhitespace) {
  const Document doc = tokenize("chest  pain here", default_tokenizer_rules());
  EXPECT_EQ(span_text(doc, TokenRange{0, 2}), "chest  pain");
  EXPECT_EQ(span_text(doc, Span{2, 3, "x", {}}), "here");
  EXPECT_THROW(span_text(doc, Span{1, 1, "x", {}}), std::out_of_range);
  EXPECT_THROW(span_text(doc, TokenRange{2, 4}), std::out_of_range);
}

TEST(Document, RejectsInvalidTokenRanges) {
  using R = std::vector<std::pair<std::size_t, std::size_t>>;
  EXPECT_THROW(Document("ab cd", R{{0, 3}}), std::invalid_argument);        // contains space
  EXPECT_THROW(Document("ab cd", R{{0, 1}}), std::invalid_argument);        // gap not whitespace
  EXPECT_THROW(Document("ab cd", R{{3, 5}, {0, 2}}), std::invalid_argument);  // unordered
  EXPECT_THROW(Document("ab", R{{1, 1}}), std::invalid_argument);           // empty token
  EXPECT_THROW(Document("\xff", R{}), EncodingError);
  const Document ok("ab cd", R{{0, 2}, {3, 5}});
  EXPECT_EQ(ok.size(), 2u);
  EXPECT_EQ(ok.tokens()[0].trailing_ws, " ");
}

TEST(Document, EmptyAndWhitespaceOnly) {
  const Document empty = tokenize("", default_tokenizer_rules());
  EXPECT_EQ(empty.size(), 0u);
  EXPECT_EQ(reconstruct(empty), "");
  const Document ws = tokenize(" \n\t", default_tokenizer_rules());
  EXPECT_EQ(ws.size(), 0u);
  EXPECT_EQ(ws.leading_ws(), " \n\t");
  EXPECT_EQ(reconstruct(ws), " \n\t");
}

TEST(Document, AddEntitiesKeepsOrderAndRemapsLinks) {
  Document doc = tokenize("a b c d", default_tokenizer_rules());
  Entity late;
  late.span = Span{3, 4, "X", late.span.attrs};
  doc.entities.push_back(late);
  doc.modifiers.push_back(Modifier{Span{0, 1, "M", {}}, "M", Direction::kForward, {}, "is_negated", "m"});
  doc.links.push_back(Link{0, 0});
  Entity early;
  early.span = Span{1, 2, "Y", early.span.attrs};
  doc.add_entities({early});
  ASSERT_EQ(doc.entities.size(), 2u);
  EXPECT_EQ(doc.entities[0].span.label, "Y");
  EXPECT_EQ(doc.entities[1].span.label, "X");
  ASSERT_EQ(doc.links.size(), 1u);
  EXPECT_EQ(doc.links[0].entity, 1u);
}

TEST(Document, EntityStartsWithAssertionFlagsFalse) {
  const Entity e;
  for (auto name : attr::kAssertions) {
    ASSERT_TRUE(e.span.attrs.contains(name));
    EXPECT_FALSE(e.flag(name));
  }
}

TEST(Document, SentenceAndSectionLookup) {
  Document doc = tokenize("a b. c d", default_tokenizer_rules());
  doc.sentences = {Span{0, 3, "sentence", {}}, Span{3, 5, "sentence", {}}};
  EXPECT_EQ(doc.sentence_of(0), 0u);
  EXPECT_EQ(doc.sentence_of(3), 1u);
  EXPECT_FALSE(doc.sentence_of(9));
  doc.sections.push_back(Section{std::nullopt, std::nullopt, {0, 5}, std::nullopt, {}});
  EXPECT_EQ(doc.section_of(4), 0u);
}

}  // namespace
}  // namespace clintext
