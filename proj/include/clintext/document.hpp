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

#ifndef CLINTEXT_DOCUMENT_HPP
#define CLINTEXT_DOCUMENT_HPP

// Document model: immutable source text, non-destructive tokens and the
// annotation layers (sentences, sections, entities, modifiers, links) that
// pipeline stages add on top. All character offsets count Unicode scalar
// values; all ranges are end-exclusive.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "clintext/utf8.hpp"

namespace clintext {

// Half-open token interval; may be empty.
struct TokenRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  bool contains(const TokenRange& o) const {
    return o.begin >= begin && o.end <= end;
  }
  bool intersects(const TokenRange& o) const {
    return !empty() && !o.empty() && begin < o.end && o.begin < end;
  }
  friend bool operator==(const TokenRange&, const TokenRange&) = default;
};

using AttrValue = std::variant<bool, std::string>;
using Attrs = std::map<std::string, AttrValue, std::less<>>;

struct Token {
  std::size_t start_char = 0;
  std::size_t end_char = 0;
  std::string trailing_ws;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Span {
  std::size_t start_token = 0;
  std::size_t end_token = 0;
  std::string label;
  Attrs attrs;

  TokenRange range() const { return {start_token, end_token}; }
  friend bool operator==(const Span&, const Span&) = default;
};

// Pre-registered assertion attributes.
namespace attr {
inline constexpr std::string_view kNegated = "is_negated";
inline constexpr std::string_view kHistorical = "is_historical";
inline constexpr std::string_view kHypothetical = "is_hypothetical";
inline constexpr std::string_view kUncertain = "is_uncertain";
inline constexpr std::string_view kFamily = "is_family";
inline constexpr std::array<std::string_view, 5> kAssertions = {
    kNegated, kHistorical, kHypothetical, kUncertain, kFamily};

inline bool is_assertion(std::string_view name) {
  return std::find(kAssertions.begin(), kAssertions.end(), name) !=
         kAssertions.end();
}
}  // namespace attr

struct Entity {
  Span span;
  std::string category;
  std::optional<std::string> cui;
  std::optional<double> similarity;
  std::optional<std::string> section_category;
  std::string rule_id;

  Entity() {
    for (auto name : attr::kAssertions) span.attrs.emplace(name, false);
  }

  // Boolean attribute lookup; absent or non-boolean values read as false.
  bool flag(std::string_view name) const {
    auto it = span.attrs.find(name);
    if (it == span.attrs.end()) return false;
    const bool* b = std::get_if<bool>(&it->second);
    return b != nullptr && *b;
  }
  void set_flag(std::string_view name, bool value = true) {
    span.attrs.insert_or_assign(std::string(name), value);
  }

  bool is_negated() const { return flag(attr::kNegated); }
  bool is_historical() const { return flag(attr::kHistorical); }
  bool is_hypothetical() const { return flag(attr::kHypothetical); }
  bool is_uncertain() const { return flag(attr::kUncertain); }
  bool is_family() const { return flag(attr::kFamily); }

  TokenRange range() const { return span.range(); }
  friend bool operator==(const Entity&, const Entity&) = default;
};

// A section owns the tokens from its title through to the next title. The
// implicit leading section has no category and no title. body may be empty
// when a title is immediately followed by another title.
struct Section {
  std::optional<std::string> category;
  std::optional<TokenRange> title;
  TokenRange body;
  std::optional<std::size_t> parent;
  std::vector<std::size_t> children;

  TokenRange extent() const {
    return {title ? title->begin : body.begin, body.end};
  }
  friend bool operator==(const Section&, const Section&) = default;
};

enum class Direction { kForward, kBackward, kBidirectional, kTerminate, kPseudo };

inline std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::kForward: return "FORWARD";
    case Direction::kBackward: return "BACKWARD";
    case Direction::kBidirectional: return "BIDIRECTIONAL";
    case Direction::kTerminate: return "TERMINATE";
    case Direction::kPseudo: return "PSEUDO";
  }
  return "";
}

// A modifier's scope: the tokens before it and the tokens after it that it
// can reach. Either side may be empty.
struct Scope {
  TokenRange backward;
  TokenRange forward;

  bool intersects(const TokenRange& r) const {
    return backward.intersects(r) || forward.intersects(r);
  }
  bool contains(std::size_t token) const {
    return backward.contains(token) || forward.contains(token);
  }
  friend bool operator==(const Scope&, const Scope&) = default;
};

struct Modifier {
  Span span;
  std::string category;
  Direction direction = Direction::kForward;
  Scope scope;
  std::string asserts;
  std::string rule_id;

  TokenRange range() const { return span.range(); }
  friend bool operator==(const Modifier&, const Modifier&) = default;
};

struct Link {
  std::size_t modifier = 0;
  std::size_t entity = 0;
  friend auto operator<=>(const Link&, const Link&) = default;
};

class Document {
 public:
  Document() : offsets_{0} {}

  // Builds a document from its text and the code point ranges of its tokens.
  // Gaps between tokens must be whitespace and tokens may not contain any.
  // Throws EncodingError on invalid UTF-8 and std::invalid_argument when the
  // token ranges violate the document invariants.
  Document(std::string text,
           std::span<const std::pair<std::size_t, std::size_t>> token_ranges)
      : text_(std::move(text)), offsets_(utf8::codepoint_offsets(text_)) {
    const std::size_t n = length();
    std::size_t cursor = 0;
    tokens_.reserve(token_ranges.size());
    for (const auto& [start, end] : token_ranges) {
      if (start >= end || end > n || start < cursor) {
        throw std::invalid_argument("token ranges must be ordered, non-empty "
                                    "and inside the text");
      }
      require_whitespace(cursor, start);
      require_no_whitespace(start, end);
      if (tokens_.empty()) {
        leading_ws_ = std::string(substr(0, start));
      } else {
        tokens_.back().trailing_ws = std::string(substr(cursor, start));
      }
      tokens_.push_back(Token{start, end, {}});
      cursor = end;
    }
    require_whitespace(cursor, n);
    if (tokens_.empty()) {
      leading_ws_ = text_;
    } else {
      tokens_.back().trailing_ws = std::string(substr(cursor, n));
    }
  }

  const std::string& text() const { return text_; }
  // Whitespace before the first token (the whole text if there are no tokens).
  const std::string& leading_ws() const { return leading_ws_; }
  std::span<const Token> tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  // Length of the text in code points.
  std::size_t length() const { return offsets_.size() - 1; }

  std::size_t byte_offset(std::size_t char_offset) const {
    return offsets_.at(char_offset);
  }
  // Code point index of the code point that contains byte `byte` (or length()
  // for the end of the text).
  std::size_t char_offset(std::size_t byte) const {
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), byte);
    return static_cast<std::size_t>(it - offsets_.begin()) - 1;
  }

  std::string_view substr(std::size_t start_char, std::size_t end_char) const {
    if (start_char > end_char || end_char > length()) {
      throw std::out_of_range("character range outside document");
    }
    const std::size_t b = offsets_[start_char];
    return std::string_view(text_).substr(b, offsets_[end_char] - b);
  }

  std::string_view token_text(std::size_t i) const {
    const Token& t = tokens_.at(i);
    return substr(t.start_char, t.end_char);
  }

  // Character range covered by a non-empty token range.
  std::pair<std::size_t, std::size_t> char_range(const TokenRange& r) const {
    if (r.empty() || r.end > tokens_.size()) {
      throw std::out_of_range("token range outside document");
    }
    return {tokens_[r.begin].start_char, tokens_[r.end - 1].end_char};
  }

  // Index of the sentence containing `token`, if any.
  std::optional<std::size_t> sentence_of(std::size_t token) const {
    auto it = std::upper_bound(
        sentences.begin(), sentences.end(), token,
        [](std::size_t t, const Span& s) { return t < s.start_token; });
    if (it == sentences.begin()) return std::nullopt;
    --it;
    if (token >= it->end_token) return std::nullopt;
    return static_cast<std::size_t>(it - sentences.begin());
  }

  // Index of the section whose extent contains `token`, if any.
  std::optional<std::size_t> section_of(std::size_t token) const {
    for (std::size_t i = 0; i < sections.size(); ++i) {
      if (sections[i].extent().contains(token)) return i;
    }
    return std::nullopt;
  }

  // Merges new entities into the sorted entity layer and renumbers links.
  void add_entities(std::vector<Entity> added) {
    if (added.empty()) return;
    const std::size_t old_count = entities.size();
    std::vector<Entity> all = std::move(entities);
    for (auto& e : added) all.push_back(std::move(e));
    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       const auto ra = all[a].range(), rb = all[b].range();
                       return std::tie(ra.begin, ra.end) <
                              std::tie(rb.begin, rb.end);
                     });
    std::vector<std::size_t> new_index(all.size());
    entities.clear();
    entities.reserve(all.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      new_index[order[pos]] = pos;
      entities.push_back(std::move(all[order[pos]]));
    }
    for (auto& link : links) {
      if (link.entity < old_count) link.entity = new_index[link.entity];
    }
    std::sort(links.begin(), links.end());
  }

  // Annotation layers. Stages mutate these; text and tokens never change.
  std::vector<Span> sentences;
  std::vector<Section> sections;
  std::vector<Entity> entities;
  std::vector<Modifier> modifiers;
  std::vector<Link> links;

 private:
  void require_whitespace(std::size_t from, std::size_t to) const {
    std::size_t pos = offsets_[from];
    while (pos < offsets_[to]) {
      if (!utf8::is_space(utf8::next(text_, pos))) {
        throw std::invalid_argument("non-whitespace text outside tokens");
      }
    }
  }
  void require_no_whitespace(std::size_t from, std::size_t to) const {
    std::size_t pos = offsets_[from];
    while (pos < offsets_[to]) {
      if (utf8::is_space(utf8::next(text_, pos))) {
        throw std::invalid_argument("token contains whitespace");
      }
    }
  }

  std::string text_;
  std::string leading_ws_;
  std::vector<std::size_t> offsets_;
  std::vector<Token> tokens_;
};

enum class Align { kExpand, kContract };

// Aligns a character range to token boundaries. kExpand returns the tokens
// overlapping the range; kContract returns the tokens lying entirely inside
// it. Returns nullopt if no token qualifies. Throws std::out_of_range for
// offsets outside the text.
inline std::optional<Span> char_span(const Document& doc,
                                     std::size_t start_char,
                                     std::size_t end_char, Align mode) {
  if (start_char > end_char || end_char > doc.length()) {
    throw std::out_of_range("character range [" + std::to_string(start_char) +
                            ", " + std::to_string(end_char) +
                            ") outside document");
  }
  if (start_char == end_char) return std::nullopt;
  const auto tokens = doc.tokens();
  std::size_t first, last;
  if (mode == Align::kExpand) {
    first = static_cast<std::size_t>(
        std::partition_point(tokens.begin(), tokens.end(),
                             [&](const Token& t) {
                               return t.end_char <= start_char;
                             }) -
        tokens.begin());
    last = static_cast<std::size_t>(
        std::partition_point(tokens.begin(), tokens.end(),
                             [&](const Token& t) {
                               return t.start_char < end_char;
                             }) -
        tokens.begin());
  } else {
    first = static_cast<std::size_t>(
        std::partition_point(tokens.begin(), tokens.end(),
                             [&](const Token& t) {
                               return t.start_char < start_char;
                             }) -
        tokens.begin());
    last = static_cast<std::size_t>(
        std::partition_point(tokens.begin(), tokens.end(),
                             [&](const Token& t) {
                               return t.end_char <= end_char;
                             }) -
        tokens.begin());
  }
  if (first >= last) return std::nullopt;
  return Span{first, last, {}, {}};
}

// Source text covered by a token range, interior whitespace included.
inline std::string_view span_text(const Document& doc, const TokenRange& r) {
  const auto [start, end] = doc.char_range(r);
  return doc.substr(start, end);
}

inline std::string_view span_text(const Document& doc, const Span& span) {
  if (span.start_token >= span.end_token) {
    throw std::out_of_range("empty span");
  }
  return span_text(doc, span.range());
}

inline std::string reconstruct(const Document& doc) {
  std::string out = doc.leading_ws();
  for (std::size_t i = 0; i < doc.size(); ++i) {
    out += doc.token_text(i);
    out += doc.tokens()[i].trailing_ws;
  }
  return out;
}

// FNV-1a over the text and token boundaries. Stages must leave it unchanged.
inline std::uint64_t base_fingerprint(const Document& doc) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 1099511628211ULL;
    }
  };
  for (unsigned char c : doc.text()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  for (const Token& t : doc.tokens()) {
    mix(t.start_char);
    mix(t.end_char);
  }
  return h;
}

}  // namespace clintext

#endif  // CLINTEXT_DOCUMENT_HPP
