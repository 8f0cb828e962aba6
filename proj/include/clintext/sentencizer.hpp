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

#ifndef CLINTEXT_SENTENCIZER_HPP
#define CLINTEXT_SENTENCIZER_HPP

// Rule-based clinical sentence segmentation with first-character dispatch.
//
// A boundary rule is a short character-class pattern. Wherever it matches,
// it votes at one character position: `begin` rules vote for a boundary
// before the anchor character, `end` rules for a boundary after it and
// `suppress` rules against a boundary after it. The highest-priority vote at
// a position decides; ties go to the non-splitting vote. Boundaries snap to
// the next token start. A blank line always ends a sentence.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "clintext/document.hpp"
#include "clintext/errors.hpp"
#include "clintext/io_util.hpp"
#include "clintext/utf8.hpp"

namespace clintext {

enum class BoundaryKind { kBegin, kEnd, kSuppress };

enum class CharClass : std::uint8_t {
  kLiteral, kDigit, kUpper, kLower, kSpace, kNewline, kAny
};

struct PatternElement {
  CharClass cls = CharClass::kLiteral;
  char32_t literal = 0;
  bool repeat = false;  // one or more

  bool accepts(char32_t c) const {
    switch (cls) {
      case CharClass::kLiteral: return c == literal;
      case CharClass::kDigit: return utf8::is_digit(c);
      case CharClass::kUpper: return utf8::is_upper(c);
      case CharClass::kLower: return utf8::is_lower(c);
      case CharClass::kSpace: return utf8::is_space(c) && c != U'\n';
      case CharClass::kNewline: return c == U'\n';
      case CharClass::kAny: return true;
    }
    return false;
  }
  friend bool operator==(const PatternElement&, const PatternElement&) = default;
};

struct BoundaryRule {
  std::string id;
  BoundaryKind kind = BoundaryKind::kEnd;
  std::vector<PatternElement> pattern;
  std::size_t anchor_offset = 0;
  int priority = 0;
};

// Parses the pattern mini-language: literal characters, the classes
// \d \u \l \s \n \a, escapes \\ and \+, and a `+` suffix for repetition.
inline std::vector<PatternElement> parse_boundary_pattern(
    std::string_view text, const std::string& rule_id) {
  const std::u32string cps = utf8::decode(text);
  std::vector<PatternElement> out;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i];
    if (c == U'+') {
      if (out.empty() || out.back().repeat) {
        throw RuleError(rule_id, "'+' must follow a pattern element");
      }
      out.back().repeat = true;
      continue;
    }
    PatternElement e;
    if (c == U'\\') {
      if (++i == cps.size()) throw RuleError(rule_id, "dangling '\\'");
      switch (cps[i]) {
        case U'd': e.cls = CharClass::kDigit; break;
        case U'u': e.cls = CharClass::kUpper; break;
        case U'l': e.cls = CharClass::kLower; break;
        case U's': e.cls = CharClass::kSpace; break;
        case U'n': e.cls = CharClass::kNewline; break;
        case U'a': e.cls = CharClass::kAny; break;
        case U'\\': case U'+': e.literal = cps[i]; break;
        default:
          throw RuleError(rule_id, "unknown escape '\\" +
                                       utf8::encode(std::u32string(1, cps[i])) +
                                       "'");
      }
    } else {
      e.literal = c;
    }
    out.push_back(e);
  }
  return out;
}

class BoundaryRuleSet {
 public:
  BoundaryRuleSet() = default;

  // Validates the rules and builds the dispatch table. Throws RuleError.
  explicit BoundaryRuleSet(std::vector<BoundaryRule> rules)
      : rules_(std::move(rules)) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < rules_.size(); ++i) {
      const BoundaryRule& r = rules_[i];
      if (!seen.insert(r.id).second) throw RuleError(r.id, "duplicate rule id");
      if (r.pattern.empty()) throw RuleError(r.id, "empty pattern");
      if (r.anchor_offset >= r.pattern.size()) {
        throw RuleError(r.id, "anchor_offset outside pattern");
      }
      dispatch_[key_of(r.pattern.front())].push_back(i);
    }
  }

  std::span<const BoundaryRule> rules() const { return rules_; }

  // Rule indices whose first pattern element can accept `c`, ascending.
  std::vector<std::size_t> candidates(char32_t c) const {
    std::vector<std::size_t> out;
    const auto add = [&](std::uint32_t key) {
      auto it = dispatch_.find(key);
      if (it != dispatch_.end()) {
        out.insert(out.end(), it->second.begin(), it->second.end());
      }
    };
    add(static_cast<std::uint32_t>(c));
    const PatternElement probes[] = {
        {CharClass::kDigit}, {CharClass::kUpper}, {CharClass::kLower},
        {CharClass::kSpace}, {CharClass::kNewline}, {CharClass::kAny}};
    for (const auto& p : probes) {
      if (p.accepts(c)) add(key_of(p));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Dispatch key -> rule indices. Every rule appears under exactly one key.
  const std::unordered_map<std::uint32_t, std::vector<std::size_t>>& dispatch()
      const {
    return dispatch_;
  }

 private:
  static std::uint32_t key_of(const PatternElement& e) {
    if (e.cls == CharClass::kLiteral) return static_cast<std::uint32_t>(e.literal);
    return 0x110000u + static_cast<std::uint32_t>(e.cls);
  }

  std::vector<BoundaryRule> rules_;
  std::unordered_map<std::uint32_t, std::vector<std::size_t>> dispatch_;
};

inline BoundaryRuleSet parse_boundary_rules(std::string_view content,
                                            const std::string& source = "") {
  std::vector<BoundaryRule> rules;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& id, const std::string& what) {
    throw RuleError(id, (source.empty() ? "" : source + ":") + "line " +
                            std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos;
         start = tab + 1) {
      cols.push_back(line.substr(start, tab - start));
    }
    cols.push_back(line.substr(start));
    if (cols.size() != 5) fail("", "expected 5 tab-separated columns");
    BoundaryRule r;
    r.id = cols[0];
    if (r.id.empty()) fail("", "empty rule id");
    if (cols[1] == "begin") {
      r.kind = BoundaryKind::kBegin;
    } else if (cols[1] == "end") {
      r.kind = BoundaryKind::kEnd;
    } else if (cols[1] == "suppress") {
      r.kind = BoundaryKind::kSuppress;
    } else {
      fail(r.id, "kind must be begin, end or suppress");
    }
    try {
      r.pattern = parse_boundary_pattern(cols[2], r.id);
    } catch (const RuleError& e) {
      fail(r.id, e.what());
    }
    if (r.pattern.empty()) fail(r.id, "empty pattern");
    const auto parse_int = [&](const std::string& s, auto& value) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
      if (ec != std::errc() || p != s.data() + s.size()) {
        fail(r.id, "invalid integer '" + s + "'");
      }
    };
    parse_int(cols[3], r.anchor_offset);
    parse_int(cols[4], r.priority);
    if (r.anchor_offset >= r.pattern.size()) {
      fail(r.id, "anchor_offset outside pattern");
    }
    rules.push_back(std::move(r));
  }
  try {
    return BoundaryRuleSet(std::move(rules));
  } catch (const RuleError& e) {
    throw RuleError(e.rule_id(), (source.empty() ? "" : source + ": ") +
                                     std::string(e.what()));
  }
}

inline BoundaryRuleSet load_boundary_rules(const std::filesystem::path& path) {
  return parse_boundary_rules(read_file(path), path.string());
}

enum class DispatchMode { kHashed, kNaive };

namespace detail {

// Collects the anchor character positions of every way `rule` matches at
// `start`.
inline void match_boundary_rule(const BoundaryRule& rule,
                                const std::u32string& cps, std::size_t start,
                                std::set<std::size_t>& anchors) {
  const auto& pat = rule.pattern;
  const bool first_char = rule.kind == BoundaryKind::kBegin;
  auto rec = [&](auto&& self, std::size_t k, std::size_t pos,
                 std::size_t anchor) -> void {
    if (k == pat.size()) {
      anchors.insert(anchor);
      return;
    }
    const PatternElement& e = pat[k];
    if (pos >= cps.size() || !e.accepts(cps[pos])) return;
    std::size_t end = pos + 1;
    if (e.repeat) {
      while (end < cps.size() && e.accepts(cps[end])) ++end;
    }
    // Try every repetition count, longest first.
    for (std::size_t stop = end; stop > pos; --stop) {
      std::size_t a = anchor;
      if (k == rule.anchor_offset) a = first_char ? pos : stop - 1;
      self(self, k + 1, stop, a);
      if (!e.repeat) break;
    }
  };
  rec(rec, 0, start, 0);
}

}  // namespace detail

// Partitions the tokens of `doc` into sentences. Replaces doc.sentences.
inline void segment(Document& doc, const BoundaryRuleSet& rules,
                    DispatchMode mode = DispatchMode::kHashed) {
  doc.sentences.clear();
  const std::size_t n = doc.size();
  if (n == 0) return;
  const std::u32string cps = utf8::decode(doc.text());

  struct Vote {
    int priority;
    bool split;
  };
  std::map<std::size_t, Vote> votes;  // boundary char position -> vote
  const auto cast = [&](std::size_t pos, const Vote& v) {
    auto [it, inserted] = votes.emplace(pos, v);
    if (inserted) return;
    Vote& cur = it->second;
    if (v.priority > cur.priority ||
        (v.priority == cur.priority && !v.split)) {
      cur = v;
    }
  };

  std::vector<std::size_t> all(rules.rules().size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::set<std::size_t> anchors;
  for (std::size_t pos = 0; pos < cps.size(); ++pos) {
    const std::vector<std::size_t> cand =
        mode == DispatchMode::kHashed ? rules.candidates(cps[pos]) : all;
    for (std::size_t idx : cand) {
      const BoundaryRule& rule = rules.rules()[idx];
      anchors.clear();
      detail::match_boundary_rule(rule, cps, pos, anchors);
      for (std::size_t a : anchors) {
        const std::size_t boundary =
            rule.kind == BoundaryKind::kBegin ? a : a + 1;
        cast(boundary, Vote{rule.priority, rule.kind != BoundaryKind::kSuppress});
      }
    }
  }

  const auto tokens = doc.tokens();
  std::vector<bool> split_before(n + 1, false);
  for (const auto& [pos, vote] : votes) {
    if (!vote.split) continue;
    auto it = std::partition_point(
        tokens.begin(), tokens.end(),
        [&](const Token& t) { return t.start_char < pos; });
    split_before[static_cast<std::size_t>(it - tokens.begin())] = true;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::string& ws = tokens[i].trailing_ws;
    if (std::count(ws.begin(), ws.end(), '\n') >= 2) split_before[i + 1] = true;
  }

  std::size_t start = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i == n || split_before[i]) {
      doc.sentences.push_back(Span{start, i, "sentence", {}});
      start = i;
    }
  }
}

}  // namespace clintext

#endif  // CLINTEXT_SENTENCIZER_HPP
