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

#ifndef CLINTEXT_MATCHER_HPP
#define CLINTEXT_MATCHER_HPP

// Rule-based concept extraction. A rule matches by a literal phrase
// (case-insensitive, token by token), by a sequence of per-token
// constraints, or by a document-level regular expression that may cross
// tokens. Regex hits are leftmost-longest and are aligned outward to token
// boundaries. The same match machinery backs ConText modifier rules.

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <boost/regex.hpp>

#include "json.hpp"

#include "clintext/document.hpp"
#include "clintext/errors.hpp"
#include "clintext/io_util.hpp"
#include "clintext/tokenizer.hpp"
#include "clintext/utf8.hpp"

namespace clintext {

struct TokenConstraint {
  enum class Kind { kText, kLower, kRegex, kWildcard };
  Kind kind = Kind::kWildcard;
  std::string value;
};

// Exactly one of the three forms is set.
struct MatchSpec {
  std::optional<std::string> literal;
  std::optional<std::vector<TokenConstraint>> pattern;
  std::optional<std::string> regex;
};

struct TargetRule {
  std::string id;
  std::string category;
  MatchSpec match;
  Attrs metadata;
};

struct RawMatch {
  TokenRange range;
  std::size_t rule = 0;
  friend bool operator==(const RawMatch&, const RawMatch&) = default;
};

// Longest span wins among overlapping candidates; ties go to the earlier
// start, then the lower rule index. Result is sorted by start.
inline std::vector<RawMatch> resolve_overlaps(std::vector<RawMatch> matches) {
  std::sort(matches.begin(), matches.end(),
            [](const RawMatch& a, const RawMatch& b) {
              return std::make_tuple(b.range.size(), a.range.begin, a.rule,
                                     a.range.end) <
                     std::make_tuple(a.range.size(), b.range.begin, b.rule,
                                     b.range.end);
            });
  std::vector<RawMatch> kept;
  for (const RawMatch& m : matches) {
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](const RawMatch& k) {
      return k.range.intersects(m.range);
    });
    if (!clash) kept.push_back(m);
  }
  std::sort(kept.begin(), kept.end(), [](const RawMatch& a, const RawMatch& b) {
    return a.range.begin < b.range.begin;
  });
  return kept;
}

namespace detail {

inline MatchSpec parse_match_spec(const nlohmann::json& j,
                                  const std::string& id) {
  MatchSpec spec;
  if (j.contains("literal")) spec.literal = j.at("literal").get<std::string>();
  if (j.contains("regex")) spec.regex = j.at("regex").get<std::string>();
  if (j.contains("pattern")) {
    std::vector<TokenConstraint> pat;
    for (const auto& c : j.at("pattern")) {
      TokenConstraint tc;
      if (c.contains("text")) {
        tc = {TokenConstraint::Kind::kText, c.at("text").get<std::string>()};
      } else if (c.contains("lower")) {
        tc = {TokenConstraint::Kind::kLower, c.at("lower").get<std::string>()};
      } else if (c.contains("regex")) {
        tc = {TokenConstraint::Kind::kRegex, c.at("regex").get<std::string>()};
      } else if (c.value("wildcard", false)) {
        tc = {TokenConstraint::Kind::kWildcard, {}};
      } else {
        throw RuleError(id, "token constraint needs text, lower, regex or "
                            "wildcard");
      }
      pat.push_back(std::move(tc));
    }
    spec.pattern = std::move(pat);
  }
  return spec;
}

inline Attrs parse_attrs(const nlohmann::json& j, const std::string& id) {
  Attrs attrs;
  if (!j.is_object()) throw RuleError(id, "attribute record must be an object");
  for (const auto& [k, v] : j.items()) {
    if (v.is_boolean()) {
      attrs.emplace(k, v.get<bool>());
    } else if (v.is_string()) {
      attrs.emplace(k, v.get<std::string>());
    } else {
      throw RuleError(id, "attribute '" + k + "' must be boolean or string");
    }
  }
  return attrs;
}

inline boost::regex compile_regex(const std::string& pattern,
                                  const std::string& id) {
  try {
    return boost::regex(pattern, boost::regex::perl | boost::regex::icase);
  } catch (const boost::regex_error& e) {
    throw RuleError(id, "invalid regex '" + pattern + "': " + e.what());
  }
}

}  // namespace detail

// Compiled match specs shared by the target matcher and ConText.
class SpecMatcher {
 public:
  SpecMatcher() = default;

  SpecMatcher(const std::vector<std::pair<std::string, MatchSpec>>& specs,
              const TokenizerRules& tokenizer_rules) {
    std::unordered_set<std::string> ids;
    const Tokenizer tokenizer(tokenizer_rules);
    compiled_.reserve(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto& [id, spec] = specs[i];
      if (id.empty()) throw RuleError("", "rule without id");
      if (!ids.insert(id).second) throw RuleError(id, "duplicate rule id");
      const int forms = spec.literal.has_value() + spec.pattern.has_value() +
                        spec.regex.has_value();
      if (forms != 1) {
        throw RuleError(id, "exactly one of literal, pattern, regex required");
      }
      Compiled c;
      if (spec.literal) {
        const Document lit = tokenizer(*spec.literal);
        if (lit.size() == 0) throw RuleError(id, "empty literal");
        for (std::size_t t = 0; t < lit.size(); ++t) {
          c.literal.push_back(utf8::to_lower(lit.token_text(t)));
        }
        phrase_table_[c.literal.front()].push_back(i);
      } else if (spec.pattern) {
        if (spec.pattern->empty()) throw RuleError(id, "empty token pattern");
        for (const auto& tc : *spec.pattern) {
          Compiled::Step step{tc.kind, tc.value, boost::regex()};
          if (tc.kind == TokenConstraint::Kind::kLower) {
            step.value = utf8::to_lower(tc.value);
          } else if (tc.kind == TokenConstraint::Kind::kRegex) {
            step.regex = detail::compile_regex(tc.value, id);
          }
          c.pattern.push_back(std::move(step));
        }
        pattern_rules_.push_back(i);
      } else {
        if (spec.regex->empty()) throw RuleError(id, "empty regex");
        c.regex = detail::compile_regex(*spec.regex, id);
        regex_rules_.push_back(i);
      }
      compiled_.push_back(std::move(c));
    }
  }

  std::size_t size() const { return compiled_.size(); }

  // Every raw match lying inside `window`, before overlap resolution. Regex
  // matches are searched inside the window's text only.
  std::vector<RawMatch> find_all(const Document& doc, TokenRange window) const {
    std::vector<RawMatch> out;
    if (window.empty()) return out;
    std::vector<std::string> lower(window.size());
    for (std::size_t t = window.begin; t < window.end; ++t) {
      lower[t - window.begin] = utf8::to_lower(doc.token_text(t));
    }
    for (std::size_t t = window.begin; t < window.end; ++t) {
      auto it = phrase_table_.find(lower[t - window.begin]);
      if (it == phrase_table_.end()) continue;
      for (std::size_t rule : it->second) {
        const auto& lit = compiled_[rule].literal;
        if (t + lit.size() > window.end) continue;
        bool ok = true;
        for (std::size_t k = 1; k < lit.size() && ok; ++k) {
          ok = lower[t + k - window.begin] == lit[k];
        }
        if (ok) out.push_back({{t, t + lit.size()}, rule});
      }
    }
    for (std::size_t rule : pattern_rules_) {
      const auto& pat = compiled_[rule].pattern;
      for (std::size_t t = window.begin; t + pat.size() <= window.end; ++t) {
        bool ok = true;
        for (std::size_t k = 0; k < pat.size() && ok; ++k) {
          ok = step_accepts(pat[k], doc.token_text(t + k),
                            lower[t + k - window.begin]);
        }
        if (ok) out.push_back({{t, t + pat.size()}, rule});
      }
    }
    if (!regex_rules_.empty()) {
      const auto [wstart, wend] = doc.char_range(window);
      const std::string& text = doc.text();
      const auto begin = text.begin() + static_cast<std::ptrdiff_t>(doc.byte_offset(wstart));
      const auto end = text.begin() + static_cast<std::ptrdiff_t>(doc.byte_offset(wend));
      for (std::size_t rule : regex_rules_) {
        for (const auto& [s, e] : regex_hits(compiled_[rule].regex, begin, end)) {
          const std::size_t cs = doc.char_offset(static_cast<std::size_t>(s - text.begin()));
          const std::size_t ce = doc.char_offset(static_cast<std::size_t>(e - text.begin()) - 1) + 1;
          if (auto span = char_span(doc, cs, ce, Align::kExpand)) {
            out.push_back({span->range(), rule});
          }
        }
      }
    }
    std::sort(out.begin(), out.end(), [](const RawMatch& a, const RawMatch& b) {
      return std::tie(a.range.begin, a.range.end, a.rule) <
             std::tie(b.range.begin, b.range.end, b.rule);
    });
    return out;
  }

  // True iff the tokens in `range` satisfy rule `rule` on their own.
  bool validates(const Document& doc, TokenRange range, std::size_t rule) const {
    const auto found = find_all(doc, range);
    return std::any_of(found.begin(), found.end(), [&](const RawMatch& m) {
      return m.rule == rule && (m.range == range || is_regex(rule));
    });
  }

  bool is_regex(std::size_t rule) const {
    return std::find(regex_rules_.begin(), regex_rules_.end(), rule) !=
           regex_rules_.end();
  }

 private:
  using Iter = std::string::const_iterator;

  struct Compiled {
    struct Step {
      TokenConstraint::Kind kind;
      std::string value;
      boost::regex regex;
    };
    std::vector<std::string> literal;
    std::vector<Step> pattern;
    boost::regex regex;
  };

  static bool step_accepts(const Compiled::Step& step, std::string_view text,
                           const std::string& lower) {
    switch (step.kind) {
      case TokenConstraint::Kind::kText: return text == step.value;
      case TokenConstraint::Kind::kLower: return lower == step.value;
      case TokenConstraint::Kind::kRegex:
        return boost::regex_match(text.begin(), text.end(), step.regex);
      case TokenConstraint::Kind::kWildcard: return true;
    }
    return false;
  }

  // Non-overlapping leftmost-longest hits in [begin, end).
  static std::vector<std::pair<Iter, Iter>> regex_hits(const boost::regex& re,
                                                       Iter begin, Iter end) {
    std::vector<std::pair<Iter, Iter>> hits;
    boost::match_results<Iter> m;
    Iter pos = begin;
    auto flags = boost::match_posix;
    while (pos != end && boost::regex_search(pos, end, m, re, flags)) {
      if (m[0].length() == 0) {
        pos = m[0].first == end ? end : std::next(m[0].first);
      } else {
        hits.emplace_back(m[0].first, m[0].second);
        pos = m[0].second;
      }
      flags = flags | boost::match_prev_avail;
    }
    return hits;
  }

  std::vector<Compiled> compiled_;
  std::unordered_map<std::string, std::vector<std::size_t>> phrase_table_;
  std::vector<std::size_t> pattern_rules_;
  std::vector<std::size_t> regex_rules_;
};

class TargetMatcher {
 public:
  TargetMatcher() = default;

  std::span<const TargetRule> rules() const { return rules_; }
  std::size_t size() const { return rules_.size(); }
  const SpecMatcher& specs() const { return specs_; }

  friend TargetMatcher compile_rules(std::vector<TargetRule> rules,
                                     const TokenizerRules& tokenizer_rules);

 private:
  std::vector<TargetRule> rules_;
  SpecMatcher specs_;
};

// Throws RuleError naming the offending rule.
inline TargetMatcher compile_rules(
    std::vector<TargetRule> rules,
    const TokenizerRules& tokenizer_rules = default_tokenizer_rules()) {
  std::vector<std::pair<std::string, MatchSpec>> specs;
  for (const auto& r : rules) {
    if (r.category.empty()) throw RuleError(r.id, "missing category");
    specs.emplace_back(r.id, r.match);
  }
  TargetMatcher m;
  m.specs_ = SpecMatcher(specs, tokenizer_rules);
  m.rules_ = std::move(rules);
  return m;
}

inline std::vector<TargetRule> parse_target_rules(const nlohmann::json& j) {
  if (!j.is_array()) throw RuleError("", "target rules must be a JSON array");
  std::vector<TargetRule> rules;
  for (const auto& item : j) {
    const std::string id = item.value("id", "");
    try {
      TargetRule r;
      r.id = id;
      r.category = item.at("category").get<std::string>();
      r.match = detail::parse_match_spec(item, id);
      if (item.contains("metadata")) {
        r.metadata = detail::parse_attrs(item.at("metadata"), id);
      }
      rules.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw RuleError(id, e.what());
    }
  }
  return rules;
}

inline std::vector<TargetRule> load_target_rules(
    const std::filesystem::path& path) {
  try {
    return parse_target_rules(read_json_file(path));
  } catch (const RuleError& e) {
    throw RuleError(e.rule_id(), path.string() + ": " + e.what());
  }
}

// Adds one entity per surviving match to doc.entities.
inline void match(Document& doc, const TargetMatcher& matcher) {
  if (doc.size() == 0 || matcher.size() == 0) return;
  const auto kept =
      resolve_overlaps(matcher.specs().find_all(doc, {0, doc.size()}));
  std::vector<Entity> found;
  for (const RawMatch& m : kept) {
    const TargetRule& rule = matcher.rules()[m.rule];
    Entity e;
    e.span.start_token = m.range.begin;
    e.span.end_token = m.range.end;
    e.span.label = rule.category;
    e.category = rule.category;
    e.rule_id = rule.id;
    for (const auto& [k, v] : rule.metadata) {
      if (k == "cui") {
        if (const auto* s = std::get_if<std::string>(&v)) {
          e.cui = *s;
          e.similarity = 1.0;
          continue;
        }
      }
      e.span.attrs.insert_or_assign(k, v);
    }
    found.push_back(std::move(e));
  }
  doc.add_entities(std::move(found));
}

}  // namespace clintext

#endif  // CLINTEXT_MATCHER_HPP
