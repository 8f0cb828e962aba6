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

#ifndef CLINTEXT_SECTIONIZER_HPP
#define CLINTEXT_SECTIONIZER_HPP

// Section title detection, section tree construction and propagation of
// section-level attribute defaults onto entities.
//
// Titles match only at line starts and must be followed by ":" (which joins
// the title) or by the end of the line. Matching folds case and lets any
// whitespace run in a literal match any whitespace run in the text. The
// longest literal wins; ties go to the earlier rule.

#include <algorithm>
#include <filesystem>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "clintext/document.hpp"
#include "clintext/errors.hpp"
#include "clintext/io_util.hpp"
#include "clintext/matcher.hpp"
#include "clintext/utf8.hpp"

namespace clintext {

struct SectionRule {
  std::string category;
  std::vector<std::string> literals;
  std::vector<std::string> parents;
  Attrs attr_overrides;
};

class SectionRuleSet {
 public:
  SectionRuleSet() = default;

  explicit SectionRuleSet(std::vector<SectionRule> rules)
      : rules_(std::move(rules)) {
    std::unordered_set<std::string> categories;
    for (const auto& r : rules_) {
      if (r.category.empty()) throw RuleError("", "section rule without category");
      categories.insert(r.category);
    }
    for (std::size_t i = 0; i < rules_.size(); ++i) {
      const SectionRule& r = rules_[i];
      if (r.literals.empty()) throw RuleError(r.category, "no literals");
      for (const auto& p : r.parents) {
        if (!categories.contains(p)) {
          throw RuleError(r.category, "unknown parent category '" + p + "'");
        }
      }
      for (const auto& lit : r.literals) {
        std::u32string folded = utf8::to_lower(utf8::decode(lit));
        // Trim and collapse whitespace to single spaces.
        std::u32string norm;
        for (char32_t c : folded) {
          if (utf8::is_space(c)) {
            if (!norm.empty() && norm.back() != U' ') norm.push_back(U' ');
          } else {
            norm.push_back(c);
          }
        }
        while (!norm.empty() && norm.back() == U' ') norm.pop_back();
        if (norm.empty()) throw RuleError(r.category, "empty literal");
        literals_.push_back({std::move(norm), i});
      }
      by_category_.emplace(r.category, i);
    }
  }

  std::span<const SectionRule> rules() const { return rules_; }

  const SectionRule* find(std::string_view category) const {
    auto it = by_category_.find(std::string(category));
    return it == by_category_.end() ? nullptr : &rules_[it->second];
  }

  struct Literal {
    std::u32string text;
    std::size_t rule;
  };
  std::span<const Literal> literals() const { return literals_; }

 private:
  std::vector<SectionRule> rules_;
  std::vector<Literal> literals_;
  std::unordered_map<std::string, std::size_t> by_category_;
};

inline std::vector<SectionRule> parse_section_rules(const nlohmann::json& j) {
  if (!j.is_array()) throw RuleError("", "section rules must be a JSON array");
  std::vector<SectionRule> rules;
  for (const auto& item : j) {
    const std::string category = item.value("category", "");
    try {
      SectionRule r;
      r.category = category;
      r.literals = item.at("literals").get<std::vector<std::string>>();
      if (item.contains("parents")) {
        r.parents = item.at("parents").get<std::vector<std::string>>();
      }
      if (item.contains("attr_overrides")) {
        r.attr_overrides = detail::parse_attrs(item.at("attr_overrides"), category);
      }
      rules.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw RuleError(category, e.what());
    }
  }
  return rules;
}

inline nlohmann::json to_json(const std::vector<SectionRule>& rules) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rules) {
    nlohmann::json o{{"category", r.category}, {"literals", r.literals}};
    if (!r.parents.empty()) o["parents"] = r.parents;
    if (!r.attr_overrides.empty()) {
      nlohmann::json attrs = nlohmann::json::object();
      for (const auto& [k, v] : r.attr_overrides) {
        std::visit([&](const auto& x) { attrs[k] = x; }, v);
      }
      o["attr_overrides"] = attrs;
    }
    out.push_back(std::move(o));
  }
  return out;
}

inline SectionRuleSet load_section_rules(const std::filesystem::path& path) {
  try {
    return SectionRuleSet(parse_section_rules(read_json_file(path)));
  } catch (const RuleError& e) {
    throw RuleError(e.rule_id(), path.string() + ": " + e.what());
  }
}

namespace detail {

// End character of a match of `lit` starting at `pos`, or npos.
inline std::size_t match_title_literal(const std::u32string& lower_text,
                                       std::size_t pos,
                                       const std::u32string& lit) {
  std::size_t p = pos;
  for (char32_t c : lit) {
    if (c == U' ') {
      if (p >= lower_text.size() || !utf8::is_space(lower_text[p])) {
        return std::u32string::npos;
      }
      while (p < lower_text.size() && utf8::is_space(lower_text[p])) ++p;
    } else {
      if (p >= lower_text.size() || lower_text[p] != c) {
        return std::u32string::npos;
      }
      ++p;
    }
  }
  return p;
}

}  // namespace detail

// Replaces doc.sections with the detected section forest.
inline void detect_sections(Document& doc, const SectionRuleSet& rules) {
  doc.sections.clear();
  const std::size_t n = doc.size();
  if (n == 0) return;
  const auto tokens = doc.tokens();
  const std::u32string lower = utf8::to_lower(utf8::decode(doc.text()));

  std::unordered_map<std::size_t, std::size_t> token_ending_at;
  for (std::size_t t = 0; t < n; ++t) token_ending_at.emplace(tokens[t].end_char, t);
  const auto line_ends_after = [&](std::size_t t) {
    return t + 1 == n || tokens[t].trailing_ws.find('\n') != std::string::npos;
  };

  struct Title {
    TokenRange range;
    std::size_t rule;
  };
  std::vector<Title> titles;
  for (std::size_t t = 0; t < n;) {
    const bool line_start =
        t == 0 || tokens[t - 1].trailing_ws.find('\n') != std::string::npos;
    std::optional<Title> best;
    std::size_t best_len = 0;
    if (line_start) {
      for (const auto& lit : rules.literals()) {
        if (lit.text.size() <= best_len) continue;
        const std::size_t end =
            detail::match_title_literal(lower, tokens[t].start_char, lit.text);
        if (end == std::u32string::npos) continue;
        auto it = token_ending_at.find(end);
        if (it == token_ending_at.end()) continue;
        std::size_t last = it->second;
        if (lit.text.back() != U':') {
          if (last + 1 < n && !line_ends_after(last) &&
              doc.token_text(last + 1) == ":") {
            ++last;
          } else if (!line_ends_after(last)) {
            continue;
          }
        }
        best = Title{{t, last + 1}, lit.rule};
        best_len = lit.text.size();
      }
    }
    if (best) {
      titles.push_back(*best);
      t = best->range.end;
    } else {
      ++t;
    }
  }

  if (titles.empty() || titles.front().range.begin > 0) {
    Section implicit;
    implicit.body = {0, titles.empty() ? n : titles.front().range.begin};
    doc.sections.push_back(std::move(implicit));
  }
  for (std::size_t k = 0; k < titles.size(); ++k) {
    const SectionRule& rule = rules.rules()[titles[k].rule];
    Section s;
    s.category = rule.category;
    s.title = titles[k].range;
    s.body = {titles[k].range.end,
              k + 1 < titles.size() ? titles[k + 1].range.begin : n};
    const std::size_t index = doc.sections.size();
    if (!doc.sections.empty() && !rule.parents.empty()) {
      std::optional<std::size_t> cur = index - 1;
      while (cur) {
        const auto& cat = doc.sections[*cur].category;
        if (cat && std::find(rule.parents.begin(), rule.parents.end(), *cat) !=
                       rule.parents.end()) {
          s.parent = cur;
          doc.sections[*cur].children.push_back(index);
          break;
        }
        cur = doc.sections[*cur].parent;
      }
    }
    doc.sections.push_back(std::move(s));
  }
}

// Copies each entity's section category onto it and applies the section
// rule's attribute overrides. A true attribute is never cleared and string
// attributes already present are kept.
inline void apply_section_attributes(Document& doc, const SectionRuleSet& rules) {
  for (Entity& e : doc.entities) {
    const auto idx = doc.section_of(e.span.start_token);
    if (!idx) {
      throw std::logic_error("entity at token " +
                             std::to_string(e.span.start_token) +
                             " is not inside any section");
    }
    const Section& sec = doc.sections[*idx];
    e.section_category = sec.category;
    if (!sec.category) continue;
    const SectionRule* rule = rules.find(*sec.category);
    if (rule == nullptr) continue;
    for (const auto& [k, v] : rule->attr_overrides) {
      if (const bool* b = std::get_if<bool>(&v)) {
        if (*b) {
          e.set_flag(k, true);
        } else if (!e.span.attrs.contains(k)) {
          e.set_flag(k, false);
        }
      } else if (!e.span.attrs.contains(k)) {
        e.span.attrs.emplace(k, v);
      }
    }
  }
}

// Lowercase ASCII alphanumerics joined by single underscores.
inline std::string slugify(std::string_view s) {
  std::string out;
  bool pending = false;
  for (std::size_t pos = 0; pos < s.size();) {
    const char32_t c = utf8::simple_lower(utf8::next(s, pos));
    if (utf8::is_alnum(c)) {
      if (pending && !out.empty()) out.push_back('_');
      pending = false;
      utf8::append(out, c);
    } else {
      pending = true;
    }
  }
  return out;
}

// One rule per template line ending in ':' (after trimming). Rules whose
// generated categories coincide are merged; order of first appearance is
// kept.
inline std::vector<SectionRule> rules_from_template(
    std::string_view template_text, std::string_view category_prefix) {
  std::vector<SectionRule> rules;
  std::unordered_map<std::string, std::size_t> index;
  std::istringstream in{std::string(template_text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::u32string cps = utf8::decode(line);
    std::size_t b = 0, e = cps.size();
    while (b < e && utf8::is_space(cps[b])) ++b;
    while (e > b && utf8::is_space(cps[e - 1])) --e;
    if (e == b || cps[e - 1] != U':') continue;
    const std::string literal = utf8::encode(cps.substr(b, e - b));
    const std::string category = std::string(category_prefix) + slugify(literal);
    auto [it, inserted] = index.emplace(category, rules.size());
    if (inserted) {
      rules.push_back(SectionRule{category, {literal}, {}, {}});
    } else {
      auto& lits = rules[it->second].literals;
      if (std::find(lits.begin(), lits.end(), literal) == lits.end()) {
        lits.push_back(literal);
      }
    }
  }
  return rules;
}

}  // namespace clintext

#endif  // CLINTEXT_SECTIONIZER_HPP
