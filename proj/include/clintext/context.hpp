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

#ifndef CLINTEXT_CONTEXT_HPP
#define CLINTEXT_CONTEXT_HPP

// ConText: contextual assertion of entities by modifier phrases.
//
// Per sentence: modifier rules are matched; modifiers fully covered by a
// PSEUDO match are dropped; the rest go through the longest-wins overlap
// filter. Each directional modifier gets a scope inside the sentence,
// truncated at the nearest terminator and capped by max_scope. Every entity
// intersecting the scope, and not overlapping the modifier itself, is
// linked and receives the modifier's asserted attribute.

#include <algorithm>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "clintext/document.hpp"
#include "clintext/errors.hpp"
#include "clintext/io_util.hpp"
#include "clintext/matcher.hpp"
#include "clintext/tokenizer.hpp"

namespace clintext {

inline constexpr std::string_view kNegatedExistence = "NEGATED_EXISTENCE";
inline constexpr std::string_view kHistorical = "HISTORICAL";
inline constexpr std::string_view kHypothetical = "HYPOTHETICAL";
inline constexpr std::string_view kUncertain = "UNCERTAIN";
inline constexpr std::string_view kFamily = "FAMILY";

// Attribute asserted by a canonical category; nullopt for user categories.
inline std::optional<std::string> default_assertion(std::string_view category) {
  if (category == kNegatedExistence) return std::string(attr::kNegated);
  if (category == kHistorical) return std::string(attr::kHistorical);
  if (category == kHypothetical) return std::string(attr::kHypothetical);
  if (category == kUncertain) return std::string(attr::kUncertain);
  if (category == kFamily) return std::string(attr::kFamily);
  return std::nullopt;
}

inline Direction parse_direction(std::string_view s) {
  if (s == "FORWARD") return Direction::kForward;
  if (s == "BACKWARD") return Direction::kBackward;
  if (s == "BIDIRECTIONAL") return Direction::kBidirectional;
  if (s == "TERMINATE") return Direction::kTerminate;
  if (s == "PSEUDO") return Direction::kPseudo;
  throw RuleError("", "unknown direction '" + std::string(s) + "'");
}

struct ContextRule {
  std::string id;
  MatchSpec match;
  std::string category;
  Direction direction = Direction::kForward;
  std::optional<std::size_t> max_scope;
  // Empty for TERMINATE and PSEUDO rules.
  std::string asserts;
};

class ContextRuleSet {
 public:
  ContextRuleSet() = default;

  // Validates rules, fills asserts for canonical categories and compiles the
  // match specs. Throws RuleError.
  explicit ContextRuleSet(
      std::vector<ContextRule> rules,
      const TokenizerRules& tokenizer_rules = default_tokenizer_rules())
      : rules_(std::move(rules)) {
    std::vector<std::pair<std::string, MatchSpec>> specs;
    for (ContextRule& r : rules_) {
      const bool passive = r.direction == Direction::kTerminate ||
                           r.direction == Direction::kPseudo;
      if (passive) {
        if (!r.asserts.empty()) {
          throw RuleError(r.id, "TERMINATE and PSEUDO rules assert nothing");
        }
      } else if (r.asserts.empty()) {
        auto def = default_assertion(r.category);
        if (!def) {
          throw RuleError(r.id, "category '" + r.category +
                                    "' must name its asserted attribute");
        }
        r.asserts = *def;
      }
      if (r.max_scope && *r.max_scope == 0) {
        throw RuleError(r.id, "max_scope must be positive");
      }
      specs.emplace_back(r.id, r.match);
    }
    specs_ = SpecMatcher(specs, tokenizer_rules);
  }

  std::span<const ContextRule> rules() const { return rules_; }
  const SpecMatcher& specs() const { return specs_; }

 private:
  std::vector<ContextRule> rules_;
  SpecMatcher specs_;
};

inline std::vector<ContextRule> parse_context_rules(const nlohmann::json& j) {
  if (!j.is_array()) throw RuleError("", "context rules must be a JSON array");
  std::vector<ContextRule> rules;
  for (const auto& item : j) {
    const std::string id = item.value("id", "");
    try {
      ContextRule r;
      r.id = id;
      r.match = detail::parse_match_spec(item, id);
      r.category = item.at("category").get<std::string>();
      r.direction = parse_direction(item.at("direction").get<std::string>());
      if (item.contains("max_scope")) {
        const auto v = item.at("max_scope").get<long long>();
        if (v <= 0) throw RuleError(id, "max_scope must be positive");
        r.max_scope = static_cast<std::size_t>(v);
      }
      r.asserts = item.value("asserts", "");
      rules.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw RuleError(id, e.what());
    } catch (const RuleError& e) {
      if (e.rule_id().empty()) throw RuleError(id, e.what());
      throw;
    }
  }
  return rules;
}

inline ContextRuleSet load_context_rules(
    const std::filesystem::path& path,
    const TokenizerRules& tokenizer_rules = default_tokenizer_rules()) {
  try {
    return ContextRuleSet(parse_context_rules(read_json_file(path)),
                          tokenizer_rules);
  } catch (const RuleError& e) {
    throw RuleError(e.rule_id(), path.string() + ": " + e.what());
  }
}

// Scope of a modifier at `modifier` inside `sentence`. Terminators are
// matched TERMINATE spans of the same sentence.
inline Scope scope_of(const TokenRange& modifier, const TokenRange& sentence,
                      std::span<const TokenRange> terminators,
                      Direction direction,
                      std::optional<std::size_t> max_scope) {
  Scope scope{{modifier.begin, modifier.begin}, {modifier.end, modifier.end}};
  const bool fwd = direction == Direction::kForward ||
                   direction == Direction::kBidirectional;
  const bool bwd = direction == Direction::kBackward ||
                   direction == Direction::kBidirectional;
  if (fwd) {
    std::size_t end = sentence.end;
    for (const TokenRange& t : terminators) {
      if (t.begin >= modifier.end && t.begin < end) end = t.begin;
    }
    if (max_scope) end = std::min(end, modifier.end + *max_scope);
    scope.forward = {modifier.end, std::max(end, modifier.end)};
  }
  if (bwd) {
    std::size_t begin = sentence.begin;
    for (const TokenRange& t : terminators) {
      if (t.end <= modifier.begin && t.end > begin) begin = t.end;
    }
    if (max_scope && modifier.begin > *max_scope) {
      begin = std::max(begin, modifier.begin - *max_scope);
    }
    scope.backward = {std::min(begin, modifier.begin), modifier.begin};
  }
  return scope;
}

inline Scope scope_of(const Modifier& modifier, const Span& sentence,
                      std::span<const TokenRange> terminators,
                      const ContextRule& rule) {
  return scope_of(modifier.range(), sentence.range(), terminators,
                  rule.direction, rule.max_scope);
}

// Replaces doc.modifiers and doc.links and sets asserted entity attributes.
// Attributes are only ever set to true, so repeated application is stable.
inline void apply_context(Document& doc, const ContextRuleSet& rules) {
  doc.modifiers.clear();
  doc.links.clear();
  const auto rule_list = rules.rules();
  for (const Span& sentence : doc.sentences) {
    const TokenRange window = sentence.range();
    std::vector<RawMatch> raw = rules.specs().find_all(doc, window);
    std::vector<TokenRange> pseudo;
    for (const RawMatch& m : raw) {
      if (rule_list[m.rule].direction == Direction::kPseudo) {
        pseudo.push_back(m.range);
      }
    }
    std::erase_if(raw, [&](const RawMatch& m) {
      if (rule_list[m.rule].direction == Direction::kPseudo) return true;
      return std::any_of(pseudo.begin(), pseudo.end(), [&](const TokenRange& p) {
        return p.contains(m.range);
      });
    });
    const std::vector<RawMatch> kept = resolve_overlaps(std::move(raw));

    std::vector<TokenRange> terminators;
    for (const RawMatch& m : kept) {
      if (rule_list[m.rule].direction == Direction::kTerminate) {
        terminators.push_back(m.range);
      }
    }
    for (const RawMatch& m : kept) {
      const ContextRule& rule = rule_list[m.rule];
      Modifier mod;
      mod.span = Span{m.range.begin, m.range.end, rule.category, {}};
      mod.category = rule.category;
      mod.direction = rule.direction;
      mod.asserts = rule.asserts;
      mod.rule_id = rule.id;
      if (rule.direction == Direction::kTerminate) {
        mod.scope = Scope{{m.range.begin, m.range.begin},
                          {m.range.end, m.range.end}};
      } else {
        mod.scope = scope_of(m.range, window, terminators, rule.direction,
                             rule.max_scope);
      }
      const std::size_t mod_index = doc.modifiers.size();
      if (!mod.asserts.empty()) {
        for (std::size_t e = 0; e < doc.entities.size(); ++e) {
          Entity& ent = doc.entities[e];
          if (ent.range().intersects(mod.range())) continue;
          if (!mod.scope.intersects(ent.range())) continue;
          doc.links.push_back(Link{mod_index, e});
          ent.set_flag(mod.asserts, true);
        }
      }
      doc.modifiers.push_back(std::move(mod));
    }
  }
  std::sort(doc.links.begin(), doc.links.end());
}

}  // namespace clintext

#endif  // CLINTEXT_CONTEXT_HPP
