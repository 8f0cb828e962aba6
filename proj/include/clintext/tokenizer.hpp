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

#ifndef CLINTEXT_TOKENIZER_HPP
#define CLINTEXT_TOKENIZER_HPP

// Whitespace-preserving tokenizer with clinical punctuation rules.
//
// Text is first cut into whitespace-free chunks. Inside a chunk, at every
// token start the longest matching abbreviation wins and is emitted whole;
// otherwise characters accumulate into a word until a split character, which
// becomes its own token unless a preserve_infix sequence sits between two
// alphanumerics there. A trailing run of sentence-final punctuation (. ? !)
// is always peeled off a word as one token.

#include <algorithm>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "clintext/document.hpp"
#include "clintext/errors.hpp"
#include "clintext/io_util.hpp"
#include "clintext/utf8.hpp"

namespace clintext {

struct TokenizerRules {
  std::vector<std::string> preserve_infix;
  std::vector<std::string> split_chars;
  std::vector<std::string> abbreviations;
};

inline TokenizerRules default_tokenizer_rules() {
  return TokenizerRules{
      {"/"},
      {"+", ",", ";", ":", "(", ")", "[", "]", "=", "<", ">"},
      {"c/o", "h/o", "s/p", "r/o", "w/o", "n/v", "n/v/d", "b/l", "f/u"}};
}

inline void validate(const TokenizerRules& rules) {
  for (const auto& a : rules.abbreviations) {
    const auto cps = utf8::decode(a);
    if (cps.empty() ||
        std::any_of(cps.begin(), cps.end(), [](char32_t c) {
          return utf8::is_space(c);
        })) {
      throw RuleError(a, "abbreviation must be non-empty without whitespace");
    }
  }
  for (const auto& s : rules.split_chars) {
    const auto cps = utf8::decode(s);
    if (cps.size() != 1 || utf8::is_alnum(cps[0]) || utf8::is_space(cps[0])) {
      throw RuleError(s, "split_chars entries must be one non-alphanumeric "
                         "character");
    }
  }
  for (const auto& p : rules.preserve_infix) {
    const auto cps = utf8::decode(p);
    if (cps.empty() || std::any_of(cps.begin(), cps.end(), [](char32_t c) {
          return utf8::is_space(c);
        })) {
      throw RuleError(p, "preserve_infix entry must be non-empty without "
                         "whitespace");
    }
  }
}

inline TokenizerRules parse_tokenizer_rules(const nlohmann::json& j) {
  if (!j.is_object()) throw RuleError("", "tokenizer rules must be an object");
  TokenizerRules rules;
  const auto strings = [&](const char* key) {
    std::vector<std::string> out;
    if (!j.contains(key)) return out;
    for (const auto& v : j.at(key)) {
      if (!v.is_string()) {
        throw RuleError("", std::string(key) + " entries must be strings");
      }
      out.push_back(v.get<std::string>());
    }
    return out;
  };
  rules.abbreviations = strings("abbreviations");
  rules.split_chars = strings("split_chars");
  rules.preserve_infix = strings("preserve_infix");
  validate(rules);
  return rules;
}

inline TokenizerRules load_tokenizer_rules(const std::filesystem::path& path) {
  return parse_tokenizer_rules(read_json_file(path));
}

namespace detail {

class ChunkTokenizer {
 public:
  ChunkTokenizer(const TokenizerRules& rules)
      : split_(to_u32(rules.split_chars)),
        infix_(to_u32(rules.preserve_infix)) {
    for (const auto& a : rules.abbreviations) {
      abbreviations_.push_back(utf8::to_lower(utf8::decode(a)));
    }
    // Longest first; stable keeps rule-file order among equal lengths.
    std::stable_sort(abbreviations_.begin(), abbreviations_.end(),
                     [](const auto& a, const auto& b) {
                       return a.size() > b.size();
                     });
  }

  void run(const std::u32string& cps,
           std::vector<std::pair<std::size_t, std::size_t>>& out) const {
    std::size_t i = 0;
    const std::size_t n = cps.size();
    while (i < n) {
      while (i < n && utf8::is_space(cps[i])) ++i;
      std::size_t j = i;
      while (j < n && !utf8::is_space(cps[j])) ++j;
      if (i < j) chunk(cps, i, j, out);
      i = j;
    }
  }

 private:
  static std::vector<std::u32string> to_u32(
      const std::vector<std::string>& v) {
    std::vector<std::u32string> out;
    for (const auto& s : v) out.push_back(utf8::decode(s));
    return out;
  }

  static bool matches_at(const std::u32string& cps, std::size_t pos,
                         std::size_t end, const std::u32string& needle,
                         bool fold) {
    if (pos + needle.size() > end) return false;
    for (std::size_t k = 0; k < needle.size(); ++k) {
      const char32_t c = fold ? utf8::simple_lower(cps[pos + k]) : cps[pos + k];
      if (c != needle[k]) return false;
    }
    return true;
  }

  bool is_split(char32_t c) const {
    return std::any_of(split_.begin(), split_.end(),
                       [c](const std::u32string& s) { return s[0] == c; });
  }

  std::size_t infix_length(const std::u32string& cps, std::size_t pos,
                           std::size_t begin, std::size_t end) const {
    if (pos == begin || !utf8::is_alnum(cps[pos - 1])) return 0;
    std::size_t best = 0;
    for (const auto& inf : infix_) {
      if (inf.size() > best && matches_at(cps, pos, end, inf, false) &&
          pos + inf.size() < end && utf8::is_alnum(cps[pos + inf.size()])) {
        best = inf.size();
      }
    }
    return best;
  }

  std::size_t abbreviation_length(const std::u32string& cps, std::size_t pos,
                                  std::size_t end) const {
    for (const auto& a : abbreviations_) {
      if (matches_at(cps, pos, end, a, true) &&
          (pos + a.size() == end || !utf8::is_alnum(cps[pos + a.size()]))) {
        return a.size();
      }
    }
    return 0;
  }

  static bool is_terminal(char32_t c) {
    return c == U'.' || c == U'?' || c == U'!';
  }

  static void flush_word(const std::u32string& cps, std::size_t begin,
                         std::size_t end,
                         std::vector<std::pair<std::size_t, std::size_t>>& out) {
    if (begin >= end) return;
    std::size_t k = end;
    while (k > begin && is_terminal(cps[k - 1])) --k;
    if (k > begin) out.emplace_back(begin, k);
    if (k < end) out.emplace_back(k, end);
  }

  void chunk(const std::u32string& cps, std::size_t begin, std::size_t end,
             std::vector<std::pair<std::size_t, std::size_t>>& out) const {
    std::size_t pos = begin;
    std::size_t word = end;  // end == no open word
    while (pos < end) {
      if (word == end) {
        if (std::size_t len = abbreviation_length(cps, pos, end); len > 0) {
          out.emplace_back(pos, pos + len);
          pos += len;
          continue;
        }
      }
      if (is_split(cps[pos])) {
        if (word != end) {
          if (std::size_t len = infix_length(cps, pos, word, end); len > 0) {
            pos += len;
            continue;
          }
          flush_word(cps, word, pos, out);
          word = end;
        }
        out.emplace_back(pos, pos + 1);
        ++pos;
        continue;
      }
      if (word == end) word = pos;
      ++pos;
    }
    if (word != end) flush_word(cps, word, end, out);
  }

  std::vector<std::u32string> split_;
  std::vector<std::u32string> infix_;
  std::vector<std::u32string> abbreviations_;
};

}  // namespace detail

// Total over valid UTF-8; throws EncodingError otherwise.
inline Document tokenize(std::string text, const TokenizerRules& rules) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  detail::ChunkTokenizer(rules).run(utf8::decode(text), ranges);
  return Document(std::move(text), ranges);
}

// Reusable tokenizer holding preprocessed rules.
class Tokenizer {
 public:
  explicit Tokenizer(const TokenizerRules& rules = default_tokenizer_rules())
      : impl_(rules) {}

  Document operator()(std::string text) const {
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    impl_.run(utf8::decode(text), ranges);
    return Document(std::move(text), ranges);
  }

 private:
  detail::ChunkTokenizer impl_;
};

}  // namespace clintext

#endif  // CLINTEXT_TOKENIZER_HPP
