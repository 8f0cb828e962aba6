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

#ifndef CLINTEXT_NORMALIZER_HPP
#define CLINTEXT_NORMALIZER_HPP

// Approximate dictionary matching over character n-gram feature sets.
//
// Each term is normalized (lowercase, whitespace collapsed), padded with
// n-1 '#' markers on each side and reduced to its set of distinct n-grams.
// Entries are bucketed by feature-set size with one inverted index per
// bucket. A query only visits the buckets where the threshold is reachable
// and only scores entries that share at least the measure's minimum overlap
// with it.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
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

enum class Measure { kCosine, kJaccard, kDice, kOverlap };

inline Measure parse_measure(std::string_view s) {
  const std::string lower = utf8::to_lower(s);
  if (lower == "cosine") return Measure::kCosine;
  if (lower == "jaccard") return Measure::kJaccard;
  if (lower == "dice") return Measure::kDice;
  if (lower == "overlap") return Measure::kOverlap;
  throw std::invalid_argument("unknown similarity measure '" + std::string(s) + "'");
}

inline std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::kCosine: return "COSINE";
    case Measure::kJaccard: return "JACCARD";
    case Measure::kDice: return "DICE";
    case Measure::kOverlap: return "OVERLAP";
  }
  return "";
}

// Similarity of feature sets of sizes x and y sharing `overlap` features.
inline double similarity(Measure m, std::size_t x, std::size_t y,
                         std::size_t overlap) {
  const double o = static_cast<double>(overlap);
  const double dx = static_cast<double>(x), dy = static_cast<double>(y);
  switch (m) {
    case Measure::kCosine: return o / std::sqrt(dx * dy);
    case Measure::kJaccard: return o / (dx + dy - o);
    case Measure::kDice: return 2.0 * o / (dx + dy);
    case Measure::kOverlap: return o / std::min(dx, dy);
  }
  return 0.0;
}

// Inclusive range of entry feature-set sizes that can reach `threshold`
// against a query with x features. Slightly widened against rounding.
inline std::pair<std::size_t, std::size_t> size_bounds(Measure m, std::size_t x,
                                                       double threshold,
                                                       std::size_t max_size) {
  const double dx = static_cast<double>(x), t = threshold;
  double lo = 1, hi = static_cast<double>(max_size);
  switch (m) {
    case Measure::kCosine: lo = t * t * dx; hi = dx / (t * t); break;
    case Measure::kJaccard: lo = t * dx; hi = dx / t; break;
    case Measure::kDice: lo = t * dx / (2.0 - t); hi = (2.0 - t) * dx / t; break;
    case Measure::kOverlap: break;
  }
  const auto lo_i = static_cast<std::size_t>(std::max(1.0, std::ceil(lo - 1e-9 * std::max(1.0, lo))));
  const double hi_c = std::floor(hi + 1e-9 * std::max(1.0, hi));
  const auto hi_i = static_cast<std::size_t>(
      std::min(static_cast<double>(max_size), std::max(0.0, hi_c)));
  return {lo_i, hi_i};
}

// Smallest overlap with which an entry of size y can reach `threshold`.
inline std::size_t min_overlap(Measure m, std::size_t x, std::size_t y,
                               double threshold) {
  const double dx = static_cast<double>(x), dy = static_cast<double>(y),
               t = threshold;
  double a = 0;
  switch (m) {
    case Measure::kCosine: a = t * std::sqrt(dx * dy); break;
    case Measure::kJaccard: a = t * (dx + dy) / (1.0 + t); break;
    case Measure::kDice: a = t * (dx + dy) / 2.0; break;
    case Measure::kOverlap: a = t * std::min(dx, dy); break;
  }
  return static_cast<std::size_t>(
      std::max(1.0, std::ceil(a - 1e-9 * std::max(1.0, a))));
}

struct DictEntry {
  std::string term;
  std::string cui;
  std::vector<std::string> semtypes;
  friend bool operator==(const DictEntry&, const DictEntry&) = default;
};

struct SearchHit {
  std::size_t entry = 0;
  double similarity = 0.0;
};

// Distinct padded n-grams of the normalized string, in first-seen order.
inline std::vector<std::string> ngram_features(std::string_view s, std::size_t n) {
  std::u32string cps = utf8::decode(utf8::normalize(s));
  cps.insert(0, n - 1, U'#');
  cps.append(n - 1, U'#');
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i + n <= cps.size(); ++i) {
    std::string g = utf8::encode(std::u32string_view(cps).substr(i, n));
    if (seen.insert(g).second) out.push_back(std::move(g));
  }
  return out;
}

class NgramIndex {
 public:
  NgramIndex() = default;

  std::size_t n() const { return n_; }
  std::span<const DictEntry> entries() const { return entries_; }
  const DictEntry& entry(std::size_t i) const { return entries_.at(i); }
  std::size_t feature_count(std::size_t entry) const {
    return entry_features_.at(entry).size();
  }
  std::size_t max_size() const { return max_size_; }
  // Sizes with at least one entry.
  std::vector<std::size_t> bucket_sizes() const {
    std::vector<std::size_t> out;
    for (const auto& [k, _] : buckets_) out.push_back(k);
    return out;
  }
  // Entry ids filed under `size` for `feature`.
  std::span<const std::uint32_t> postings(std::size_t size,
                                          std::string_view feature) const {
    auto b = buckets_.find(size);
    auto f = vocab_.find(std::string(feature));
    if (b == buckets_.end() || f == vocab_.end()) return {};
    auto p = b->second.find(f->second);
    if (p == b->second.end()) return {};
    return p->second;
  }

  // Entries whose similarity with `query` is at least `threshold`, ordered
  // by entry id.
  std::vector<SearchHit> search(std::string_view query, Measure measure,
                                double threshold) const {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
      throw std::invalid_argument("threshold must be in (0, 1]");
    }
    std::vector<SearchHit> hits;
    if (entries_.empty()) return hits;
    const std::vector<std::string> features = ngram_features(query, n_);
    const std::size_t x = features.size();
    if (x == 0) return hits;
    std::vector<std::uint32_t> known;
    for (const auto& f : features) {
      auto it = vocab_.find(f);
      if (it != vocab_.end()) known.push_back(it->second);
    }
    const auto [lo, hi] = size_bounds(measure, x, threshold, max_size_);
    std::unordered_map<std::uint32_t, std::uint32_t> counts;
    for (auto b = buckets_.lower_bound(lo); b != buckets_.end() && b->first <= hi;
         ++b) {
      const std::size_t y = b->first;
      const std::size_t need = min_overlap(measure, x, y, threshold);
      if (need > std::min(x, y) || need > known.size()) continue;
      counts.clear();
      for (std::uint32_t f : known) {
        auto p = b->second.find(f);
        if (p == b->second.end()) continue;
        for (std::uint32_t e : p->second) ++counts[e];
      }
      for (const auto& [e, c] : counts) {
        if (c < need) continue;
        const double sim = similarity(measure, x, y, c);
        if (sim >= threshold) hits.push_back({e, sim});
      }
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
      return a.entry < b.entry;
    });
    return hits;
  }

  // Binary cache. Layout (little-endian): magic "CTXNGIDX", u32 version,
  // u64 dictionary hash, u32 n, vocabulary, entries with feature ids.
  void save(const std::filesystem::path& path, std::uint64_t dict_hash) const {
    std::ostringstream out;
    out.write(kMagic, 8);
    put<std::uint32_t>(out, kVersion);
    put<std::uint64_t>(out, dict_hash);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(n_));
    std::vector<const std::string*> by_id(vocab_.size());
    for (const auto& [f, id] : vocab_) by_id[id] = &f;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(by_id.size()));
    for (const auto* f : by_id) put_string(out, *f);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(entries_.size()));
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const DictEntry& e = entries_[i];
      put_string(out, e.term);
      put_string(out, e.cui);
      put<std::uint32_t>(out, static_cast<std::uint32_t>(e.semtypes.size()));
      for (const auto& s : e.semtypes) put_string(out, s);
      put<std::uint32_t>(out, static_cast<std::uint32_t>(entry_features_[i].size()));
      for (std::uint32_t f : entry_features_[i]) put<std::uint32_t>(out, f);
    }
    write_file(path, out.str());
  }

  // Loads a cache file. Returns nullopt when the file is missing, has a
  // different version or was built from a different dictionary.
  static std::optional<NgramIndex> load(const std::filesystem::path& path,
                                        std::optional<std::uint64_t> dict_hash) {
    if (!std::filesystem::exists(path)) return std::nullopt;
    const std::string data = read_file(path);
    std::istringstream in(data);
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
      throw IoError(path.string(), "not an n-gram index cache");
    }
    try {
      if (get<std::uint32_t>(in) != kVersion) return std::nullopt;
      const auto hash = get<std::uint64_t>(in);
      if (dict_hash && hash != *dict_hash) return std::nullopt;
      NgramIndex idx;
      idx.n_ = get<std::uint32_t>(in);
      const auto vocab_size = get<std::uint32_t>(in);
      for (std::uint32_t i = 0; i < vocab_size; ++i) idx.vocab_.emplace(get_string(in), i);
      const auto count = get<std::uint32_t>(in);
      for (std::uint32_t i = 0; i < count; ++i) {
        DictEntry e;
        e.term = get_string(in);
        e.cui = get_string(in);
        const auto st = get<std::uint32_t>(in);
        for (std::uint32_t k = 0; k < st; ++k) e.semtypes.push_back(get_string(in));
        std::vector<std::uint32_t> feats(get<std::uint32_t>(in));
        for (auto& f : feats) {
          f = get<std::uint32_t>(in);
          if (f >= vocab_size) throw std::runtime_error("feature id out of range");
        }
        idx.entries_.push_back(std::move(e));
        idx.entry_features_.push_back(std::move(feats));
      }
      idx.rebuild_postings();
      return idx;
    } catch (const std::exception& e) {
      throw IoError(path.string(), std::string("corrupt index cache: ") + e.what());
    }
  }

  friend NgramIndex build_index(std::vector<DictEntry> entries, std::size_t n);

 private:
  static constexpr char kMagic[8] = {'C', 'T', 'X', 'N', 'G', 'I', 'D', 'X'};
  static constexpr std::uint32_t kVersion = 1;

  template <typename T>
  static void put(std::ostream& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out.put(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
    }
  }
  template <typename T>
  static T get(std::istream& in) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      const int c = in.get();
      if (c == EOF) throw std::runtime_error("unexpected end of file");
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return static_cast<T>(v);
  }
  static void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  static std::string get_string(std::istream& in) {
    const auto len = get<std::uint32_t>(in);
    std::string s(len, '\0');
    if (!in.read(s.data(), len)) throw std::runtime_error("unexpected end of file");
    return s;
  }

  void rebuild_postings() {
    buckets_.clear();
    max_size_ = 0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const std::size_t k = entry_features_[i].size();
      max_size_ = std::max(max_size_, k);
      auto& bucket = buckets_[k];
      for (std::uint32_t f : entry_features_[i]) {
        bucket[f].push_back(static_cast<std::uint32_t>(i));
      }
    }
  }

  std::size_t n_ = 3;
  std::vector<DictEntry> entries_;
  std::vector<std::vector<std::uint32_t>> entry_features_;
  std::unordered_map<std::string, std::uint32_t> vocab_;
  std::map<std::size_t, std::unordered_map<std::uint32_t, std::vector<std::uint32_t>>>
      buckets_;
  std::size_t max_size_ = 0;
};

// Throws std::invalid_argument for n < 2, no entries, or an empty term.
inline NgramIndex build_index(std::vector<DictEntry> entries, std::size_t n) {
  if (n < 2) throw std::invalid_argument("n-gram length must be at least 2");
  if (entries.empty()) throw std::invalid_argument("dictionary is empty");
  NgramIndex idx;
  idx.n_ = n;
  for (const DictEntry& e : entries) {
    if (utf8::normalize(e.term).empty()) {
      throw std::invalid_argument("dictionary entry with empty term (cui '" +
                                  e.cui + "')");
    }
    if (e.cui.empty()) {
      throw std::invalid_argument("dictionary entry '" + e.term + "' without cui");
    }
    std::vector<std::uint32_t> ids;
    for (const auto& f : ngram_features(e.term, n)) {
      auto [it, _] = idx.vocab_.emplace(f, static_cast<std::uint32_t>(idx.vocab_.size()));
      ids.push_back(it->second);
    }
    idx.entry_features_.push_back(std::move(ids));
  }
  idx.entries_ = std::move(entries);
  idx.rebuild_postings();
  return idx;
}

inline std::vector<SearchHit> search(const NgramIndex& index,
                                     std::string_view query, Measure measure,
                                     double threshold) {
  return index.search(query, measure, threshold);
}

// FNV-1a of the dictionary file contents, used to invalidate caches.
inline std::uint64_t content_hash(std::string_view data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// TSV with columns term, cui, semtypes (pipe-separated). Lines starting with
// '#' and blank lines are skipped.
inline std::vector<DictEntry> parse_dictionary(std::string_view content,
                                               const std::string& source = "") {
  std::vector<DictEntry> out;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
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
    if (cols.size() < 2 || cols.size() > 3 || cols[0].empty() || cols[1].empty()) {
      throw RuleError("", source + ":line " + std::to_string(line_no) +
                              ": expected term<TAB>cui<TAB>semtypes");
    }
    DictEntry e{cols[0], cols[1], {}};
    if (cols.size() == 3) {
      std::size_t s = 0;
      for (std::size_t bar; s <= cols[2].size(); s = bar + 1) {
        bar = cols[2].find('|', s);
        if (bar == std::string::npos) bar = cols[2].size();
        std::string st = cols[2].substr(s, bar - s);
        if (!st.empty() &&
            std::find(e.semtypes.begin(), e.semtypes.end(), st) == e.semtypes.end()) {
          e.semtypes.push_back(std::move(st));
        }
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<DictEntry> load_dictionary(const std::filesystem::path& path) {
  return parse_dictionary(read_file(path), path.string());
}

struct NormalizerParams {
  std::size_t n = 3;
  double threshold = 0.7;
  Measure measure = Measure::kJaccard;
  std::size_t window = 6;
  bool best_match_only = true;
};

inline void validate(const NormalizerParams& p) {
  if (!(p.threshold > 0.0 && p.threshold <= 1.0)) {
    throw std::invalid_argument("threshold must be in (0, 1]");
  }
  if (p.window < 1) throw std::invalid_argument("window must be at least 1");
  if (p.n < 2) throw std::invalid_argument("n must be at least 2");
}

// Tokens that may not start or end a candidate span.
inline bool is_boundary_stopword(std::string_view lower) {
  static const std::unordered_set<std::string_view> kStop = {
      "a", "an", "the", "of", "and", "or", "with", "without", "in", "on",
      "at", "to", "for", "from", "by", "is", "was", "are", "were", "be",
      "been", "has", "had", "have", "as", "but", "if", "no", "not", "denies",
      "pt", "patient", "this", "that", "there", "his", "her", "he", "she",
      "it", "its", "per", "than", "then", "x", "s/p", "c/o", "h/o"};
  return kStop.contains(lower);
}

inline void map_concepts(Document& doc, const NgramIndex& index,
                         const NormalizerParams& params) {
  validate(params);
  const std::size_t n = doc.size();
  if (n == 0) return;
  std::vector<bool> edge_ok(n);
  for (std::size_t t = 0; t < n; ++t) {
    const std::string lower = utf8::to_lower(doc.token_text(t));
    const std::u32string cps = utf8::decode(lower);
    const bool punct = std::none_of(cps.begin(), cps.end(), [](char32_t c) {
      return utf8::is_alnum(c);
    });
    edge_ok[t] = !punct && !is_boundary_stopword(lower);
  }
  std::vector<TokenRange> windows;
  for (const Span& s : doc.sentences) windows.push_back(s.range());
  if (windows.empty()) windows.push_back({0, n});

  struct Candidate {
    TokenRange range;
    double similarity;
    std::vector<SearchHit> hits;
  };
  std::vector<Candidate> cands;
  for (const TokenRange& w : windows) {
    for (std::size_t b = w.begin; b < w.end; ++b) {
      if (!edge_ok[b]) continue;
      for (std::size_t e = b + 1; e <= std::min(w.end, b + params.window); ++e) {
        if (!edge_ok[e - 1]) continue;
        const std::string text{span_text(doc, TokenRange{b, e})};
        auto hits = index.search(text, params.measure, params.threshold);
        if (hits.empty()) continue;
        double best = 0.0;
        for (const auto& h : hits) best = std::max(best, h.similarity);
        cands.push_back({{b, e}, best, std::move(hits)});
      }
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.range.size() != b.range.size()) return a.range.size() > b.range.size();
    return a.range.begin < b.range.begin;
  });
  std::vector<const Candidate*> kept;
  for (const Candidate& c : cands) {
    if (std::none_of(kept.begin(), kept.end(), [&](const Candidate* k) {
          return k->range.intersects(c.range);
        })) {
      kept.push_back(&c);
    }
  }

  std::vector<Entity> added;
  for (const Candidate* c : kept) {
    const SearchHit* best = nullptr;
    std::string all_cuis;
    for (const auto& h : c->hits) {
      if (best == nullptr || h.similarity > best->similarity) best = &h;
    }
    for (const auto& h : c->hits) {
      if (!all_cuis.empty()) all_cuis += '|';
      all_cuis += index.entry(h.entry).cui;
    }
    const DictEntry& entry = index.entry(best->entry);
    auto existing = std::find_if(doc.entities.begin(), doc.entities.end(),
                                 [&](const Entity& e) { return e.range() == c->range; });
    Entity* target = nullptr;
    if (existing != doc.entities.end()) {
      target = &*existing;
    } else {
      Entity e;
      e.span = Span{c->range.begin, c->range.end, {}, e.span.attrs};
      e.category = entry.semtypes.empty() ? std::string("concept") : entry.semtypes.front();
      e.span.label = e.category;
      e.rule_id = "normalizer";
      added.push_back(std::move(e));
      target = &added.back();
    }
    target->cui = entry.cui;
    target->similarity = best->similarity;
    if (!params.best_match_only) target->span.attrs.insert_or_assign("cui_candidates", all_cuis);
  }
  doc.add_entities(std::move(added));
}

}  // namespace clintext

#endif  // CLINTEXT_NORMALIZER_HPP
