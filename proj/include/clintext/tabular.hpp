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

#ifndef CLINTEXT_TABULAR_HPP
#define CLINTEXT_TABULAR_HPP

// One-row-per-entity flattening, CSV / JSONL writers and corpus readers.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "clintext/document.hpp"
#include "clintext/errors.hpp"
#include "clintext/io_util.hpp"

namespace clintext {

struct ExtractionRow {
  std::string doc_id;
  std::string ent_text;
  std::size_t start_char = 0;
  std::size_t end_char = 0;
  std::string category;
  std::optional<std::string> cui;
  std::optional<double> similarity;
  bool is_negated = false;
  bool is_historical = false;
  bool is_hypothetical = false;
  bool is_uncertain = false;
  bool is_family = false;
  std::optional<std::string> section_category;
  std::string sentence_text;
  // Custom attributes; emitted in JSONL only.
  Attrs extras;

  friend bool operator==(const ExtractionRow&, const ExtractionRow&) = default;
};

inline constexpr std::string_view kCsvHeader =
    "doc_id,ent_text,start_char,end_char,category,cui,similarity,is_negated,"
    "is_historical,is_hypothetical,is_uncertain,is_family,section_category,"
    "sentence_text";

inline std::vector<ExtractionRow> to_rows(const Document& doc,
                                          std::string_view doc_id) {
  std::vector<ExtractionRow> rows;
  rows.reserve(doc.entities.size());
  for (const Entity& e : doc.entities) {
    ExtractionRow r;
    r.doc_id = doc_id;
    r.ent_text = span_text(doc, e.span);
    std::tie(r.start_char, r.end_char) = doc.char_range(e.range());
    r.category = e.category;
    r.cui = e.cui;
    r.similarity = e.similarity;
    r.is_negated = e.is_negated();
    r.is_historical = e.is_historical();
    r.is_hypothetical = e.is_hypothetical();
    r.is_uncertain = e.is_uncertain();
    r.is_family = e.is_family();
    r.section_category = e.section_category;
    if (auto s = doc.sentence_of(e.span.start_token)) {
      r.sentence_text = span_text(doc, doc.sentences[*s]);
    }
    for (const auto& [k, v] : e.span.attrs) {
      if (!attr::is_assertion(k)) r.extras.emplace(k, v);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

enum class Format { kCsv, kJsonl };

inline Format parse_format(std::string_view s) {
  if (s == "csv") return Format::kCsv;
  if (s == "jsonl") return Format::kJsonl;
  throw std::invalid_argument("unknown output format '" + std::string(s) + "'");
}

// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string to_csv_line(const ExtractionRow& r) {
  const auto b = [](bool v) { return v ? "true" : "false"; };
  std::string line;
  line += csv_field(r.doc_id) + ',';
  line += csv_field(r.ent_text) + ',';
  line += std::to_string(r.start_char) + ',';
  line += std::to_string(r.end_char) + ',';
  line += csv_field(r.category) + ',';
  line += (r.cui ? csv_field(*r.cui) : "") + ',';
  line += (r.similarity ? format_double(*r.similarity) : "") + ',';
  line += std::string(b(r.is_negated)) + ',' + b(r.is_historical) + ',' +
          b(r.is_hypothetical) + ',' + b(r.is_uncertain) + ',' + b(r.is_family) + ',';
  line += (r.section_category ? csv_field(*r.section_category) : "") + ',';
  line += csv_field(r.sentence_text);
  line += '\n';
  return line;
}

inline nlohmann::ordered_json to_json(const ExtractionRow& r) {
  nlohmann::ordered_json j;
  const auto opt = [](const auto& o) -> nlohmann::ordered_json {
    if (!o) return nullptr;
    return *o;
  };
  j["doc_id"] = r.doc_id;
  j["ent_text"] = r.ent_text;
  j["start_char"] = r.start_char;
  j["end_char"] = r.end_char;
  j["category"] = r.category;
  j["cui"] = opt(r.cui);
  j["similarity"] = opt(r.similarity);
  j["is_negated"] = r.is_negated;
  j["is_historical"] = r.is_historical;
  j["is_hypothetical"] = r.is_hypothetical;
  j["is_uncertain"] = r.is_uncertain;
  j["is_family"] = r.is_family;
  j["section_category"] = opt(r.section_category);
  j["sentence_text"] = r.sentence_text;
  if (!r.extras.empty()) {
    nlohmann::ordered_json extras = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.extras) {
      std::visit([&](const auto& x) { extras[k] = x; }, v);
    }
    j["extras"] = std::move(extras);
  }
  return j;
}

inline std::string to_jsonl_line(const ExtractionRow& r) {
  return to_json(r).dump(-1, ' ', false,
                         nlohmann::ordered_json::error_handler_t::strict) +
         "\n";
}

// Streaming writer. Each row is serialized completely before it is written.
class RowWriter {
 public:
  RowWriter(const std::filesystem::path& path, Format format)
      : path_(path), format_(format), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError(path.string(), "cannot open for writing");
    if (format_ == Format::kCsv) put(std::string(kCsvHeader) + "\n");
  }

  void write(const ExtractionRow& row) {
    put(format_ == Format::kCsv ? to_csv_line(row) : to_jsonl_line(row));
    ++count_;
  }

  std::size_t finish() {
    out_.flush();
    if (!out_) throw IoError(path_.string(), "write failed");
    out_.close();
    return count_;
  }

  std::size_t count() const { return count_; }

 private:
  void put(const std::string& s) {
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!out_) throw IoError(path_.string(), "write failed");
  }

  std::filesystem::path path_;
  Format format_;
  std::ofstream out_;
  std::size_t count_ = 0;
};

inline std::size_t write(std::span<const ExtractionRow> rows, Format format,
                         const std::filesystem::path& path) {
  RowWriter w(path, format);
  for (const auto& r : rows) w.write(r);
  return w.finish();
}

// RFC 4180 reader (accepts \n or \r\n record separators).
inline std::vector<std::vector<std::string>> parse_csv(std::string_view data) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const char c = data[i];
    any = true;
    if (quoted) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') ++i;
      rec.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(rec));
      rec.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quoted CSV field");
  if (any) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  return records;
}

struct CorpusDoc {
  std::string doc_id;
  std::string text;
};

// Reads a directory of .txt files (doc_id = file stem, sorted by name) or a
// JSONL file of {doc_id, text} objects.
inline std::vector<CorpusDoc> read_corpus(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::vector<CorpusDoc> docs;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) docs.push_back({f.stem().string(), read_file(f)});
    return docs;
  }
  if (!fs::exists(path)) throw IoError(path.string(), "no such file or directory");
  const std::string content = read_file(path);
  std::size_t start = 0, line_no = 0;
  while (start < content.size()) {
    std::size_t nl = content.find('\n', start);
    if (nl == std::string::npos) nl = content.size();
    ++line_no;
    std::string_view line(content.data() + start, nl - start);
    start = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      docs.push_back({j.at("doc_id").get<std::string>(), j.at("text").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path.string(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

}  // namespace clintext

#endif  // CLINTEXT_TABULAR_HPP
