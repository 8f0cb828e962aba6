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

#ifndef CLINTEXT_VISUALIZER_HPP
#define CLINTEXT_VISUALIZER_HPP

// Static HTML views of a processed document: highlighted entities, modifiers
// and section titles, and an SVG of directed modifier -> entity links.

#include <algorithm>
#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "clintext/document.hpp"

namespace clintext {

namespace viz {

inline std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

// Fixed palette slot from an FNV-1a hash of the category.
inline std::string_view color_for(std::string_view category) {
  static constexpr std::array<std::string_view, 10> kPalette = {
      "#fde68a", "#bfdbfe", "#c7f9cc", "#fecaca", "#e9d5ff",
      "#fed7aa", "#a5f3fc", "#fbcfe8", "#d9f99d", "#ddd6fe"};
  std::uint32_t h = 2166136261u;
  for (unsigned char c : category) {
    h ^= c;
    h *= 16777619u;
  }
  return kPalette[h % kPalette.size()];
}

}  // namespace viz

// Pre-formatted text with <mark> elements for every entity, modifier and
// section title. Labels live in attributes only, so the element's text
// content is exactly the source text.
inline std::string render_highlight(const Document& doc) {
  struct Ann {
    std::size_t start, end;
    int kind;  // 0 section title, 1 entity, 2 modifier
    std::size_t index;
    std::string open;
  };
  std::vector<Ann> anns;
  for (std::size_t i = 0; i < doc.sections.size(); ++i) {
    const Section& s = doc.sections[i];
    if (!s.title || s.title->empty()) continue;
    const auto [a, b] = doc.char_range(*s.title);
    const std::string cat = s.category.value_or("");
    anns.push_back({a, b, 0, i,
                    "<mark class=\"section\" data-label=\"" + viz::escape(cat) +
                        "\" title=\"" + viz::escape(cat) +
                        "\" style=\"background:#e5e7eb;font-weight:bold\">"});
  }
  for (std::size_t i = 0; i < doc.entities.size(); ++i) {
    const Entity& e = doc.entities[i];
    const auto [a, b] = doc.char_range(e.range());
    std::string cls = "ent";
    for (auto name : attr::kAssertions) {
      if (e.flag(name)) {
        cls += ' ';
        cls += name.substr(3);  // drop "is_"
      }
    }
    std::string open = "<mark class=\"" + cls + "\" data-label=\"" +
                       viz::escape(e.category) + "\"";
    if (e.cui) open += " data-cui=\"" + viz::escape(*e.cui) + "\"";
    std::string tip = e.category;
    if (e.cui) tip += " " + *e.cui;
    open += " title=\"" + viz::escape(tip) + "\" style=\"background:" +
            std::string(viz::color_for(e.category)) +
            (e.is_negated() ? ";text-decoration:line-through" : "") + "\">";
    anns.push_back({a, b, 1, i, std::move(open)});
  }
  for (std::size_t i = 0; i < doc.modifiers.size(); ++i) {
    const Modifier& m = doc.modifiers[i];
    const auto [a, b] = doc.char_range(m.range());
    anns.push_back({a, b, 2, i,
                    "<mark class=\"modifier\" data-label=\"" +
                        viz::escape(m.category) + "\" data-direction=\"" +
                        std::string(to_string(m.direction)) + "\" title=\"" +
                        viz::escape(m.category) +
                        "\" style=\"background:none;border-bottom:2px solid " +
                        std::string(viz::color_for(m.category)) + "\">"});
  }
  std::sort(anns.begin(), anns.end(), [](const Ann& x, const Ann& y) {
    return std::tie(x.start, y.end, x.kind, x.index) <
           std::tie(y.start, x.end, y.kind, y.index);
  });

  std::set<std::size_t> cuts{0, doc.length()};
  for (const Ann& a : anns) {
    cuts.insert(a.start);
    cuts.insert(a.end);
  }
  std::string out =
      "<pre class=\"clintext-highlight\" style=\"white-space:pre-wrap;"
      "font-family:monospace;line-height:1.8\">";
  std::vector<std::size_t> stack;
  for (auto it = cuts.begin(); std::next(it) != cuts.end(); ++it) {
    const std::size_t a = *it, b = *std::next(it);
    std::vector<std::size_t> want;
    for (std::size_t k = 0; k < anns.size(); ++k) {
      if (anns[k].start <= a && anns[k].end >= b) want.push_back(k);
    }
    std::size_t common = 0;
    while (common < stack.size() && common < want.size() &&
           stack[common] == want[common]) {
      ++common;
    }
    while (stack.size() > common) {
      out += "</mark>";
      stack.pop_back();
    }
    for (std::size_t k = common; k < want.size(); ++k) {
      out += anns[want[k]].open;
      stack.push_back(want[k]);
    }
    out += viz::escape(doc.substr(a, b));
  }
  for (std::size_t k = 0; k < stack.size(); ++k) out += "</mark>";
  out += "</pre>";
  return out;
}

// Tokens laid out left to right with one arrow per link, drawn from the
// modifier to the entity and labeled with the modifier category.
inline std::string render_links(const Document& doc) {
  constexpr int kCharWidth = 8, kGap = 10, kMargin = 10, kBaseline = 0;
  std::vector<int> left(doc.size()), width(doc.size());
  int x = kMargin;
  for (std::size_t t = 0; t < doc.size(); ++t) {
    const auto cps = utf8::decode(doc.token_text(t));
    left[t] = x;
    width[t] = static_cast<int>(cps.size()) * kCharWidth;
    x += width[t] + kGap;
  }
  const int total_width = x + kMargin;
  const auto center = [&](const TokenRange& r) {
    return (left[r.begin] + left[r.end - 1] + width[r.end - 1]) / 2;
  };
  std::vector<Link> links = doc.links;
  std::sort(links.begin(), links.end());
  int max_height = 20;
  for (const Link& l : links) {
    const int d = std::abs(center(doc.modifiers[l.modifier].range()) -
                           center(doc.entities[l.entity].range()));
    max_height = std::max(max_height, 20 + d / 4);
  }
  const int token_y = max_height + 30;
  const int height = token_y + 15;

  std::string out = "<svg class=\"clintext-links\" xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    std::to_string(total_width) + "\" height=\"" +
                    std::to_string(height) + "\" viewBox=\"0 0 " +
                    std::to_string(total_width) + " " + std::to_string(height) +
                    "\" style=\"font-family:monospace;font-size:13px\">"
                    "<defs><marker id=\"head\" markerWidth=\"8\" markerHeight=\"8\" "
                    "refX=\"4\" refY=\"4\" orient=\"auto\"><path d=\"M0,0 L8,4 L0,8 z\" "
                    "fill=\"#374151\"/></marker></defs>";
  for (std::size_t t = 0; t < doc.size(); ++t) {
    std::string fill = "#111827";
    for (const Entity& e : doc.entities) {
      if (e.range().contains(t)) fill = "#1d4ed8";
    }
    for (const Modifier& m : doc.modifiers) {
      if (m.range().contains(t)) fill = "#b45309";
    }
    out += "<text class=\"tok\" x=\"" + std::to_string(left[t]) + "\" y=\"" +
           std::to_string(token_y) + "\" fill=\"" + fill + "\">" +
           viz::escape(doc.token_text(t)) + "</text>";
  }
  for (const Link& l : links) {
    const Modifier& m = doc.modifiers[l.modifier];
    const int x1 = center(m.range());
    const int x2 = center(doc.entities[l.entity].range());
    const int y = token_y - 15 + kBaseline;
    const int top = y - (20 + std::abs(x1 - x2) / 4);
    out += "<g class=\"arrow\" data-modifier=\"" + std::to_string(l.modifier) +
           "\" data-entity=\"" + std::to_string(l.entity) + "\">";
    out += "<path d=\"M" + std::to_string(x1) + "," + std::to_string(y) + " C" +
           std::to_string(x1) + "," + std::to_string(top) + " " +
           std::to_string(x2) + "," + std::to_string(top) + " " +
           std::to_string(x2) + "," + std::to_string(y) +
           "\" fill=\"none\" stroke=\"#374151\" marker-end=\"url(#head)\"/>";
    out += "<text class=\"arrow-label\" x=\"" + std::to_string((x1 + x2) / 2) +
           "\" y=\"" + std::to_string(top + 12) +
           "\" text-anchor=\"middle\" font-size=\"10\">" + viz::escape(m.category) +
           "</text></g>";
  }
  out += "</svg>";
  return out;
}

// Complete standalone page with both views.
inline std::string render_page(const Document& doc, std::string_view title) {
  std::string out =
      "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" +
      viz::escape(title) +
      "</title><style>mark[data-label]::after{content:\" \" attr(data-label);"
      "font-size:0.65em;font-weight:bold;vertical-align:super}"
      "mark.negated::after{content:\" \" attr(data-label) \" (negated)\"}"
      "</style></head><body>\n<h1>" +
      viz::escape(title) + "</h1>\n";
  out += render_highlight(doc);
  out += "\n<div style=\"overflow-x:auto\">";
  out += render_links(doc);
  out += "</div>\n</body></html>\n";
  return out;
}

}  // namespace clintext

#endif  // CLINTEXT_VISUALIZER_HPP
