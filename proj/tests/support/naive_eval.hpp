#pragma once

// Brute-force reference evaluator. It re-derives words from raw field strings
// on every call and never touches Index, postings, or the production
// tokenizer, so agreement with evaluate() is meaningful.

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

#include "bibcurate/query.hpp"
#include "bibcurate/record.hpp"
#include "bibcurate/resolver.hpp"

namespace bibcurate::testkit {

using Group = std::vector<std::string>;  // parts of one hyphen group

inline bool word_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u);
}

/// Splits text into hyphen groups of lower-case parts.
inline std::vector<Group> naive_groups(const std::string& text) {
  std::string lowered;
  for (char c : text) lowered += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  // Chunks are separated by anything that is neither a word char nor '-'.
  std::vector<std::string> chunks;
  std::string cur;
  for (char c : lowered) {
    if (word_char(c) || c == '-') {
      cur += c;
    } else if (!cur.empty()) {
      chunks.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) chunks.push_back(cur);

  // Within a chunk, '-' joins non-empty pieces; an empty piece (leading,
  // trailing, or doubled '-') closes the current group.
  std::vector<Group> groups;
  for (const auto& chunk : chunks) {
    Group g;
    std::string piece;
    for (std::size_t i = 0; i <= chunk.size(); ++i) {
      if (i < chunk.size() && chunk[i] != '-') {
        piece += chunk[i];
        continue;
      }
      if (!piece.empty()) {
        g.push_back(piece);
        piece.clear();
      } else if (!g.empty()) {
        groups.push_back(g);
        g.clear();
      }
    }
    if (!g.empty()) groups.push_back(g);
  }
  return groups;
}

inline std::vector<std::string> naive_words(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& g : naive_groups(text))
    for (const auto& p : g) out.push_back(p);
  return out;
}

/// True when words[k..] can be matched starting at part `pos` of the flat
/// part list, where a whole hyphen group may match one word in joined form.
inline bool match_from(const std::vector<std::string>& parts, const std::vector<std::size_t>& group_of,
                       const std::vector<std::size_t>& group_start, const std::vector<Group>& groups,
                       const std::vector<std::string>& words, std::size_t pos, std::size_t k) {
  if (k == words.size()) return true;
  if (pos >= parts.size()) return false;
  if (parts[pos] == words[k] && match_from(parts, group_of, group_start, groups, words, pos + 1, k + 1))
    return true;
  std::size_t g = group_of[pos];
  if (group_start[g] == pos && groups[g].size() > 1) {
    std::string joined;
    for (const auto& p : groups[g]) joined += p;
    if (joined == words[k] &&
        match_from(parts, group_of, group_start, groups, words, pos + groups[g].size(), k + 1))
      return true;
  }
  return false;
}

/// Acronym test by enumerating segmentations of the token.
inline bool naive_is_acronym(const std::string& token, const std::vector<std::string>& words) {
  std::size_t k = words.size();
  if (k < 2 || token.size() < k || token.size() > k + 1) return false;
  for (const auto& w : words)
    if (w.empty() || static_cast<unsigned char>(w[0]) >= 0x80) return false;
  if (token.size() == k) {
    for (std::size_t i = 0; i < k; ++i)
      if (token[i] != words[i][0]) return false;
    return true;
  }
  // One word contributes two letters: its initial and some later letter.
  for (std::size_t two = 0; two < k; ++two) {
    bool ok = true;
    std::size_t t = 0;
    for (std::size_t i = 0; i < k && ok; ++i) {
      if (token[t++] != words[i][0]) ok = false;
      if (ok && i == two) {
        char extra = token[t++];
        ok = words[i].find(extra, 1) != std::string::npos;
      }
    }
    if (ok) return true;
  }
  return false;
}

inline bool naive_text_match(const std::string& text, const std::vector<std::string>& words, bool expand) {
  if (words.empty()) return false;
  auto groups = naive_groups(text);
  std::vector<std::string> parts;
  std::vector<std::size_t> group_of, group_start;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    group_start.push_back(parts.size());
    for (const auto& p : groups[g]) {
      parts.push_back(p);
      group_of.push_back(g);
    }
  }
  for (std::size_t pos = 0; pos < parts.size(); ++pos)
    if (match_from(parts, group_of, group_start, groups, words, pos, 0)) return true;
  if (expand) {
    for (const auto& g : groups) {
      for (const auto& p : g)
        if (naive_is_acronym(p, words)) return true;
      if (g.size() > 1) {
        std::string joined;
        for (const auto& p : g) joined += p;
        if (naive_is_acronym(joined, words)) return true;
      }
    }
  }
  return false;
}

inline std::vector<std::string> naive_field_values(const BibRecord& r, Field f) {
  std::vector<std::string> v;
  auto add_all = [&](const std::vector<std::string>& xs) { v.insert(v.end(), xs.begin(), xs.end()); };
  switch (f) {
    case Field::abs:
      v = {r.title, r.abstract};
      add_all(r.keywords);
      break;
    case Field::full:
      v = {r.title, r.abstract};
      add_all(r.keywords);
      if (r.body) v.push_back(*r.body);
      break;
    case Field::body:
      if (r.body) v.push_back(*r.body);
      break;
    case Field::title: v = {r.title}; break;
    case Field::author: add_all(r.authors); break;
    case Field::keyword: add_all(r.keywords); break;
    case Field::doctype: v = {std::string(doctype_name(r.doctype))}; break;
    case Field::year: v = {std::to_string(r.year)}; break;
    case Field::bibgroup: break;
  }
  return v;
}

inline bool naive_matches(const BibRecord& r, const QueryNode& n, const LibraryResolver& libs,
                          Field scope = Field::full) {
  return std::visit(
      [&](const auto& alt) -> bool {
        using T = std::decay_t<decltype(alt)>;
        if constexpr (std::is_same_v<T, Phrase> || std::is_same_v<T, Word>) {
          if (scope == Field::bibgroup) return libs.group(alt.text).count(r.bibcode) > 0;
          bool expand = false;
          if constexpr (std::is_same_v<T, Phrase>) expand = !alt.exact;
          auto words = naive_words(alt.text);
          for (const auto& value : naive_field_values(r, scope))
            if (naive_text_match(value, words, expand)) return true;
          return false;
        } else if constexpr (std::is_same_v<T, FieldScope>) {
          return naive_matches(r, *alt.child, libs, alt.field);
        } else if constexpr (std::is_same_v<T, DocsRef>) {
          return libs.members(alt.key).count(r.bibcode) > 0;
        } else if constexpr (std::is_same_v<T, YearRange>) {
          return r.year >= alt.first && r.year <= alt.last;
        } else if constexpr (std::is_same_v<T, And>) {
          bool all = true;
          for (const auto& c : alt.children) all = naive_matches(r, c, libs, scope) && all;
          return all;
        } else if constexpr (std::is_same_v<T, Or>) {
          bool any = false;
          for (const auto& c : alt.children) any = naive_matches(r, c, libs, scope) || any;
          return any;
        } else {
          return !naive_matches(r, *alt.child, libs, scope);
        }
      },
      n.v);
}

/// Hits in the documented order: year descending, then bibcode descending.
inline std::vector<std::string> naive_search(const Corpus& corpus, const QueryNode& n, const LibraryResolver& libs) {
  std::vector<const BibRecord*> hits;
  for (const auto& r : corpus.records())
    if (naive_matches(r, n, libs)) hits.push_back(&r);
  std::sort(hits.begin(), hits.end(), [](const BibRecord* a, const BibRecord* b) {
    return std::make_pair(a->year, a->bibcode) > std::make_pair(b->year, b->bibcode);
  });
  std::vector<std::string> out;
  for (const auto* r : hits) out.push_back(r->bibcode);
  return out;
}

}  // namespace bibcurate::testkit
