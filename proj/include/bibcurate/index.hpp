#pragma once

// Positional inverted index and query evaluation.
//
// Matching rules:
//  - tokens are exact (no stemming, no synonyms); "technosignature" never
//    matches "technosignatures";
//  - a phrase matches consecutive tokens within one physical field, where a
//    hyphen group's joined token may stand in for its parts;
//  - a non-exact phrase of k >= 2 words also matches a single acronym token:
//    each word contributes its initial letter, optionally followed by later
//    letters of that word in order, and the acronym is at most k+1 letters
//    long ("Extraterrestrial Intelligence" -> ei, eti, ...);
//  - `abs` covers title, abstract and keywords; `full` covers those plus the
//    body; records without body text never match `body` terms.

#include <algorithm>
#include <array>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bibcurate/error.hpp"
#include "bibcurate/query.hpp"
#include "bibcurate/record.hpp"
#include "bibcurate/resolver.hpp"
#include "bibcurate/tokenize.hpp"

namespace bibcurate {

enum class PhysField : std::uint8_t { title, abstract, keywords, body, author, doctype, year };
inline constexpr std::size_t kPhysFieldCount = 7;

inline std::string_view phys_field_name(PhysField f) {
  switch (f) {
    case PhysField::title: return "title";
    case PhysField::abstract: return "abstract";
    case PhysField::keywords: return "keywords";
    case PhysField::body: return "body";
    case PhysField::author: return "author";
    case PhysField::doctype: return "doctype";
    case PhysField::year: return "year";
  }
  return "?";
}

/// Physical fields searched by a query field. bibgroup has none: it is
/// resolved through library names instead.
inline std::vector<PhysField> physical_fields(Field f) {
  switch (f) {
    case Field::abs: return {PhysField::title, PhysField::abstract, PhysField::keywords};
    case Field::body: return {PhysField::body};
    case Field::title: return {PhysField::title};
    case Field::author: return {PhysField::author};
    case Field::keyword: return {PhysField::keywords};
    case Field::doctype: return {PhysField::doctype};
    case Field::year: return {PhysField::year};
    case Field::full: return {PhysField::title, PhysField::abstract, PhysField::keywords, PhysField::body};
    case Field::bibgroup: return {};
  }
  return {};
}

using DocId = std::uint32_t;
using DocSet = std::vector<DocId>;  // sorted, unique

namespace docset {
inline DocSet unite(const DocSet& a, const DocSet& b) {
  DocSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}
inline DocSet intersect(const DocSet& a, const DocSet& b) {
  DocSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}
inline DocSet complement(const DocSet& a, std::size_t universe) {
  DocSet out;
  out.reserve(universe - std::min(universe, a.size()));
  auto it = a.begin();
  for (DocId d = 0; d < universe; ++d) {
    if (it != a.end() && *it == d) {
      ++it;
      continue;
    }
    out.push_back(d);
  }
  return out;
}
}  // namespace docset

struct Posting {
  DocId doc;
  std::uint32_t position;
  std::uint32_t span;
  bool operator<(const Posting& o) const {
    return doc != o.doc ? doc < o.doc : position != o.position ? position < o.position : span < o.span;
  }
};

/// One token occurrence that made a positive leaf match.
struct MatchTriple {
  PhysField field;
  std::string term;
  std::uint32_t position = 0;
  std::uint32_t span = 1;
  std::string note;  // "expanded-from: ..." for acronym hits
  bool operator==(const MatchTriple&) const = default;
};

struct SearchResult {
  std::vector<std::string> hits;  // year desc, then bibcode desc
  std::size_t total = 0;
  std::optional<std::map<std::string, std::vector<MatchTriple>>> explanations;
};

/// Candidate acronym tokens for the words of a phrase (see header comment).
inline std::set<std::string> acronym_candidates(const std::vector<std::string>& words) {
  std::set<std::string> out;
  if (words.size() < 2) return out;
  std::string initials;
  for (const auto& w : words) {
    if (w.empty() || static_cast<unsigned char>(w[0]) >= 0x80) return {};
    initials += w[0];
  }
  out.insert(initials);
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t j = 1; j < words[i].size(); ++j) {
      std::string c = initials;
      c.insert(i + 1, 1, words[i][j]);
      out.insert(std::move(c));
    }
  }
  return out;
}

class Index {
 public:
  /// The corpus must outlive the index.
  explicit Index(const Corpus& corpus) : corpus_(&corpus) {
    for (DocId d = 0; d < corpus.size(); ++d) add_record(d, corpus[d]);
    for (auto& field : postings_)
      for (auto& [tok, list] : field) std::sort(list.begin(), list.end());
  }

  const Corpus& corpus() const { return *corpus_; }
  std::size_t size() const { return corpus_->size(); }

  const std::vector<Posting>* postings(PhysField f, const std::string& token) const {
    const auto& m = postings_[static_cast<std::size_t>(f)];
    auto it = m.find(token);
    return it == m.end() ? nullptr : &it->second;
  }

  /// Start/end positions of every phrase occurrence of `words` in doc `d`.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> phrase_occurrences(
      PhysField f, const std::vector<std::string>& words, DocId d) const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    if (words.empty()) return out;
    auto occ = [&](const std::string& w) {
      std::vector<Posting> xs;
      if (const auto* list = postings(f, w)) {
        auto lo = std::lower_bound(list->begin(), list->end(), Posting{d, 0, 0});
        for (auto it = lo; it != list->end() && it->doc == d; ++it) xs.push_back(*it);
      }
      return xs;
    };
    // (start, reachable end) pairs, advanced word by word.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> frontier;
    for (const auto& p : occ(words[0])) frontier.emplace_back(p.position, p.position + p.span);
    for (std::size_t k = 1; k < words.size() && !frontier.empty(); ++k) {
      auto next = occ(words[k]);
      std::vector<std::pair<std::uint32_t, std::uint32_t>> advanced;
      for (const auto& [start, end] : frontier)
        for (const auto& p : next)
          if (p.position == end) advanced.emplace_back(start, p.position + p.span);
      std::sort(advanced.begin(), advanced.end());
      advanced.erase(std::unique(advanced.begin(), advanced.end()), advanced.end());
      frontier = std::move(advanced);
    }
    return frontier;
  }

  DocSet docs_with_token(PhysField f, const std::string& token) const {
    DocSet out;
    if (const auto* list = postings(f, token))
      for (const auto& p : *list)
        if (out.empty() || out.back() != p.doc) out.push_back(p.doc);
    return out;
  }

  DocSet phrase_docs(PhysField f, const std::vector<std::string>& words) const {
    if (words.empty()) return {};
    DocSet candidates = docs_with_token(f, words[0]);
    if (words.size() == 1) return candidates;
    for (std::size_t k = 1; k < words.size() && !candidates.empty(); ++k)
      candidates = docset::intersect(candidates, docs_with_token(f, words[k]));
    DocSet out;
    for (DocId d : candidates)
      if (!phrase_occurrences(f, words, d).empty()) out.push_back(d);
    return out;
  }

  DocSet year_docs(int first, int last) const {
    DocSet out;
    for (DocId d = 0; d < corpus_->size(); ++d) {
      int y = (*corpus_)[d].year;
      if (y >= first && y <= last) out.push_back(d);
    }
    return out;
  }

  DocSet member_docs(const MemberSet& members) const {
    DocSet out;
    for (const auto& b : members)
      if (auto i = corpus_->index_of(b)) out.push_back(static_cast<DocId>(*i));
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void index_text(PhysField f, DocId d, std::string_view text, std::uint32_t base, std::uint32_t* end) {
    auto toks = tokenize(text, base);
    auto& m = postings_[static_cast<std::size_t>(f)];
    for (auto& t : toks) m[t.text].push_back({d, t.position, t.span});
    if (end) *end = end_position(toks, base);
  }

  // Values of a multi-valued field are separated by a one-position gap so
  // phrases never straddle two keywords or two authors.
  void index_list(PhysField f, DocId d, const std::vector<std::string>& values) {
    std::uint32_t pos = 0;
    for (const auto& v : values) {
      std::uint32_t end = pos;
      index_text(f, d, v, pos, &end);
      pos = end + 1;
    }
  }

  void add_record(DocId d, const BibRecord& r) {
    index_text(PhysField::title, d, r.title, 0, nullptr);
    index_text(PhysField::abstract, d, r.abstract, 0, nullptr);
    index_list(PhysField::keywords, d, r.keywords);
    if (r.body) index_text(PhysField::body, d, *r.body, 0, nullptr);
    index_list(PhysField::author, d, r.authors);
    index_text(PhysField::doctype, d, doctype_name(r.doctype), 0, nullptr);
    index_text(PhysField::year, d, std::to_string(r.year), 0, nullptr);
  }

  const Corpus* corpus_;
  std::array<std::unordered_map<std::string, std::vector<Posting>>, kPhysFieldCount> postings_;
};

namespace detail {

class Evaluator {
 public:
  Evaluator(const Index& index, const LibraryResolver& libs) : index_(index), libs_(libs) {}

  DocSet eval(const QueryNode& n, Field scope = Field::full) const {
    return std::visit(
        [&](const auto& alt) -> DocSet {
          using T = std::decay_t<decltype(alt)>;
          if constexpr (std::is_same_v<T, Phrase>) {
            return term_docs(scope, alt.text, !alt.exact);
          } else if constexpr (std::is_same_v<T, Word>) {
            return term_docs(scope, alt.text, false);
          } else if constexpr (std::is_same_v<T, FieldScope>) {
            return eval(*alt.child, alt.field);
          } else if constexpr (std::is_same_v<T, DocsRef>) {
            return index_.member_docs(libs_.members(alt.key));
          } else if constexpr (std::is_same_v<T, YearRange>) {
            return index_.year_docs(alt.first, alt.last);
          } else if constexpr (std::is_same_v<T, And>) {
            DocSet acc = eval(alt.children.front(), scope);
            for (std::size_t i = 1; i < alt.children.size() && !acc.empty(); ++i)
              acc = docset::intersect(acc, eval(alt.children[i], scope));
            return acc;
          } else if constexpr (std::is_same_v<T, Or>) {
            DocSet acc;
            for (const auto& c : alt.children) acc = docset::unite(acc, eval(c, scope));
            return acc;
          } else {
            return docset::complement(eval(*alt.child, scope), index_.size());
          }
        },
        n.v);
  }

  /// Positive-polarity leaf matches for one document.
  void explain(const QueryNode& n, DocId d, Field scope, bool positive,
               std::vector<MatchTriple>& out) const {
    std::visit(
        [&](const auto& alt) {
          using T = std::decay_t<decltype(alt)>;
          if constexpr (std::is_same_v<T, Phrase>) {
            if (positive) term_matches(scope, alt.text, !alt.exact, d, out);
          } else if constexpr (std::is_same_v<T, Word>) {
            if (positive) term_matches(scope, alt.text, false, d, out);
          } else if constexpr (std::is_same_v<T, FieldScope>) {
            explain(*alt.child, d, alt.field, positive, out);
          } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
            for (const auto& c : alt.children) explain(c, d, scope, positive, out);
          } else if constexpr (std::is_same_v<T, Not>) {
            explain(*alt.child, d, scope, !positive, out);
          }
        },
        n.v);
  }

 private:
  DocSet term_docs(Field scope, const std::string& text, bool expand) const {
    if (scope == Field::bibgroup) return index_.member_docs(libs_.group(text));
    auto words = token_parts(text);
    DocSet acc;
    for (PhysField f : physical_fields(scope)) {
      acc = docset::unite(acc, index_.phrase_docs(f, words));
      if (expand)
        for (const auto& a : acronym_candidates(words)) acc = docset::unite(acc, index_.docs_with_token(f, a));
    }
    return acc;
  }

  void term_matches(Field scope, const std::string& text, bool expand, DocId d,
                    std::vector<MatchTriple>& out) const {
    if (scope == Field::bibgroup) return;
    auto words = token_parts(text);
    std::string joined;
    for (const auto& w : words) joined += (joined.empty() ? "" : " ") + w;
    for (PhysField f : physical_fields(scope)) {
      for (const auto& [start, end] : index_.phrase_occurrences(f, words, d))
        out.push_back({f, joined, start, end - start, ""});
      if (!expand) continue;
      for (const auto& a : acronym_candidates(words)) {
        const auto* list = index_.postings(f, a);
        if (!list) continue;
        auto lo = std::lower_bound(list->begin(), list->end(), Posting{d, 0, 0});
        for (auto it = lo; it != list->end() && it->doc == d; ++it)
          out.push_back({f, a, it->position, it->span, "expanded-from: " + joined});
      }
    }
  }

  const Index& index_;
  const LibraryResolver& libs_;
};

inline void sort_hits(const Corpus& corpus, std::vector<std::string>& hits) {
  std::sort(hits.begin(), hits.end(), [&](const std::string& a, const std::string& b) {
    int ya = corpus.find(a)->year, yb = corpus.find(b)->year;
    if (ya != yb) return ya > yb;
    return a > b;
  });
}

}  // namespace detail

struct EvalOptions {
  bool explain = false;
};

/// Evaluates `query` over the index. Throws UnknownLibraryKey for an
/// unresolvable docs(library/KEY).
inline SearchResult evaluate(const QueryNode& query, const Index& index, const LibraryResolver& libs,
                             EvalOptions opts = {}) {
  detail::Evaluator ev(index, libs);
  DocSet docs = ev.eval(query);
  SearchResult result;
  result.hits.reserve(docs.size());
  for (DocId d : docs) result.hits.push_back(index.corpus()[d].bibcode);
  detail::sort_hits(index.corpus(), result.hits);
  result.total = result.hits.size();
  if (opts.explain) {
    result.explanations.emplace();
    for (DocId d : docs) {
      std::vector<MatchTriple> triples;
      ev.explain(query, d, Field::full, true, triples);
      (*result.explanations)[index.corpus()[d].bibcode] = std::move(triples);
    }
  }
  return result;
}

/// Token occurrences behind a hit. Throws NotAHit when `bibcode` is not
/// among the query's hits.
inline std::vector<MatchTriple> explain_match(std::string_view bibcode, const QueryNode& query,
                                              const Index& index, const LibraryResolver& libs) {
  detail::Evaluator ev(index, libs);
  auto id = index.corpus().index_of(bibcode);
  DocSet docs = ev.eval(query);
  if (!id || !std::binary_search(docs.begin(), docs.end(), static_cast<DocId>(*id)))
    throw Error(Errc::NotAHit, std::string(bibcode));
  std::vector<MatchTriple> triples;
  ev.explain(query, static_cast<DocId>(*id), Field::full, true, triples);
  return triples;
}

}  // namespace bibcurate
