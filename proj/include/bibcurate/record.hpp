#pragma once

// Bibliographic records and line-delimited corpus loading.
//
// One JSON object per line with keys: bibcode, title, authors, abstract,
// body, keywords, year, doctype, refereed, collections, references.
// bibcode, title, year and doctype are required; the rest default to empty.
// Unknown keys are ignored with a warning. Blank lines are skipped.

#include <algorithm>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "bibcurate/error.hpp"
#include "bibcurate/query.hpp"

namespace bibcurate {

enum class Doctype {
  article,
  eprint,
  abstract,
  book,
  proceedings,
  techreport,
  pressrelease,
  phdthesis,
  software,
  catalog,
  bookreview,
  misc,
};

inline constexpr Doctype kAllDoctypes[] = {
    Doctype::article,     Doctype::eprint,    Doctype::abstract,     Doctype::book,
    Doctype::proceedings, Doctype::techreport, Doctype::pressrelease, Doctype::phdthesis,
    Doctype::software,    Doctype::catalog,   Doctype::bookreview,   Doctype::misc,
};

inline std::string_view doctype_name(Doctype d) {
  switch (d) {
    case Doctype::article: return "article";
    case Doctype::eprint: return "eprint";
    case Doctype::abstract: return "abstract";
    case Doctype::book: return "book";
    case Doctype::proceedings: return "proceedings";
    case Doctype::techreport: return "techreport";
    case Doctype::pressrelease: return "pressrelease";
    case Doctype::phdthesis: return "phdthesis";
    case Doctype::software: return "software";
    case Doctype::catalog: return "catalog";
    case Doctype::bookreview: return "bookreview";
    case Doctype::misc: return "misc";
  }
  return "misc";
}

inline std::optional<Doctype> doctype_from_name(std::string_view s) {
  for (Doctype d : kAllDoctypes)
    if (doctype_name(d) == s) return d;
  return std::nullopt;
}

enum class Collection { astronomy, physics, general };

inline std::string_view collection_name(Collection c) {
  switch (c) {
    case Collection::astronomy: return "astronomy";
    case Collection::physics: return "physics";
    case Collection::general: return "general";
  }
  return "general";
}

inline std::optional<Collection> collection_from_name(std::string_view s) {
  for (Collection c : {Collection::astronomy, Collection::physics, Collection::general})
    if (collection_name(c) == s) return c;
  return std::nullopt;
}

struct BibRecord {
  std::string bibcode;
  std::string title;
  std::vector<std::string> authors;  // "Last, First"
  std::string abstract;
  std::optional<std::string> body;
  std::vector<std::string> keywords;
  int year = 2000;
  Doctype doctype = Doctype::article;
  bool refereed = false;
  std::set<Collection> collections;
  std::vector<std::string> references;

  bool operator==(const BibRecord&) const = default;
};

inline nlohmann::json to_json(const BibRecord& r) {
  nlohmann::json j;
  j["bibcode"] = r.bibcode;
  j["title"] = r.title;
  j["authors"] = r.authors;
  j["abstract"] = r.abstract;
  j["body"] = r.body ? nlohmann::json(*r.body) : nlohmann::json(nullptr);
  j["keywords"] = r.keywords;
  j["year"] = r.year;
  j["doctype"] = doctype_name(r.doctype);
  j["refereed"] = r.refereed;
  nlohmann::json cols = nlohmann::json::array();
  for (Collection c : r.collections) cols.push_back(collection_name(c));
  j["collections"] = cols;
  j["references"] = r.references;
  return j;
}

/// Checks per-record invariants; throws MalformedRecord with `where` prefixed.
inline void check_record(const BibRecord& r, const std::string& where) {
  auto fail = [&](const std::string& why) { throw Error(Errc::MalformedRecord, where + ": " + why); };
  if (r.bibcode.empty()) fail("empty bibcode");
  if (r.year < kMinYear || r.year > kMaxYear) fail("year " + std::to_string(r.year) + " out of range");
  std::set<std::string> seen;
  for (const auto& ref : r.references) {
    if (ref == r.bibcode) fail("record references itself");
    if (!seen.insert(ref).second) fail("duplicate reference " + ref);
  }
}

struct RecordParse {
  BibRecord record;
  std::vector<std::string> warnings;
};

inline RecordParse record_from_json(const nlohmann::json& j, const std::string& where) {
  auto fail = [&](const std::string& why) -> void { throw Error(Errc::MalformedRecord, where + ": " + why); };
  if (!j.is_object()) fail("line is not an object");
  static const std::set<std::string> known = {"bibcode", "title",    "authors",  "abstract",
                                              "body",    "keywords", "year",     "doctype",
                                              "refereed", "collections", "references"};
  RecordParse out;
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) out.warnings.push_back(where + ": ignoring unknown key '" + k + "'");

  auto str = [&](const char* key, bool required) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      if (required) fail(std::string("missing ") + key);
      return {};
    }
    if (!it->is_string()) fail(std::string(key) + " must be a string");
    return it->get<std::string>();
  };
  auto strings = [&](const char* key) -> std::vector<std::string> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_array()) fail(std::string(key) + " must be a list of strings");
    std::vector<std::string> xs;
    for (const auto& e : *it) {
      if (!e.is_string()) fail(std::string(key) + " must be a list of strings");
      xs.push_back(e.get<std::string>());
    }
    return xs;
  };

  BibRecord& r = out.record;
  r.bibcode = str("bibcode", true);
  r.title = str("title", true);
  r.authors = strings("authors");
  r.abstract = str("abstract", false);
  if (auto it = j.find("body"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) fail("body must be a string");
    r.body = it->get<std::string>();
  }
  r.keywords = strings("keywords");

  auto y = j.find("year");
  if (y == j.end() || !y->is_number_integer()) fail("year must be an integer");
  r.year = y->get<int>();

  auto dt = doctype_from_name(str("doctype", true));
  if (!dt) fail("unknown doctype '" + j["doctype"].get<std::string>() + "'");
  r.doctype = *dt;

  if (auto it = j.find("refereed"); it != j.end() && !it->is_null()) {
    if (!it->is_boolean()) fail("refereed must be a boolean");
    r.refereed = it->get<bool>();
  }
  for (const auto& c : strings("collections")) {
    auto col = collection_from_name(c);
    if (!col) fail("unknown collection '" + c + "'");
    r.collections.insert(*col);
  }
  r.references = strings("references");
  check_record(r, where);
  return out;
}

class Corpus {
 public:
  Corpus() = default;

  /// Appends a record; throws DuplicateBibcode or MalformedRecord.
  void add(BibRecord r) {
    check_record(r, r.bibcode.empty() ? "record" : r.bibcode);
    if (by_bibcode_.count(r.bibcode)) throw Error(Errc::DuplicateBibcode, r.bibcode);
    by_bibcode_.emplace(r.bibcode, records_.size());
    records_.push_back(std::move(r));
  }

  const BibRecord* find(std::string_view bibcode) const {
    auto it = by_bibcode_.find(std::string(bibcode));
    return it == by_bibcode_.end() ? nullptr : &records_[it->second];
  }

  std::optional<std::size_t> index_of(std::string_view bibcode) const {
    auto it = by_bibcode_.find(std::string(bibcode));
    if (it == by_bibcode_.end()) return std::nullopt;
    return it->second;
  }

  const std::vector<BibRecord>& records() const { return records_; }
  const BibRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  std::vector<BibRecord> records_;
  std::unordered_map<std::string, std::size_t> by_bibcode_;
  std::vector<std::string> warnings_;
};

inline Corpus load_corpus(std::istream& in, const std::string& source = "corpus") {
  Corpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string where = source + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::MalformedRecord, where + ": " + e.what());
    }
    auto parsed = record_from_json(j, where);
    if (corpus.find(parsed.record.bibcode))
      throw Error(Errc::DuplicateBibcode, parsed.record.bibcode + " (" + where + ")");
    for (auto& w : parsed.warnings) corpus.add_warning(std::move(w));
    corpus.add(std::move(parsed.record));
  }
  return corpus;
}

inline Corpus load_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open corpus " + path);
  return load_corpus(in, path);
}

inline void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& r : corpus.records()) out << to_json(r).dump() << '\n';
}

}  // namespace bibcurate
