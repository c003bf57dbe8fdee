#pragma once

// Citation metrics and year histograms over a library.
//
// Citations are computed inside the closed corpus: b cites a when a appears in
// b's reference list. Averages and normalized values are kept as exact tenths
// (round half away from zero); medians take the lower middle value.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "bibcurate/error.hpp"
#include "bibcurate/record.hpp"
#include "bibcurate/resolver.hpp"

namespace bibcurate {

using CitationMap = std::map<std::string, std::set<std::string>>;

struct CitationGraph {
  CitationMap citers;            // every corpus bibcode, possibly with no citers
  std::size_t dangling = 0;      // references to bibcodes outside the corpus
};

inline CitationGraph invert_citations(const Corpus& corpus) {
  CitationGraph g;
  for (const auto& r : corpus.records()) g.citers[r.bibcode];
  for (const auto& r : corpus.records()) {
    for (const auto& ref : r.references) {
      auto it = g.citers.find(ref);
      if (it == g.citers.end()) {
        ++g.dangling;
        continue;
      }
      it->second.insert(r.bibcode);
    }
  }
  return g;
}

/// "Wright, Jason T." and "Jason T. Wright" both become "wright, j".
inline std::string normalize_author(std::string_view name) {
  auto lower_trim = [](std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : s) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        space = !out.empty();
        continue;
      }
      if (space) out += ' ';
      space = false;
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
  };
  std::string last, first;
  if (auto comma = name.find(','); comma != std::string_view::npos) {
    last = lower_trim(name.substr(0, comma));
    first = lower_trim(name.substr(comma + 1));
  } else {
    std::string all = lower_trim(name);
    auto sp = all.rfind(' ');
    if (sp == std::string::npos) return all;
    last = all.substr(sp + 1);
    first = all.substr(0, sp);
  }
  while (!last.empty() && last.back() == '.') last.pop_back();
  std::size_t i = 0;
  while (i < first.size() && !std::isalnum(static_cast<unsigned char>(first[i])) &&
         !(static_cast<unsigned char>(first[i]) & 0x80))
    ++i;
  if (i == first.size()) return last;
  std::size_t len = 1;
  // keep a whole UTF-8 sequence for a non-ASCII initial
  if (static_cast<unsigned char>(first[i]) & 0x80)
    while (i + len < first.size() && (static_cast<unsigned char>(first[i + len]) & 0xC0) == 0x80) ++len;
  return last + ", " + first.substr(i, len);
}

inline bool share_author(const BibRecord& a, const BibRecord& b) {
  std::unordered_set<std::string> names;
  for (const auto& n : a.authors) names.insert(normalize_author(n));
  for (const auto& n : b.authors)
    if (names.count(normalize_author(n))) return true;
  return false;
}

/// A value with one decimal, stored as an integer count of tenths.
struct Tenths {
  std::int64_t v = 0;
  double value() const { return static_cast<double>(v) / 10.0; }
  std::string str() const {
    std::int64_t a = v < 0 ? -v : v;
    return std::string(v < 0 ? "-" : "") + std::to_string(a / 10) + "." + std::to_string(a % 10);
  }
  bool operator==(const Tenths&) const = default;
};

/// num/den rounded half away from zero to one decimal. den must be positive.
inline Tenths round_tenths(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw Error(Errc::InvalidArgument, "non-positive denominator");
  bool neg = num < 0;
  __int128 n = neg ? -static_cast<__int128>(num) : num;
  __int128 t = (20 * n + den) / (2 * static_cast<__int128>(den));
  return {static_cast<std::int64_t>(neg ? -t : t)};
}

namespace detail {

// Exact sum of fractions; falls back to long double if the common denominator
// would overflow (only with very many distinct author counts).
class FractionSum {
 public:
  void add(std::int64_t num, std::int64_t den) {
    approx_ += static_cast<long double>(num) / den;
    if (overflow_) return;
    __int128 g = std::gcd(static_cast<std::int64_t>(den_), den);
    __int128 nd = den_ / g * den;
    __int128 nn = num_ * (den / g) + static_cast<__int128>(num) * (den_ / g);
    if (nd > kLimit || nn > kLimit || nn < -kLimit) {
      overflow_ = true;
      return;
    }
    __int128 r = std::gcd(static_cast<std::int64_t>(nn < 0 ? -nn : nn), static_cast<std::int64_t>(nd));
    num_ = r ? nn / r : 0;
    den_ = r ? nd / r : 1;
  }
  Tenths tenths() const {
    if (!overflow_) return round_tenths(static_cast<std::int64_t>(num_), static_cast<std::int64_t>(den_));
    return {static_cast<std::int64_t>(std::llround(approx_ * 10.0L))};
  }

 private:
  static constexpr __int128 kLimit = static_cast<__int128>(1) << 62;
  __int128 num_ = 0, den_ = 1;
  long double approx_ = 0;
  bool overflow_ = false;
};

inline std::uint64_t lower_median(std::vector<std::uint64_t> xs) {
  if (xs.empty()) return 0;
  std::size_t k = (xs.size() - 1) / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(k), xs.end());
  return xs[k];
}

}  // namespace detail

struct MetricsColumn {
  std::size_t member_count = 0;
  std::uint64_t citing_papers = 0;
  std::uint64_t total_citations = 0;
  std::uint64_t self_citations = 0;
  Tenths average_citations;
  std::uint64_t median_citations = 0;
  Tenths normalized_citations;
  std::uint64_t refereed_citations = 0;
  Tenths average_refereed_citations;
  std::uint64_t median_refereed_citations = 0;
  Tenths normalized_refereed_citations;

  bool operator==(const MetricsColumn&) const = default;
};

struct MetricsReport {
  MetricsColumn totals;
  MetricsColumn refereed;
  std::vector<std::string> missing;  // members not present in the corpus
  std::vector<std::string> warnings;
};

inline MetricsColumn column_metrics(const std::vector<const BibRecord*>& members, const Corpus& corpus,
                                    const CitationMap& citers) {
  MetricsColumn col;
  col.member_count = members.size();
  if (members.empty()) return col;
  std::set<std::string> citing;
  std::vector<std::uint64_t> counts, ref_counts;
  detail::FractionSum norm, norm_ref;
  for (const BibRecord* m : members) {
    std::uint64_t n = 0, nr = 0;
    auto it = citers.find(m->bibcode);
    if (it != citers.end()) {
      for (const auto& c : it->second) {
        const BibRecord* cr = corpus.find(c);
        if (!cr) continue;
        citing.insert(c);
        ++n;
        if (cr->refereed) ++nr;
        if (share_author(*m, *cr)) ++col.self_citations;
      }
    }
    counts.push_back(n);
    ref_counts.push_back(nr);
    std::int64_t authors = std::max<std::int64_t>(1, static_cast<std::int64_t>(m->authors.size()));
    norm.add(static_cast<std::int64_t>(n), authors);
    norm_ref.add(static_cast<std::int64_t>(nr), authors);
    col.total_citations += n;
    col.refereed_citations += nr;
  }
  auto size = static_cast<std::int64_t>(members.size());
  col.citing_papers = citing.size();
  col.average_citations = round_tenths(static_cast<std::int64_t>(col.total_citations), size);
  col.average_refereed_citations = round_tenths(static_cast<std::int64_t>(col.refereed_citations), size);
  col.median_citations = detail::lower_median(counts);
  col.median_refereed_citations = detail::lower_median(ref_counts);
  col.normalized_citations = norm.tenths();
  col.normalized_refereed_citations = norm_ref.tenths();
  return col;
}

inline MetricsReport citation_table(const MemberSet& library, const Corpus& corpus, const CitationMap& citers) {
  MetricsReport rep;
  std::vector<const BibRecord*> all, refereed;
  for (const auto& b : library) {
    const BibRecord* r = corpus.find(b);
    if (!r) {
      rep.missing.push_back(b);
      continue;
    }
    all.push_back(r);
    if (r->refereed) refereed.push_back(r);
  }
  if (!rep.missing.empty())
    rep.warnings.push_back(std::to_string(rep.missing.size()) + " member(s) not in corpus were excluded");
  if (all.empty()) rep.warnings.push_back("EmptyLibrary: no members to measure");
  rep.totals = column_metrics(all, corpus, citers);
  rep.refereed = column_metrics(refereed, corpus, citers);
  return rep;
}

inline MetricsReport citation_table(const MemberSet& library, const Corpus& corpus) {
  return citation_table(library, corpus, invert_citations(corpus).citers);
}

struct YearHistogram {
  std::map<int, std::size_t> counts;
  std::size_t unknown = 0;  // members absent from the corpus, so with no known year

  std::size_t total() const {
    std::size_t n = unknown;
    for (const auto& [y, c] : counts) n += c;
    return n;
  }
  bool operator==(const YearHistogram&) const = default;
};

inline YearHistogram year_histogram(const MemberSet& library, const Corpus& corpus) {
  YearHistogram h;
  for (const auto& b : library) {
    if (const BibRecord* r = corpus.find(b)) ++h.counts[r->year];
    else ++h.unknown;
  }
  return h;
}

// ---- rendering ----

enum class ReportFormat { markdown, csv, structured };

struct MetricRow {
  const char* key;
  const char* label;
};

inline constexpr MetricRow kMetricRows[] = {
    {"citingPapers", "Number of citing papers"},
    {"totalCitations", "Total citations"},
    {"selfCitations", "Number of self-citations"},
    {"averageCitations", "Average citations"},
    {"medianCitations", "Median citations"},
    {"normalizedCitations", "Normalized citations"},
    {"refereedCitations", "Refereed citations"},
    {"averageRefereedCitations", "Average refereed citations"},
    {"medianRefereedCitations", "Median refereed citations"},
    {"normalizedRefereedCitations", "Normalized refereed citations"},
};

namespace detail {

inline std::string cell(const MetricsColumn& c, std::size_t row) {
  switch (row) {
    case 0: return std::to_string(c.citing_papers);
    case 1: return std::to_string(c.total_citations);
    case 2: return std::to_string(c.self_citations);
    case 3: return c.average_citations.str();
    case 4: return std::to_string(c.median_citations);
    case 5: return c.normalized_citations.str();
    case 6: return std::to_string(c.refereed_citations);
    case 7: return c.average_refereed_citations.str();
    case 8: return std::to_string(c.median_refereed_citations);
    case 9: return c.normalized_refereed_citations.str();
  }
  return {};
}

inline nlohmann::json column_json(const MetricsColumn& c) {
  nlohmann::json j;
  j["memberCount"] = c.member_count;
  j["citingPapers"] = c.citing_papers;
  j["totalCitations"] = c.total_citations;
  j["selfCitations"] = c.self_citations;
  j["averageCitations"] = c.average_citations.value();
  j["medianCitations"] = c.median_citations;
  j["normalizedCitations"] = c.normalized_citations.value();
  j["refereedCitations"] = c.refereed_citations;
  j["averageRefereedCitations"] = c.average_refereed_citations.value();
  j["medianRefereedCitations"] = c.median_refereed_citations;
  j["normalizedRefereedCitations"] = c.normalized_refereed_citations.value();
  return j;
}

}  // namespace detail

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["totals"] = detail::column_json(r.totals);
  j["refereed"] = detail::column_json(r.refereed);
  j["missing"] = r.missing;
  j["warnings"] = r.warnings;
  return j;
}

inline nlohmann::json to_json(const YearHistogram& h) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [y, c] : h.counts) j[std::to_string(y)] = c;
  if (h.unknown) j["unknown"] = h.unknown;
  return j;
}

inline std::string render_report(const MetricsReport& r, ReportFormat fmt) {
  std::ostringstream out;
  switch (fmt) {
    case ReportFormat::markdown:
      out << "| Metric | Totals | Refereed |\n|---|---:|---:|\n";
      for (std::size_t i = 0; i < std::size(kMetricRows); ++i)
        out << "| " << kMetricRows[i].label << " | " << detail::cell(r.totals, i) << " | "
            << detail::cell(r.refereed, i) << " |\n";
      out << "\nMembers: " << r.totals.member_count << " (refereed " << r.refereed.member_count << ")\n";
      break;
    case ReportFormat::csv:
      out << "Metric,Totals,Refereed\n";
      for (std::size_t i = 0; i < std::size(kMetricRows); ++i)
        out << kMetricRows[i].label << "," << detail::cell(r.totals, i) << "," << detail::cell(r.refereed, i) << "\n";
      break;
    case ReportFormat::structured:
      out << to_json(r).dump(2) << "\n";
      break;
  }
  return out.str();
}

inline std::string render_histogram(const YearHistogram& h, ReportFormat fmt) {
  std::ostringstream out;
  switch (fmt) {
    case ReportFormat::markdown:
      out << "| Year | Count |\n|---|---:|\n";
      for (const auto& [y, c] : h.counts) out << "| " << y << " | " << c << " |\n";
      if (h.unknown) out << "| unknown | " << h.unknown << " |\n";
      break;
    case ReportFormat::csv:
      out << "Year,Count\n";
      for (const auto& [y, c] : h.counts) out << y << "," << c << "\n";
      if (h.unknown) out << "unknown," << h.unknown << "\n";
      break;
    case ReportFormat::structured:
      out << to_json(h).dump(2) << "\n";
      break;
  }
  return out.str();
}

inline ReportFormat report_format_from_name(std::string_view s) {
  if (s == "markdown" || s == "md") return ReportFormat::markdown;
  if (s == "csv") return ReportFormat::csv;
  if (s == "json" || s == "structured") return ReportFormat::structured;
  throw Error(Errc::InvalidArgument, "unknown report format '" + std::string(s) + "'");
}

}  // namespace bibcurate
