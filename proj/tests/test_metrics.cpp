#include <gtest/gtest.h>

#include <array>
#include <random>
#include <sstream>

#include "bibcurate/metrics.hpp"
#include "support/naive_metrics.hpp"

using namespace bibcurate;

namespace {

std::string fixture(const std::string& name) { return std::string(BIBCURATE_FIXTURE_DIR) + "/" + name; }

BibRecord paper(std::string bibcode, std::vector<std::string> refs = {}, bool refereed = true, int year = 2020,
                std::vector<std::string> authors = {"Doe, J."}) {
  BibRecord r;
  r.bibcode = std::move(bibcode);
  r.title = "t";
  r.references = std::move(refs);
  r.refereed = refereed;
  r.year = year;
  r.authors = std::move(authors);
  return r;
}

MemberSet all_of(const Corpus& c) {
  MemberSet s;
  for (const auto& r : c.records()) s.insert(r.bibcode);
  return s;
}

}  // namespace

TEST(Citations, ChainInversion) {
  Corpus c;
  c.add(paper("a", {"b"}));
  c.add(paper("b", {"c"}));
  c.add(paper("c"));
  auto g = invert_citations(c);
  EXPECT_EQ(g.citers.at("c"), (std::set<std::string>{"b"}));
  EXPECT_EQ(g.citers.at("b"), (std::set<std::string>{"a"}));
  EXPECT_TRUE(g.citers.at("a").empty());
  EXPECT_EQ(g.dangling, 0u);
  EXPECT_TRUE(invert_citations(Corpus{}).citers.empty());
}

TEST(Citations, RandomGraphMatchesDoubleLoop) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = naive::random_graph(rng, 50);
    auto inv = invert_citations(g.corpus);
    for (const auto& cited : g.papers) {
      std::set<std::string> want;
      for (const auto& citing : g.papers)
        if (naive::cites(citing, cited)) want.insert(citing.bibcode);
      ASSERT_EQ(inv.citers.at(cited.bibcode), want);
    }
  }
}

TEST(Metrics, AuthorNormalization) {
  EXPECT_EQ(normalize_author("Wright, Jason T."), "wright, j");
  EXPECT_EQ(normalize_author("Jason T. Wright"), "wright, j");
  EXPECT_EQ(normalize_author("WRIGHT,   J."), "wright, j");
  EXPECT_EQ(normalize_author("  van der Berg , Anna"), "van der berg, a");
  EXPECT_EQ(normalize_author("Plato"), "plato");
  for (const char* n : {"Wright, Jason T.", "J. Wright", "van der Berg, A.", "Plato", "Haqq-Misra, Jacob", "Ünal, Ö."}) {
    std::string once = normalize_author(n);
    EXPECT_EQ(normalize_author(once), once) << n;
  }
}

TEST(Metrics, RoundsHalfAwayFromZero) {
  EXPECT_EQ(round_tenths(1, 20).str(), "0.1");   // 0.05
  EXPECT_EQ(round_tenths(1, 40).str(), "0.0");   // 0.025
  EXPECT_EQ(round_tenths(25, 100).str(), "0.3");
  EXPECT_EQ(round_tenths(-25, 100).str(), "-0.3");
  EXPECT_EQ(round_tenths(0, 7).str(), "0.0");
  EXPECT_EQ(round_tenths(1329, 553).str(), "2.4");
  EXPECT_EQ(round_tenths(783, 171).str(), "4.6");
}

TEST(Metrics, SingleMemberWithoutCiters) {
  Corpus c;
  c.add(paper("lonely"));
  auto rep = citation_table({"lonely"}, c);
  MetricsColumn want;
  want.member_count = 1;
  EXPECT_EQ(rep.totals, want);
  EXPECT_EQ(rep.refereed, want);
}

TEST(Metrics, EmptyLibraryIsAllZeros) {
  Corpus c;
  c.add(paper("x"));
  auto rep = citation_table({}, c);
  EXPECT_EQ(rep.totals, MetricsColumn{});
  EXPECT_EQ(rep.refereed, MetricsColumn{});
  ASSERT_FALSE(rep.warnings.empty());
  EXPECT_EQ(rep.warnings.back().rfind("EmptyLibrary", 0), 0u);
}

TEST(Metrics, MissingMembersAreReportedAndExcluded) {
  Corpus c;
  c.add(paper("a"));
  c.add(paper("b", {"a"}));
  auto rep = citation_table({"a", "ghost"}, c);
  EXPECT_EQ(rep.missing, std::vector<std::string>{"ghost"});
  EXPECT_EQ(rep.totals.member_count, 1u);
  EXPECT_EQ(rep.totals.total_citations, 1u);
}

TEST(Metrics, FiveDocFixtureWithSelfCitation) {
  Corpus c = load_corpus_file(fixture("metrics5.jsonl"));
  EXPECT_EQ(invert_citations(c).dangling, 1u);
  auto rep = citation_table(all_of(c), c);
  const auto& t = rep.totals;
  EXPECT_EQ(t.member_count, 5u);
  EXPECT_EQ(t.citing_papers, 4u);
  EXPECT_EQ(t.total_citations, 7u);
  EXPECT_EQ(t.self_citations, 1u);
  EXPECT_EQ(t.average_citations.str(), "1.4");
  EXPECT_EQ(t.median_citations, 1u);
  EXPECT_EQ(t.normalized_citations.str(), "3.2");
  EXPECT_EQ(t.refereed_citations, 3u);
  EXPECT_EQ(t.average_refereed_citations.str(), "0.6");
  EXPECT_EQ(t.median_refereed_citations, 0u);
  EXPECT_EQ(t.normalized_refereed_citations.str(), "1.3");
  const auto& r = rep.refereed;
  EXPECT_EQ(r.member_count, 3u);
  EXPECT_EQ(r.citing_papers, 4u);
  EXPECT_EQ(r.total_citations, 7u);
  EXPECT_EQ(r.self_citations, 1u);
  EXPECT_EQ(r.average_citations.str(), "2.3");
  EXPECT_EQ(r.median_citations, 2u);
  EXPECT_EQ(r.normalized_citations.str(), "3.2");
  EXPECT_EQ(r.refereed_citations, 3u);
  EXPECT_EQ(r.average_refereed_citations.str(), "1.0");
  EXPECT_EQ(r.median_refereed_citations, 1u);
  EXPECT_EQ(r.normalized_refereed_citations.str(), "1.3");

  // Same fixture through the oracle, with people identified by hand.
  std::vector<naive::Paper> papers = {
      {"2018AJ....155...01W", true, {0, 1}, {}},
      {"2019ApJ...870...02P", true, {2, 3, 4}, {"2018AJ....155...01W"}},
      {"2019arXiv190303S", false, {5}, {"2018AJ....155...01W", "2019ApJ...870...02P"}},
      {"2020AJ....160...04W", true, {0, 6}, {"2018AJ....155...01W", "2019ApJ...870...02P"}},
      {"2020IJAsB..19...05L", false, {7, 8}, {"2018AJ....155...01W", "2020AJ....160...04W"}},
  };
  EXPECT_TRUE(naive::diff(t, naive::column(papers, {0, 1, 2, 3, 4})).empty());
  EXPECT_TRUE(naive::diff(r, naive::column(papers, {0, 1, 3})).empty());
}

TEST(Metrics, FigureThreeArithmetic) {
  // 553 members, 171 refereed; 1329 citations in total, of which 783 come from
  // refereed papers and land on refereed members.
  Corpus c;
  MemberSet lib;
  for (int i = 0; i < 553; ++i) {
    std::string b = "M" + std::to_string(i);
    c.add(paper(b, {}, i < 171));
    lib.insert(b);
  }
  for (int k = 0; k < 783; ++k) c.add(paper("R" + std::to_string(k), {"M" + std::to_string(k % 171)}, true));
  for (int k = 0; k < 1329 - 783; ++k)
    c.add(paper("U" + std::to_string(k), {"M" + std::to_string(171 + k % (553 - 171))}, false));
  auto rep = citation_table(lib, c);
  EXPECT_EQ(rep.totals.member_count, 553u);
  EXPECT_EQ(rep.totals.total_citations, 1329u);
  EXPECT_EQ(rep.totals.average_citations.str(), "2.4");
  EXPECT_EQ(rep.refereed.member_count, 171u);
  EXPECT_EQ(rep.refereed.refereed_citations, 783u);
  EXPECT_EQ(rep.refereed.average_refereed_citations.str(), "4.6");
}

TEST(MetricsProperty, TableMatchesOracleOnRandomGraphs) {
  std::mt19937 rng(2021);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = trial < 100 ? 50 : std::uniform_int_distribution<std::size_t>(0, 100)(rng);
    auto g = naive::random_graph(rng, n);
    MemberSet lib;
    std::vector<std::size_t> ref_members;
    for (auto i : g.members) {
      lib.insert(g.papers[i].bibcode);
      if (g.papers[i].refereed) ref_members.push_back(i);
    }
    auto rep = citation_table(lib, g.corpus);
    auto bad = naive::diff(rep.totals, naive::column(g.papers, g.members));
    auto bad_ref = naive::diff(rep.refereed, naive::column(g.papers, ref_members));
    ASSERT_TRUE(bad.empty()) << "trial " << trial << " totals " << bad.front();
    ASSERT_TRUE(bad_ref.empty()) << "trial " << trial << " refereed " << bad_ref.front();

    // Column monotonicity.
    EXPECT_LE(rep.refereed.member_count, rep.totals.member_count);
    for (const auto* col : {&rep.totals, &rep.refereed}) {
      EXPECT_LE(col->refereed_citations, col->total_citations);
      EXPECT_LE(col->self_citations, col->total_citations);
      EXPECT_LE(col->citing_papers, col->total_citations);
    }
  }
}

TEST(YearHistogram, Basics) {
  Corpus c;
  c.add(paper("a", {}, true, 1960));
  c.add(paper("b", {}, true, 2018));
  c.add(paper("c", {}, true, 2018));
  auto h = year_histogram({"a", "b", "c"}, c);
  EXPECT_EQ(h.counts, (std::map<int, std::size_t>{{1960, 1}, {2018, 2}}));
  EXPECT_EQ(h.unknown, 0u);
  EXPECT_TRUE(year_histogram({}, c).counts.empty());
  EXPECT_EQ(year_histogram({"a", "ghost"}, c).unknown, 1u);
}

TEST(YearHistogram, TwentyDocFixture) {
  Corpus c = load_corpus_file(fixture("years20.jsonl"));
  auto h = year_histogram(all_of(c), c);
  std::map<int, std::size_t> want = {{1960, 1}, {1961, 1}, {1977, 1}, {1993, 2}, {2001, 1}, {2010, 1},
                                     {2015, 3}, {2018, 4}, {2019, 2}, {2020, 4}};
  EXPECT_EQ(h.counts, want);
  EXPECT_EQ(h.total(), 20u);
}

TEST(Render, ZeroTableMarkdown) {
  const std::string want =
      "| Metric | Totals | Refereed |\n"
      "|---|---:|---:|\n"
      "| Number of citing papers | 0 | 0 |\n"
      "| Total citations | 0 | 0 |\n"
      "| Number of self-citations | 0 | 0 |\n"
      "| Average citations | 0.0 | 0.0 |\n"
      "| Median citations | 0 | 0 |\n"
      "| Normalized citations | 0.0 | 0.0 |\n"
      "| Refereed citations | 0 | 0 |\n"
      "| Average refereed citations | 0.0 | 0.0 |\n"
      "| Median refereed citations | 0 | 0 |\n"
      "| Normalized refereed citations | 0.0 | 0.0 |\n"
      "\n"
      "Members: 0 (refereed 0)\n";
  EXPECT_EQ(render_report(MetricsReport{}, ReportFormat::markdown), want);
}

TEST(Render, CsvParsesBack) {
  Corpus c = load_corpus_file(fixture("metrics5.jsonl"));
  auto rep = citation_table(all_of(c), c);
  std::istringstream in(render_report(rep, ReportFormat::csv));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "Metric,Totals,Refereed");
  std::vector<std::array<std::string, 3>> rows;
  while (std::getline(in, line)) {
    std::array<std::string, 3> cells;
    std::istringstream ls(line);
    for (auto& cell : cells) std::getline(ls, cell, ',');
    rows.push_back(cells);
  }
  ASSERT_EQ(rows.size(), 10u);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i][0], kMetricRows[i].label);
  EXPECT_EQ(std::stoull(rows[1][1]), rep.totals.total_citations);
  EXPECT_EQ(std::stod(rows[3][2]), rep.refereed.average_citations.value());
  EXPECT_EQ(std::stod(rows[5][1]), rep.totals.normalized_citations.value());
}

TEST(Render, StructuredIsDeterministic) {
  Corpus c = load_corpus_file(fixture("metrics5.jsonl"));
  auto rep = citation_table(all_of(c), c);
  auto a = render_report(rep, ReportFormat::structured);
  EXPECT_EQ(a, render_report(citation_table(all_of(c), c), ReportFormat::structured));
  auto j = nlohmann::json::parse(a);
  EXPECT_EQ(j["totals"]["selfCitations"], 1);
  EXPECT_EQ(j["refereed"]["memberCount"], 3);
  EXPECT_DOUBLE_EQ(j["totals"]["averageCitations"].get<double>(), 1.4);
}
