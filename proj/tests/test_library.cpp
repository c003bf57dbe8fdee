#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <random>
#include <sstream>
#include <unordered_set>

#include "bibcurate/library.hpp"

using namespace bibcurate;

namespace {

// Deterministic clock advancing one second per call.
Clock ticking(Timestamp start = 1612137600) {
  auto t = std::make_shared<Timestamp>(start);
  return [t] { return (*t)++; };
}

Catalog fixed_catalog(std::uint64_t seed = 1) {
  CatalogOptions o;
  o.clock = ticking();
  o.seed = seed;
  o.actor = "tester";
  return Catalog(o);
}

std::vector<std::string> bibcode_pool(std::size_t n) {
  std::vector<std::string> pool;
  pool.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream s;
    s << (1960 + i % 62) << "Test." << std::setw(6) << std::setfill('0') << i;
    pool.push_back(s.str());
  }
  return pool;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::InvalidArgument;
}

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "bibcurate-tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(LibraryKeys, Format) {
  EXPECT_TRUE(is_library_key("qazeXzDISj-d06qbiWLoXQ"));
  EXPECT_TRUE(is_library_key("k1BwfM56QgKbl6X-PXADqg"));
  EXPECT_FALSE(is_library_key("short"));
  EXPECT_FALSE(is_library_key("qazeXzDISj-d06qbiWLoX!"));
  EXPECT_FALSE(is_library_key("qazeXzDISj-d06qbiWLoXQQ"));
}

TEST(LibraryKeys, ThousandDistinctWellFormedKeys) {
  Catalog cat;
  std::set<std::string> keys;
  for (int i = 0; i < 1000; ++i) {
    auto k = cat.create_library("lib" + std::to_string(i));
    EXPECT_TRUE(is_library_key(k)) << k;
    keys.insert(k);
  }
  EXPECT_EQ(keys.size(), 1000u);
}

TEST(LibraryKeys, AdoptedKeysAreChecked) {
  Catalog cat = fixed_catalog();
  EXPECT_EQ(cat.create_library("SETI", "", "qazeXzDISj-d06qbiWLoXQ"), "qazeXzDISj-d06qbiWLoXQ");
  EXPECT_EQ(code_of([&] { cat.create_library("again", "", "qazeXzDISj-d06qbiWLoXQ"); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([&] { cat.create_library("bad", "", "nope"); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([&] { cat.create_library(""); }), Errc::InvalidArgument);
}

TEST(LibraryMembers, AddRemoveIdempotent) {
  Catalog cat = fixed_catalog();
  auto k = cat.create_library("SETI");
  EXPECT_EQ(cat.add_members(k, {"A", "B", "A"}), 2u);
  EXPECT_EQ(cat.add_members(k, {"A", "B"}), 0u);
  EXPECT_EQ(cat.remove_members(k, {"A", "Z"}), 1u);
  EXPECT_EQ(cat.remove_members(k, {"A"}), 0u);
  EXPECT_EQ(cat.members(k), (MemberSet{"B"}));
  // create + 2 effective changes; no-op calls leave no trace.
  EXPECT_EQ(cat.audit_log().size(), 3u);
  EXPECT_EQ(code_of([&] { cat.add_members("AAAAAAAAAAAAAAAAAAAAAA", {"A"}); }), Errc::UnknownLibraryKey);
}

TEST(LibraryMembers, BulkAdd553) {
  Catalog cat = fixed_catalog();
  auto k = cat.create_library("SETI");
  auto pool = bibcode_pool(553);
  EXPECT_EQ(cat.add_members(k, pool), 553u);
  EXPECT_EQ(cat.members(k).size(), 553u);
  EXPECT_EQ(cat.audit_log().back().bibcodes.size(), 553u);
}

TEST(LibraryMembers, NamesResolveCaseInsensitively) {
  Catalog cat = fixed_catalog();
  auto seti = cat.create_library("SETI");
  cat.create_library("dup");
  cat.create_library("DUP");
  EXPECT_EQ(cat.resolve("seti"), seti);
  EXPECT_EQ(cat.resolve(seti), seti);
  EXPECT_EQ(code_of([&] { cat.resolve("dup"); }), Errc::AmbiguousLibraryName);
  EXPECT_EQ(code_of([&] { cat.resolve("missing"); }), Errc::UnknownLibraryKey);
  cat.add_members(seti, {"X"});
  EXPECT_EQ(cat.group("Seti"), (MemberSet{"X"}));
  EXPECT_TRUE(cat.group("nothing").empty());
}

TEST(LibrarySetOps, MatchReferenceImplementation) {
  auto pool = bibcode_pool(20000);
  std::mt19937_64 rng(31337);
  Catalog cat = fixed_catalog();
  auto a = cat.create_library("a");
  auto b = cat.create_library("b");
  auto start = std::chrono::steady_clock::now();
  for (int round = 0; round < 1000; ++round) {
    std::size_t na = std::uniform_int_distribution<std::size_t>(0, round % 10 == 0 ? 10000 : 300)(rng);
    std::size_t nb = std::uniform_int_distribution<std::size_t>(0, round % 10 == 1 ? 10000 : 300)(rng);
    // Draw from a window so the sets overlap often.
    std::size_t window = std::max<std::size_t>(1, (na + nb) * 3 / 2);
    std::uniform_int_distribution<std::size_t> pick(0, std::min(window, pool.size()) - 1);
    std::vector<std::string> va, vb;
    for (std::size_t i = 0; i < na; ++i) va.push_back(pool[pick(rng)]);
    for (std::size_t i = 0; i < nb; ++i) vb.push_back(pool[pick(rng)]);
    for (const auto& key : {a, b}) {
      MemberSet old = cat.members(key);
      cat.remove_members(key, {old.begin(), old.end()});
    }
    cat.add_members(a, va);
    cat.add_members(b, vb);

    std::unordered_set<std::string> ha(va.begin(), va.end()), hb(vb.begin(), vb.end());
    std::unordered_set<std::string> u = ha, i, d;
    u.insert(hb.begin(), hb.end());
    for (const auto& x : ha) (hb.count(x) ? i : d).insert(x);

    auto as_set = [](const std::unordered_set<std::string>& s) { return MemberSet(s.begin(), s.end()); };
    ASSERT_EQ(cat.set_op(SetOp::union_, a, b), as_set(u));
    ASSERT_EQ(cat.set_op(SetOp::intersection, a, b), as_set(i));
    ASSERT_EQ(cat.set_op(SetOp::difference, a, b), as_set(d));
  }
  auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 30.0);
}

TEST(LibrarySetOps, Names) {
  EXPECT_EQ(set_op_from_name("union"), SetOp::union_);
  EXPECT_EQ(set_op_from_name("difference"), SetOp::difference);
  EXPECT_FALSE(set_op_from_name("xor"));
}

TEST(LibraryExclusive, PairsAreEnforcedAtomically) {
  Catalog cat = fixed_catalog();
  auto seti = cat.create_library("SETI");
  auto not_seti = cat.create_library("NotSETI");
  cat.add_members(seti, {"A"});
  cat.add_exclusive_pair(seti, not_seti);
  cat.add_exclusive_pair(not_seti, seti);
  EXPECT_EQ(cat.exclusive_pairs().size(), 1u);
  auto before = cat.audit_log().size();
  EXPECT_EQ(code_of([&] { cat.add_members(not_seti, {"B", "A"}); }), Errc::ExclusivityViolation);
  EXPECT_TRUE(cat.members(not_seti).empty());
  EXPECT_EQ(cat.audit_log().size(), before);
  EXPECT_EQ(cat.add_members(not_seti, {"B"}), 1u);
  EXPECT_EQ(code_of([&] { cat.add_exclusive_pair(seti, seti); }), Errc::InvalidArgument);

  auto other = cat.create_library("other");
  cat.add_members(other, {"A"});
  EXPECT_EQ(code_of([&] { cat.add_exclusive_pair(seti, other); }), Errc::ExclusivityViolation);
}

TEST(LibraryAudit, ReplayReproducesLibraries) {
  std::mt19937_64 rng(5);
  auto pool = bibcode_pool(300);
  for (int trial = 0; trial < 50; ++trial) {
    Catalog cat = fixed_catalog(trial);
    std::vector<std::string> keys;
    for (int i = 0; i < 3; ++i) keys.push_back(cat.create_library("lib" + std::to_string(i)));
    for (int step = 0; step < 100; ++step) {
      const auto& k = keys[rng() % keys.size()];
      std::vector<std::string> batch;
      for (int j = 0, n = static_cast<int>(rng() % 8); j < n; ++j) batch.push_back(pool[rng() % pool.size()]);
      if (rng() % 3) cat.add_members(k, batch);
      else cat.remove_members(k, batch);
    }
    Catalog again = Catalog::replay(cat.audit_log());
    ASSERT_EQ(again.libraries(), cat.libraries());
    ASSERT_EQ(again.audit_log(), cat.audit_log());
    for (std::size_t i = 1; i < cat.audit_log().size(); ++i)
      ASSERT_EQ(cat.audit_log()[i].seq, cat.audit_log()[i - 1].seq + 1);
  }
}

TEST(LibrarySnapshot, EmptyRoundTrip) {
  Catalog cat;
  Catalog back = Catalog::from_snapshot(cat.to_snapshot());
  EXPECT_TRUE(back == cat);
  EXPECT_EQ(back.to_snapshot(), cat.to_snapshot());
}

namespace {
// Three libraries and ten audit entries built from a fixed seed and clock.
Catalog golden_catalog() {
  Catalog cat = fixed_catalog(2021);
  auto seti = cat.create_library("SETI", "Papers on the search for technosignatures",
                                 "seti0000000000000000AA");
  auto not_seti = cat.create_library("NotSETI", "Query hits judged irrelevant", "notseti0000000000000BB");
  auto misc = cat.create_library("Mentions \"SETI\"", "Tangential, with unicode: Süß",
                                 "mentions000000000000CC");
  cat.add_members(seti, {"2020AJ....159..201W", "2021ApJ...911L..23H"});
  cat.add_members(not_seti, {"2016JHyd..540..100K"});
  cat.add_exclusive_pair(seti, not_seti);
  cat.add_members(misc, {"2019ApJ...884...22C", "2018AsBio..18..990F"});
  cat.remove_members(misc, {"2018AsBio..18..990F"});
  cat.set_actor("second");
  cat.add_members(seti, {"2018PASP..130d4503T"});
  cat.add_members(not_seti, {"2014PhRvE..89d2914B", "2017PhRvB..95a4401S"});
  cat.remove_members(seti, {"2021ApJ...911L..23H"});
  return cat;
}
}  // namespace

TEST(LibrarySnapshot, GoldenFileIsBitIdentical) {
  Catalog cat = golden_catalog();
  ASSERT_EQ(cat.audit_log().size(), 10u);
  auto golden = std::filesystem::path(BIBCURATE_FIXTURE_DIR) / "catalog.golden";
  std::ifstream in(golden, std::ios::binary);
  ASSERT_TRUE(in) << golden;
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(cat.to_snapshot(), buf.str());

  auto path = temp_path("golden.snapshot");
  save_snapshot(cat, path);
  Catalog back = load_snapshot(path);
  EXPECT_TRUE(back == cat);
  EXPECT_EQ(back.to_snapshot(), buf.str());
}

TEST(LibrarySnapshot, TruncationAndGarbageAreCorrupt) {
  std::string text = golden_catalog().to_snapshot();
  auto cut = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
  EXPECT_EQ(code_of([&] { Catalog::from_snapshot(cut); }), Errc::CorruptSnapshot);
  EXPECT_EQ(code_of([&] { Catalog::from_snapshot(text.substr(0, text.size() / 2)); }), Errc::CorruptSnapshot);
  EXPECT_EQ(code_of([&] { Catalog::from_snapshot(""); }), Errc::CorruptSnapshot);
  EXPECT_EQ(code_of([&] { Catalog::from_snapshot("hello\n"); }), Errc::CorruptSnapshot);
  EXPECT_EQ(code_of([&] { load_snapshot(temp_path("does-not-exist")); }), Errc::IoFailure);
}
