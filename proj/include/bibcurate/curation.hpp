#pragma once

// Curation workflow: rubric tags, the append-only decision log, routing of
// verdicts into the SETI / NotSETI libraries, the search-classify-repeat
// update cycle, and the monthly digest.

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bibcurate/error.hpp"
#include "bibcurate/index.hpp"
#include "bibcurate/library.hpp"
#include "bibcurate/query.hpp"
#include "bibcurate/record.hpp"
#include "bibcurate/timeutil.hpp"

namespace bibcurate {

enum class RubricTag {
  observation,
  instrumentation,
  fermi_paradox,
  meta_seti,
  history,
  social_science,
  commensal,
  excluded_astrobiology_only,
  excluded_fundamental_only,
  excluded_pseudoscience_ufo,
  excluded_book_review,
  excluded_satire,
};

inline constexpr std::array<RubricTag, 12> kAllTags = {
    RubricTag::observation,       RubricTag::instrumentation,
    RubricTag::fermi_paradox,     RubricTag::meta_seti,
    RubricTag::history,           RubricTag::social_science,
    RubricTag::commensal,         RubricTag::excluded_astrobiology_only,
    RubricTag::excluded_fundamental_only, RubricTag::excluded_pseudoscience_ufo,
    RubricTag::excluded_book_review,      RubricTag::excluded_satire};

inline std::string_view tag_name(RubricTag t) {
  switch (t) {
    case RubricTag::observation: return "observation";
    case RubricTag::instrumentation: return "instrumentation";
    case RubricTag::fermi_paradox: return "fermi-paradox";
    case RubricTag::meta_seti: return "meta-seti";
    case RubricTag::history: return "history";
    case RubricTag::social_science: return "social-science";
    case RubricTag::commensal: return "commensal";
    case RubricTag::excluded_astrobiology_only: return "excluded-astrobiology-only";
    case RubricTag::excluded_fundamental_only: return "excluded-fundamental-only";
    case RubricTag::excluded_pseudoscience_ufo: return "excluded-pseudoscience-ufo";
    case RubricTag::excluded_book_review: return "excluded-book-review";
    case RubricTag::excluded_satire: return "excluded-satire";
  }
  return "?";
}

inline std::optional<RubricTag> tag_from_name(std::string_view s) {
  for (auto t : kAllTags)
    if (tag_name(t) == s) return t;
  return std::nullopt;
}

inline bool is_exclusion_tag(RubricTag t) { return tag_name(t).substr(0, 9) == "excluded-"; }

/// Questions shown with the commensal tag. Any "yes" supports inclusion.
inline constexpr std::array<std::string_view, 5> kCommensalChecklist = {
    "Is SETI a primary objective of the project, or was the project deliberately set up to allow commensal SETI?",
    "For technology work: is SETI a stated intended application?",
    "Is the relevance to SETI discussed substantively, not just mentioned in passing?",
    "Does the paper propose a target, target list, or technique for future SETI work?",
    "Is the work a prerequisite for future SETI efforts, and do the authors say so?",
};

enum class Verdict { relevant, irrelevant, skipped };

inline std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::relevant: return "relevant";
    case Verdict::irrelevant: return "irrelevant";
    case Verdict::skipped: return "skipped";
  }
  return "?";
}

/// Accepts the full names and the one-letter forms r / i / s.
inline std::optional<Verdict> verdict_from_name(std::string_view s) {
  std::string l;
  for (char c : s) l += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (l == "relevant" || l == "r") return Verdict::relevant;
  if (l == "irrelevant" || l == "i") return Verdict::irrelevant;
  if (l == "skipped" || l == "skip" || l == "s") return Verdict::skipped;
  return std::nullopt;
}

/// What a decision source proposes for one record.
struct Proposal {
  Verdict verdict = Verdict::skipped;
  std::set<RubricTag> reasons;
  std::string note;
};

struct Decision {
  std::uint64_t seq = 0;
  std::string bibcode;
  Verdict verdict = Verdict::skipped;
  std::set<RubricTag> reasons;
  std::string note;
  std::string curator;
  Timestamp decided_at = 0;
  std::string month_stamp;  // YYYY-MM, UTC at decision time
  bool operator==(const Decision&) const = default;
};

struct UndoEntry {
  std::uint64_t seq = 0;
  std::uint64_t target = 0;  // seq of the decision being withdrawn
  std::string curator;
  Timestamp at = 0;
  bool operator==(const UndoEntry&) const = default;
};

using LogEntry = std::variant<Decision, UndoEntry>;

inline std::uint64_t entry_seq(const LogEntry& e) {
  return std::visit([](const auto& x) { return x.seq; }, e);
}

/// Throws InvalidDecision when the verdict and tags disagree.
inline void check_proposal(const Proposal& p) {
  bool excluded = std::any_of(p.reasons.begin(), p.reasons.end(), is_exclusion_tag);
  if (p.verdict != Verdict::irrelevant && excluded)
    throw Error(Errc::InvalidDecision, "exclusion tags are only allowed on irrelevant verdicts");
  if (p.verdict == Verdict::irrelevant && !excluded && p.note.empty())
    throw Error(Errc::InvalidDecision, "an irrelevant verdict needs an exclusion tag or a note");
}

namespace detail {

inline nlohmann::ordered_json entry_json(const LogEntry& e) {
  nlohmann::ordered_json j;
  if (const auto* d = std::get_if<Decision>(&e)) {
    j["seq"] = d->seq;
    j["type"] = "decision";
    j["bibcode"] = d->bibcode;
    j["verdict"] = verdict_name(d->verdict);
    auto tags = nlohmann::ordered_json::array();
    for (auto t : d->reasons) tags.push_back(tag_name(t));
    j["reasons"] = tags;
    j["note"] = d->note;
    j["curator"] = d->curator;
    j["decidedAt"] = format_utc(d->decided_at);
    j["month"] = d->month_stamp;
  } else {
    const auto& u = std::get<UndoEntry>(e);
    j["seq"] = u.seq;
    j["type"] = "undo";
    j["target"] = u.target;
    j["curator"] = u.curator;
    j["at"] = format_utc(u.at);
  }
  return j;
}

inline LogEntry entry_from_json(const nlohmann::json& j, const std::string& where) {
  auto bad = [&](const std::string& why) -> Error { return Error(Errc::CorruptSnapshot, where + ": " + why); };
  auto str = [&](const char* k) {
    if (!j.contains(k) || !j[k].is_string()) throw bad(std::string("missing '") + k + "'");
    return j[k].get<std::string>();
  };
  auto time = [&](const char* k) {
    auto t = parse_utc(str(k));
    if (!t) throw bad(std::string("bad timestamp in '") + k + "'");
    return *t;
  };
  if (!j.is_object() || !j.contains("seq") || !j["seq"].is_number_unsigned()) throw bad("missing seq");
  std::uint64_t seq = j["seq"].get<std::uint64_t>();
  std::string type = str("type");
  if (type == "undo") {
    if (!j.contains("target") || !j["target"].is_number_unsigned()) throw bad("missing target");
    return UndoEntry{seq, j["target"].get<std::uint64_t>(), str("curator"), time("at")};
  }
  if (type != "decision") throw bad("unknown entry type " + type);
  Decision d;
  d.seq = seq;
  d.bibcode = str("bibcode");
  auto v = verdict_from_name(str("verdict"));
  if (!v) throw bad("unknown verdict");
  d.verdict = *v;
  if (!j.contains("reasons") || !j["reasons"].is_array()) throw bad("missing reasons");
  for (const auto& t : j["reasons"]) {
    auto tag = t.is_string() ? tag_from_name(t.get<std::string>()) : std::nullopt;
    if (!tag) throw bad("unknown tag " + t.dump());
    d.reasons.insert(*tag);
  }
  d.note = str("note");
  d.curator = str("curator");
  d.decided_at = time("decidedAt");
  d.month_stamp = str("month");
  return d;
}

}  // namespace detail

/// Append-only decision log, optionally mirrored to a JSONL file. Each entry
/// is written and flushed before append() returns.
class DecisionLog {
 public:
  DecisionLog() = default;

  /// Loads an existing file (if any) and appends further entries to it.
  explicit DecisionLog(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(*path_);
    if (!in) return;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::string where = path_->string() + ":" + std::to_string(lineno);
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) throw Error(Errc::CorruptSnapshot, where + ": invalid JSON");
      push(detail::entry_from_json(j, where), where);
    }
  }

  const std::vector<LogEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::uint64_t last_seq() const { return entries_.empty() ? 0 : entry_seq(entries_.back()); }
  std::uint64_t next_seq() const { return last_seq() + 1; }

  void append(LogEntry e) {
    if (path_) {
      std::ofstream out(*path_, std::ios::app | std::ios::binary);
      out << detail::entry_json(e).dump() << '\n';
      out.flush();
      if (!out) throw Error(Errc::IoFailure, "cannot append to " + path_->string());
    }
    push(std::move(e), "append");
  }

  std::string to_jsonl() const {
    std::string out;
    for (const auto& e : entries_) out += detail::entry_json(e).dump() + "\n";
    return out;
  }

  static DecisionLog from_jsonl(const std::string& text) {
    DecisionLog log;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::string where = "line " + std::to_string(lineno);
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) throw Error(Errc::CorruptSnapshot, where + ": invalid JSON");
      log.push(detail::entry_from_json(j, where), where);
    }
    return log;
  }

 private:
  void push(LogEntry e, const std::string& where) {
    if (entry_seq(e) != next_seq())
      throw Error(Errc::CorruptSnapshot, where + ": expected seq " + std::to_string(next_seq()) + ", got " +
                                             std::to_string(entry_seq(e)));
    entries_.push_back(std::move(e));
  }

  std::optional<std::filesystem::path> path_;
  std::vector<LogEntry> entries_;
};

/// Per-bibcode view of a log: the decisions still in force, oldest first.
/// The effective decision is the last one; undo pops it.
class DecisionState {
 public:
  void apply(const LogEntry& e) {
    if (const auto* d = std::get_if<Decision>(&e)) {
      stacks_[d->bibcode].push_back(*d);
      live_.push_back(d->seq);
      where_[d->seq] = d->bibcode;
      return;
    }
    const auto& u = std::get<UndoEntry>(e);
    auto it = where_.find(u.target);
    if (it == where_.end()) throw Error(Errc::NothingToUndo, "no live decision " + std::to_string(u.target));
    auto& stack = stacks_[it->second];
    stack.erase(std::remove_if(stack.begin(), stack.end(), [&](const Decision& d) { return d.seq == u.target; }),
                stack.end());
    if (stack.empty()) stacks_.erase(it->second);
    live_.erase(std::remove(live_.begin(), live_.end(), u.target), live_.end());
    where_.erase(it);
  }

  const Decision* effective(std::string_view bibcode) const {
    auto it = stacks_.find(std::string(bibcode));
    return it == stacks_.end() || it->second.empty() ? nullptr : &it->second.back();
  }

  /// Seq of the newest decision not yet undone.
  std::optional<std::uint64_t> last_live() const {
    if (live_.empty()) return std::nullopt;
    return live_.back();
  }

  const std::map<std::string, std::vector<Decision>>& stacks() const { return stacks_; }

 private:
  std::map<std::string, std::vector<Decision>> stacks_;
  std::vector<std::uint64_t> live_;
  std::map<std::uint64_t, std::string> where_;
};

/// Routes decisions into the two libraries and records them. SETI and
/// NotSETI are registered as an exclusive pair.
class Curator {
 public:
  Curator(Catalog& catalog, DecisionLog& log, std::string seti_key, std::string not_seti_key,
          Clock clock = system_now)
      : catalog_(catalog), log_(log), seti_(std::move(seti_key)), not_seti_(std::move(not_seti_key)),
        clock_(std::move(clock)) {
    catalog_.library(seti_);
    catalog_.library(not_seti_);
    catalog_.add_exclusive_pair(seti_, not_seti_);
    for (const auto& e : log_.entries()) state_.apply(e);
  }

  const std::string& seti_key() const { return seti_; }
  const std::string& not_seti_key() const { return not_seti_; }
  Catalog& catalog() { return catalog_; }
  const Catalog& catalog() const { return catalog_; }
  const DecisionLog& log() const { return log_; }
  const DecisionState& state() const { return state_; }

  const Decision* effective(std::string_view bibcode) const { return state_.effective(bibcode); }

  Decision decide(const std::string& bibcode, const Proposal& p, const std::string& curator) {
    if (bibcode.empty()) throw Error(Errc::InvalidDecision, "empty bibcode");
    check_proposal(p);
    Timestamp now = clock_();
    Decision d{log_.next_seq(), bibcode, p.verdict, p.reasons, p.note, curator, now, month_stamp(now)};
    log_.append(d);
    state_.apply(d);
    route(bibcode);
    return d;
  }

  /// Withdraws the newest decision still in force; the bibcode falls back
  /// to its previous decision, or to undecided. Throws NothingToUndo.
  Decision undo(const std::string& curator) {
    auto target = state_.last_live();
    if (!target) throw Error(Errc::NothingToUndo, "no decision to undo");
    return undo_seq(*target, curator);
  }

  /// Same, restricted to one bibcode's newest decision.
  Decision undo(const std::string& curator, std::string_view bibcode) {
    const Decision* d = state_.effective(bibcode);
    if (!d) throw Error(Errc::NothingToUndo, "no decision to undo for " + std::string(bibcode));
    return undo_seq(d->seq, curator);
  }

  /// Final (SETI, NotSETI) membership implied by a log alone, starting from
  /// empty libraries.
  static std::pair<MemberSet, MemberSet> replay(const DecisionLog& log) {
    DecisionState st;
    for (const auto& e : log.entries()) st.apply(e);
    std::pair<MemberSet, MemberSet> out;
    for (const auto& [b, stack] : st.stacks()) {
      if (stack.empty()) continue;
      if (stack.back().verdict == Verdict::relevant) out.first.insert(b);
      if (stack.back().verdict == Verdict::irrelevant) out.second.insert(b);
    }
    return out;
  }

 private:
  Decision undo_seq(std::uint64_t target, const std::string& curator) {
    Decision undone = find_decision(target);
    UndoEntry u{log_.next_seq(), target, curator, clock_()};
    log_.append(u);
    state_.apply(u);
    route(undone.bibcode);
    return undone;
  }

  Decision find_decision(std::uint64_t seq) const {
    for (const auto& e : log_.entries())
      if (const auto* d = std::get_if<Decision>(&e); d && d->seq == seq) return *d;
    throw Error(Errc::NothingToUndo, "unknown decision " + std::to_string(seq));
  }

  // Brings library membership in line with the effective decision. Removal
  // runs first so the exclusive pair is never violated mid-way.
  void route(const std::string& bibcode) {
    const Decision* d = state_.effective(bibcode);
    Verdict v = d ? d->verdict : Verdict::skipped;
    if (v != Verdict::relevant) catalog_.remove_members(seti_, {bibcode});
    if (v != Verdict::irrelevant) catalog_.remove_members(not_seti_, {bibcode});
    if (v == Verdict::relevant) catalog_.add_members(seti_, {bibcode});
    if (v == Verdict::irrelevant) catalog_.add_members(not_seti_, {bibcode});
  }

  Catalog& catalog_;
  DecisionLog& log_;
  std::string seti_;
  std::string not_seti_;
  Clock clock_;
  DecisionState state_;
};

/// Supplies verdicts during an update cycle. Returning nullopt means the
/// source has nothing to say about the record.
class DecisionSource {
 public:
  virtual ~DecisionSource() = default;
  virtual std::optional<Proposal> propose(const BibRecord& record, const std::vector<MatchTriple>& why) = 0;
};

class FunctionSource : public DecisionSource {
 public:
  using Fn = std::function<std::optional<Proposal>(const BibRecord&, const std::vector<MatchTriple>&)>;
  explicit FunctionSource(Fn fn) : fn_(std::move(fn)) {}
  std::optional<Proposal> propose(const BibRecord& r, const std::vector<MatchTriple>& why) override {
    return fn_(r, why);
  }

 private:
  Fn fn_;
};

/// Batch file: one decision per line, tab-separated
///   bibcode <TAB> verdict <TAB> tags (comma-separated, may be empty) <TAB> note
/// Trailing fields may be omitted. Blank lines and lines starting with '#'
/// are ignored. Later lines for the same bibcode win.
inline std::map<std::string, Proposal> parse_batch(std::istream& in, const std::string& source = "batch") {
  std::map<std::string, Proposal> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    std::string where = source + ":" + std::to_string(lineno);
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() < 2 || cols[0].empty()) throw Error(Errc::InvalidDecision, where + ": expected bibcode and verdict");
    Proposal p;
    auto v = verdict_from_name(cols[1]);
    if (!v) throw Error(Errc::InvalidDecision, where + ": unknown verdict '" + cols[1] + "'");
    p.verdict = *v;
    if (cols.size() > 2) {
      std::stringstream ts(cols[2]);
      std::string t;
      while (std::getline(ts, t, ',')) {
        if (t.empty()) continue;
        auto tag = tag_from_name(t);
        if (!tag) throw Error(Errc::InvalidDecision, where + ": unknown tag '" + t + "'");
        p.reasons.insert(*tag);
      }
    }
    if (cols.size() > 3) {
      p.note = cols[3];
      for (std::size_t i = 4; i < cols.size(); ++i) p.note += " " + cols[i];
    }
    try {
      check_proposal(p);
    } catch (const Error& e) {
      throw Error(Errc::InvalidDecision, where + ": " + e.what());
    }
    out[cols[0]] = std::move(p);
  }
  return out;
}

class BatchSource : public DecisionSource {
 public:
  explicit BatchSource(std::map<std::string, Proposal> decisions) : decisions_(std::move(decisions)) {}
  std::optional<Proposal> propose(const BibRecord& r, const std::vector<MatchTriple>&) override {
    auto it = decisions_.find(r.bibcode);
    if (it == decisions_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::string, Proposal> decisions_;
};

/// The single automatic rule: book reviews are excluded.
inline std::optional<Proposal> auto_rules(const BibRecord& r) {
  if (r.doctype == Doctype::bookreview) return Proposal{Verdict::irrelevant, {RubricTag::excluded_book_review}, ""};
  return std::nullopt;
}

struct TagHint {
  RubricTag tag;
  int score = 0;
  std::vector<std::string> cues;  // cue phrases that fired
};

namespace detail {
struct Cue {
  RubricTag tag;
  std::string_view phrase;  // matched on word boundaries, lower case
  int weight;
};

inline constexpr Cue kCues[] = {
    {RubricTag::commensal, "commensal", 4},
    {RubricTag::commensal, "commensally", 4},
    {RubricTag::commensal, "piggyback", 4},
    {RubricTag::commensal, "piggybacked", 4},
    {RubricTag::commensal, "parasitic", 2},
    {RubricTag::observation, "survey", 1},
    {RubricTag::observation, "null result", 2},
    {RubricTag::observation, "upper limit", 2},
    {RubricTag::observation, "upper limits", 2},
    {RubricTag::observation, "observations", 1},
    {RubricTag::observation, "search for", 1},
    {RubricTag::observation, "artifact", 1},
    {RubricTag::observation, "artifacts", 1},
    {RubricTag::instrumentation, "instrument", 2},
    {RubricTag::instrumentation, "receiver", 2},
    {RubricTag::instrumentation, "spectrometer", 2},
    {RubricTag::instrumentation, "backend", 2},
    {RubricTag::instrumentation, "detector", 1},
    {RubricTag::instrumentation, "pipeline", 1},
    {RubricTag::fermi_paradox, "fermi paradox", 4},
    {RubricTag::fermi_paradox, "great filter", 3},
    {RubricTag::fermi_paradox, "great silence", 3},
    {RubricTag::meta_seti, "drake equation", 3},
    {RubricTag::meta_seti, "search strategy", 2},
    {RubricTag::meta_seti, "strategies", 1},
    {RubricTag::meta_seti, "review", 1},
    {RubricTag::history, "history", 3},
    {RubricTag::history, "historical", 3},
    {RubricTag::social_science, "sociology", 3},
    {RubricTag::social_science, "religion", 3},
    {RubricTag::social_science, "public", 1},
    {RubricTag::social_science, "policy", 2},
    {RubricTag::social_science, "attitudes", 2},
    {RubricTag::excluded_astrobiology_only, "biosignature", 3},
    {RubricTag::excluded_astrobiology_only, "biosignatures", 3},
    {RubricTag::excluded_astrobiology_only, "habitability", 2},
    {RubricTag::excluded_astrobiology_only, "microbial", 2},
    {RubricTag::excluded_astrobiology_only, "origin of life", 2},
    {RubricTag::excluded_fundamental_only, "lattice", 2},
    {RubricTag::excluded_fundamental_only, "hydrology", 3},
    {RubricTag::excluded_fundamental_only, "plasma", 1},
    {RubricTag::excluded_pseudoscience_ufo, "ufo", 4},
    {RubricTag::excluded_pseudoscience_ufo, "ufos", 4},
    {RubricTag::excluded_pseudoscience_ufo, "uap", 3},
    {RubricTag::excluded_pseudoscience_ufo, "abduction", 4},
    {RubricTag::excluded_pseudoscience_ufo, "abductions", 4},
    {RubricTag::excluded_book_review, "book review", 4},
    {RubricTag::excluded_satire, "satire", 4},
    {RubricTag::excluded_satire, "satirical", 4},
    {RubricTag::excluded_satire, "april fools", 4},
};

// Space-padded lower-case word stream, so " phrase " finds whole words.
inline std::string padded_words(const std::vector<std::string>& texts) {
  std::string out = " ";
  for (const auto& t : texts)
    for (const auto& w : token_parts(t)) out += w + " ";
  return out;
}
}  // namespace detail

/// Advisory tag hints ranked by score, then rubric order. Cues are looked
/// up in the title, abstract, keywords and the matched terms of `why`.
inline std::vector<TagHint> suggest_tags(const BibRecord& r, const std::vector<MatchTriple>& why = {}) {
  std::vector<std::string> texts = {r.title, r.abstract};
  texts.insert(texts.end(), r.keywords.begin(), r.keywords.end());
  for (const auto& m : why) texts.push_back(m.term);
  std::string hay = detail::padded_words(texts);
  std::map<RubricTag, TagHint> by_tag;
  for (const auto& c : detail::kCues) {
    std::string needle = " " + std::string(c.phrase) + " ";
    if (hay.find(needle) == std::string::npos) continue;
    auto& h = by_tag.try_emplace(c.tag, TagHint{c.tag, 0, {}}).first->second;
    h.score += c.weight;
    h.cues.emplace_back(c.phrase);
  }
  if (r.doctype == Doctype::bookreview) {
    auto& h = by_tag.try_emplace(RubricTag::excluded_book_review, TagHint{RubricTag::excluded_book_review, 0, {}})
                  .first->second;
    h.score += 5;
    h.cues.emplace_back("doctype:bookreview");
  }
  std::vector<TagHint> out;
  for (auto& [t, h] : by_tag) out.push_back(std::move(h));
  std::stable_sort(out.begin(), out.end(), [](const TagHint& a, const TagHint& b) { return a.score > b.score; });
  return out;
}

struct CycleReport {
  std::size_t iterations = 0;  // number of query evaluations
  std::size_t classified_relevant = 0;
  std::size_t classified_irrelevant = 0;
  std::size_t skipped = 0;
  std::size_t automatic = 0;  // decisions made by auto_rules
  bool converged = false;
  std::vector<std::string> residual;  // hits left at the end, all skipped
};

/// True when the top level of `query` is a conjunction containing
/// NOT docs(library/KEY) for both keys.
inline bool has_exclusion_guards(const QueryNode& query, std::string_view seti, std::string_view not_seti) {
  QueryNode n = normalize(query);
  if (!n.is<And>()) return false;
  bool a = false, b = false;
  for (const auto& c : n.as<And>().children) {
    if (!c.is<Not>() || !c.as<Not>().child->is<DocsRef>()) continue;
    const auto& key = c.as<Not>().child->as<DocsRef>().key;
    a = a || key == seti;
    b = b || key == not_seti;
  }
  return a && b;
}

struct CycleOptions {
  std::string curator = "local";
  std::size_t max_iterations = 10000;
};

/// Evaluate, classify every unclassified hit, repeat until the query returns
/// nothing or only skipped records. Throws MissingExclusions when the query
/// does not exclude both libraries, and DecisionSourceExhausted when the
/// source has no verdict for a hit.
inline CycleReport run_update_cycle(const QueryNode& query, const Index& index, Curator& curator,
                                    DecisionSource& source, const CycleOptions& opts = {}) {
  if (!has_exclusion_guards(query, curator.seti_key(), curator.not_seti_key()))
    throw Error(Errc::MissingExclusions, "query must end with NOT docs(library/" + curator.seti_key() +
                                             ") NOT docs(library/" + curator.not_seti_key() + ")");
  CycleReport report;
  std::set<std::string> skipped;
  while (report.iterations < opts.max_iterations) {
    ++report.iterations;
    auto result = evaluate(query, index, curator.catalog(), EvalOptions{true});
    std::vector<std::string> pending;
    for (const auto& b : result.hits)
      if (!skipped.count(b)) pending.push_back(b);
    if (pending.empty()) break;
    for (const auto& b : pending) {
      const BibRecord& r = *index.corpus().find(b);
      std::optional<Proposal> p = auto_rules(r);
      std::string who = opts.curator;
      if (p) {
        ++report.automatic;
        who = "auto";
      } else {
        p = source.propose(r, result.explanations->at(b));
        if (!p) throw Error(Errc::DecisionSourceExhausted, "no decision available for " + b);
      }
      curator.decide(b, *p, who);
      switch (p->verdict) {
        case Verdict::relevant: ++report.classified_relevant; break;
        case Verdict::irrelevant: ++report.classified_irrelevant; break;
        case Verdict::skipped:
          ++report.skipped;
          skipped.insert(b);
          break;
      }
    }
  }
  report.residual = evaluate(query, index, curator.catalog()).hits;
  report.converged = report.residual.empty();
  return report;
}

/// Effective relevant decisions stamped with `month`.
inline std::vector<std::string> relevant_in_month(const Curator& curator, std::string_view month) {
  std::vector<std::string> out;
  for (const auto& [b, stack] : curator.state().stacks())
    if (!stack.empty() && stack.back().verdict == Verdict::relevant && stack.back().month_stamp == month)
      out.push_back(b);
  return out;
}

/// Adds the month's relevant bibcodes to the This-Month library. Returns
/// the number newly added.
inline std::size_t stage_month(Curator& curator, const std::string& this_month_key, std::string_view month) {
  if (!is_month_stamp(month)) throw Error(Errc::InvalidArgument, "month must be YYYY-MM: " + std::string(month));
  return curator.catalog().add_members(this_month_key, relevant_in_month(curator, month));
}

struct Digest {
  std::string text;
  std::size_t entries = 0;
  std::vector<std::string> warnings;
};

/// Markdown digest of the month's relevant records, grouped by doctype and
/// sorted by year then bibcode, both descending.
inline Digest render_digest(const Curator& curator, const Corpus& corpus, std::string_view month) {
  if (!is_month_stamp(month)) throw Error(Errc::InvalidArgument, "month must be YYYY-MM: " + std::string(month));
  auto bibcodes = relevant_in_month(curator, month);
  Digest d;
  std::ostringstream out;
  out << "# This Month in SETI: " << month << "\n\n";
  if (bibcodes.empty()) {
    d.warnings.push_back("EmptyMonth: no relevant decisions stamped " + std::string(month));
    out << "No new publications.\n";
    d.text = out.str();
    return d;
  }
  std::map<Doctype, std::vector<const BibRecord*>> groups;
  std::vector<std::string> missing;
  for (const auto& b : bibcodes) {
    if (const BibRecord* r = corpus.find(b)) groups[r->doctype].push_back(r);
    else missing.push_back(b);
  }
  d.entries = bibcodes.size();
  out << bibcodes.size() << (bibcodes.size() == 1 ? " new publication.\n" : " new publications.\n");
  auto by_recency = [](const BibRecord* a, const BibRecord* b) {
    return a->year != b->year ? a->year > b->year : a->bibcode > b->bibcode;
  };
  for (Doctype t : kAllDoctypes) {
    auto it = groups.find(t);
    if (it == groups.end()) continue;
    std::sort(it->second.begin(), it->second.end(), by_recency);
    out << "\n## " << doctype_name(t) << "\n\n";
    for (const BibRecord* r : it->second) {
      std::string authors;
      for (std::size_t i = 0; i < r->authors.size() && i < 5; ++i) authors += (i ? "; " : "") + r->authors[i];
      if (r->authors.size() > 5) authors += "; et al.";
      if (authors.empty()) authors = "(no authors)";
      out << "- " << r->title << ". " << authors << " (" << r->year << "). " << r->bibcode << "\n";
    }
  }
  if (!missing.empty()) {
    std::sort(missing.rbegin(), missing.rend());
    out << "\n## not in corpus\n\n";
    for (const auto& b : missing) out << "- " << b << "\n";
    d.warnings.push_back(std::to_string(missing.size()) + " relevant bibcodes are missing from the corpus");
  }
  d.text = out.str();
  return d;
}

}  // namespace bibcurate
