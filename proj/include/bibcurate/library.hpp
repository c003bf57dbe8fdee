#pragma once

// Named bibcode sets ("libraries") with set algebra, an append-only audit
// log, optional mutual-exclusion between designated pairs, and a text
// snapshot format:
//
//   bibcurate-catalog v1 libraries=N exclusive=M audit=K
//   library {"key":..,"name":..,"description":..,"created":..,"updated":..,"members":[..]}
//   exclusive {"a":..,"b":..}
//   audit {"seq":..,"who":..,"when":..,"op":..,"key":..,"bibcodes":[..]}
//
// Library lines are ordered by key, audit lines by sequence number.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bibcurate/error.hpp"
#include "bibcurate/resolver.hpp"
#include "bibcurate/timeutil.hpp"

namespace bibcurate {

inline constexpr std::size_t kLibraryKeyLength = 22;
inline constexpr std::string_view kKeyAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

inline bool is_library_key(std::string_view k) {
  return k.size() == kLibraryKeyLength &&
         std::all_of(k.begin(), k.end(), [](char c) { return kKeyAlphabet.find(c) != std::string_view::npos; });
}

struct Library {
  std::string key;
  std::string name;
  std::string description;
  MemberSet members;
  Timestamp created_at = 0;
  Timestamp updated_at = 0;
  bool operator==(const Library&) const = default;
};

enum class AuditOp { create, add, remove };

inline std::string_view audit_op_name(AuditOp op) {
  switch (op) {
    case AuditOp::create: return "create";
    case AuditOp::add: return "add";
    case AuditOp::remove: return "remove";
  }
  return "?";
}

struct AuditEntry {
  std::uint64_t seq = 0;
  std::string who;
  Timestamp when = 0;
  AuditOp op = AuditOp::add;
  std::string key;
  std::vector<std::string> bibcodes;  // effective changes only
  std::string name;                   // create only
  std::string description;            // create only
  bool operator==(const AuditEntry&) const = default;
};

enum class SetOp { union_, intersection, difference };

inline std::optional<SetOp> set_op_from_name(std::string_view s) {
  if (s == "union") return SetOp::union_;
  if (s == "intersection") return SetOp::intersection;
  if (s == "difference") return SetOp::difference;
  return std::nullopt;
}

inline MemberSet apply_set_op(SetOp op, const MemberSet& a, const MemberSet& b) {
  MemberSet out;
  auto sink = std::inserter(out, out.end());
  switch (op) {
    case SetOp::union_: std::set_union(a.begin(), a.end(), b.begin(), b.end(), sink); break;
    case SetOp::intersection: std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), sink); break;
    case SetOp::difference: std::set_difference(a.begin(), a.end(), b.begin(), b.end(), sink); break;
  }
  return out;
}

struct CatalogOptions {
  Clock clock = system_now;
  std::optional<std::uint64_t> seed;  // fixed seed for reproducible keys
  std::string actor = "local";
};

/// Not internally synchronized: one writer at a time, callers serialize.
class Catalog : public LibraryResolver {
 public:
  explicit Catalog(CatalogOptions opts = {})
      : clock_(std::move(opts.clock)), actor_(std::move(opts.actor)),
        rng_(opts.seed ? *opts.seed : std::random_device{}()) {}

  Catalog(const Catalog&) = default;
  Catalog& operator=(const Catalog&) = default;

  void set_actor(std::string who) { actor_ = std::move(who); }
  void set_clock(Clock c) { clock_ = std::move(c); }
  void set_seed(std::uint64_t seed) { rng_.seed(seed); }

  /// Creates an empty library. With `key` given (e.g. adopting a remote
  /// library's key) it must be well-formed and unused.
  std::string create_library(const std::string& name, const std::string& description = "",
                             std::optional<std::string> key = std::nullopt) {
    if (name.empty()) throw Error(Errc::InvalidArgument, "library name must not be empty");
    std::string k;
    if (key) {
      if (!is_library_key(*key)) throw Error(Errc::InvalidArgument, "malformed library key '" + *key + "'");
      if (libraries_.count(*key)) throw Error(Errc::InvalidArgument, "library key already in use: " + *key);
      k = *key;
    } else {
      do k = fresh_key();
      while (libraries_.count(k));
    }
    Timestamp now = clock_();
    libraries_.emplace(k, Library{k, name, description, {}, now, now});
    AuditEntry e{next_seq(), actor_, now, AuditOp::create, k, {}, name, description};
    audit_.push_back(std::move(e));
    return k;
  }

  /// Returns the number of bibcodes newly added. Throws UnknownLibraryKey,
  /// or ExclusivityViolation (nothing added) when a bibcode already belongs
  /// to a library paired exclusively with this one.
  std::size_t add_members(std::string_view key, const std::vector<std::string>& bibcodes) {
    Library& lib = mutable_library(key);
    for (const auto& partner : partners(lib.key)) {
      const MemberSet& other = libraries_.at(partner).members;
      std::vector<std::string> clash;
      for (const auto& b : bibcodes)
        if (other.count(b)) clash.push_back(b);
      if (!clash.empty()) {
        std::string list;
        for (const auto& b : clash) list += (list.empty() ? "" : ", ") + b;
        throw Error(Errc::ExclusivityViolation,
                    "already in " + libraries_.at(partner).name + " (" + partner + "): " + list);
      }
    }
    std::vector<std::string> added;
    for (const auto& b : bibcodes) {
      if (b.empty()) continue;
      if (lib.members.insert(b).second) added.push_back(b);
    }
    return record(lib, AuditOp::add, std::move(added));
  }

  std::size_t remove_members(std::string_view key, const std::vector<std::string>& bibcodes) {
    Library& lib = mutable_library(key);
    std::vector<std::string> removed;
    for (const auto& b : bibcodes)
      if (lib.members.erase(b)) removed.push_back(b);
    return record(lib, AuditOp::remove, std::move(removed));
  }

  MemberSet set_op(SetOp op, std::string_view key_a, std::string_view key_b) const {
    return apply_set_op(op, library(key_a).members, library(key_b).members);
  }

  /// Declares two libraries mutually exclusive. Throws ExclusivityViolation
  /// if they already overlap.
  void add_exclusive_pair(std::string_view a, std::string_view b) {
    const Library& la = library(a);
    const Library& lb = library(b);
    if (la.key == lb.key) throw Error(Errc::InvalidArgument, "a library cannot exclude itself");
    auto overlap = apply_set_op(SetOp::intersection, la.members, lb.members);
    if (!overlap.empty())
      throw Error(Errc::ExclusivityViolation, la.key + " and " + lb.key + " share " +
                                                  std::to_string(overlap.size()) + " members");
    auto pair = std::minmax(la.key, lb.key);
    if (std::find(exclusive_.begin(), exclusive_.end(), std::pair(pair.first, pair.second)) == exclusive_.end())
      exclusive_.emplace_back(pair.first, pair.second);
    std::sort(exclusive_.begin(), exclusive_.end());
  }

  const std::vector<std::pair<std::string, std::string>>& exclusive_pairs() const { return exclusive_; }

  bool contains(std::string_view key) const { return libraries_.find(key) != libraries_.end(); }

  const Library& library(std::string_view key) const {
    auto it = libraries_.find(key);
    if (it == libraries_.end()) throw Error(Errc::UnknownLibraryKey, std::string(key));
    return it->second;
  }

  /// Keys of libraries whose name matches case-insensitively.
  std::vector<std::string> find_by_name(std::string_view name) const {
    std::vector<std::string> keys;
    for (const auto& [k, lib] : libraries_)
      if (iequals(lib.name, name)) keys.push_back(k);
    return keys;
  }

  /// Accepts a key or a unique name. Throws UnknownLibraryKey or
  /// AmbiguousLibraryName.
  std::string resolve(std::string_view key_or_name) const {
    if (contains(key_or_name)) return std::string(key_or_name);
    auto keys = find_by_name(key_or_name);
    if (keys.empty()) throw Error(Errc::UnknownLibraryKey, std::string(key_or_name));
    if (keys.size() > 1)
      throw Error(Errc::AmbiguousLibraryName, std::string(key_or_name) + " names " +
                                                  std::to_string(keys.size()) + " libraries");
    return keys.front();
  }

  const std::map<std::string, Library, std::less<>>& libraries() const { return libraries_; }
  const std::vector<AuditEntry>& audit_log() const { return audit_; }

  MemberSet members(std::string_view key) const override { return library(key).members; }

  MemberSet group(std::string_view name) const override {
    MemberSet out;
    for (const auto& k : find_by_name(name)) {
      const auto& m = libraries_.at(k).members;
      out.insert(m.begin(), m.end());
    }
    return out;
  }

  /// Structural equality: libraries, exclusive pairs and the audit log.
  friend bool operator==(const Catalog& a, const Catalog& b) {
    return a.libraries_ == b.libraries_ && a.exclusive_ == b.exclusive_ && a.audit_ == b.audit_;
  }

  /// Rebuilds libraries from an audit log alone.
  static Catalog replay(const std::vector<AuditEntry>& log) {
    Catalog c;
    for (const auto& e : log) c.apply(e);
    return c;
  }

  // Snapshot support; see the format at the top of this file.
  std::string to_snapshot() const;
  static Catalog from_snapshot(const std::string& text);

 private:
  static bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
             return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
  }

  std::string fresh_key() {
    std::uniform_int_distribution<std::size_t> pick(0, kKeyAlphabet.size() - 1);
    std::string k(kLibraryKeyLength, 'A');
    for (char& c : k) c = kKeyAlphabet[pick(rng_)];
    return k;
  }

  std::uint64_t next_seq() const { return audit_.empty() ? 1 : audit_.back().seq + 1; }

  Library& mutable_library(std::string_view key) {
    auto it = libraries_.find(key);
    if (it == libraries_.end()) throw Error(Errc::UnknownLibraryKey, std::string(key));
    return it->second;
  }

  std::vector<std::string> partners(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [a, b] : exclusive_) {
      if (a == key) out.push_back(b);
      if (b == key) out.push_back(a);
    }
    return out;
  }

  std::size_t record(Library& lib, AuditOp op, std::vector<std::string> changed) {
    std::size_t n = changed.size();
    if (n == 0) return 0;
    Timestamp now = clock_();
    lib.updated_at = std::max(lib.updated_at, now);
    audit_.push_back(AuditEntry{next_seq(), actor_, now, op, lib.key, std::move(changed), {}, {}});
    return n;
  }

  void apply(const AuditEntry& e) {
    switch (e.op) {
      case AuditOp::create:
        libraries_.emplace(e.key, Library{e.key, e.name, e.description, {}, e.when, e.when});
        break;
      case AuditOp::add: {
        Library& lib = mutable_library(e.key);
        lib.members.insert(e.bibcodes.begin(), e.bibcodes.end());
        lib.updated_at = std::max(lib.updated_at, e.when);
        break;
      }
      case AuditOp::remove: {
        Library& lib = mutable_library(e.key);
        for (const auto& b : e.bibcodes) lib.members.erase(b);
        lib.updated_at = std::max(lib.updated_at, e.when);
        break;
      }
    }
    audit_.push_back(e);
  }

  Clock clock_;
  std::string actor_;
  std::mt19937_64 rng_;
  std::map<std::string, Library, std::less<>> libraries_;
  std::vector<std::pair<std::string, std::string>> exclusive_;
  std::vector<AuditEntry> audit_;
};

namespace detail {

inline nlohmann::json string_list(const auto& xs) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& x : xs) a.push_back(x);
  return a;
}

inline nlohmann::ordered_json library_line(const Library& lib) {
  nlohmann::ordered_json j;
  j["key"] = lib.key;
  j["name"] = lib.name;
  j["description"] = lib.description;
  j["created"] = format_utc(lib.created_at);
  j["updated"] = format_utc(lib.updated_at);
  j["members"] = string_list(lib.members);
  return j;
}

inline nlohmann::ordered_json audit_line(const AuditEntry& e) {
  nlohmann::ordered_json j;
  j["seq"] = e.seq;
  j["who"] = e.who;
  j["when"] = format_utc(e.when);
  j["op"] = audit_op_name(e.op);
  j["key"] = e.key;
  if (e.op == AuditOp::create) {
    j["name"] = e.name;
    j["description"] = e.description;
  } else {
    j["bibcodes"] = string_list(e.bibcodes);
  }
  return j;
}

[[noreturn]] inline void corrupt(const std::string& why) { throw Error(Errc::CorruptSnapshot, why); }

inline Timestamp snapshot_time(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) corrupt(std::string("missing timestamp '") + key + "'");
  auto t = parse_utc(j[key].get<std::string>());
  if (!t) corrupt("bad timestamp " + j[key].get<std::string>());
  return *t;
}

inline std::string snapshot_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) corrupt(std::string("missing string '") + key + "'");
  return j[key].get<std::string>();
}

inline std::vector<std::string> snapshot_strings(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) corrupt(std::string("missing list '") + key + "'");
  std::vector<std::string> out;
  for (const auto& x : j[key]) {
    if (!x.is_string()) corrupt(std::string("non-string in '") + key + "'");
    out.push_back(x.get<std::string>());
  }
  return out;
}

}  // namespace detail

inline std::string Catalog::to_snapshot() const {
  std::ostringstream out;
  out << "bibcurate-catalog v1 libraries=" << libraries_.size() << " exclusive=" << exclusive_.size()
      << " audit=" << audit_.size() << '\n';
  for (const auto& [k, lib] : libraries_) out << "library " << detail::library_line(lib).dump() << '\n';
  for (const auto& [a, b] : exclusive_) {
    nlohmann::ordered_json j;
    j["a"] = a;
    j["b"] = b;
    out << "exclusive " << j.dump() << '\n';
  }
  for (const auto& e : audit_) out << "audit " << detail::audit_line(e).dump() << '\n';
  return out.str();
}

inline Catalog Catalog::from_snapshot(const std::string& text) {
  using detail::corrupt;
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) corrupt("empty snapshot");
  std::size_t n_lib = 0, n_exc = 0, n_audit = 0;
  {
    std::istringstream hs(header);
    std::string magic, version, a, b, c;
    hs >> magic >> version >> a >> b >> c;
    auto count = [&](const std::string& field, const char* prefix) -> std::size_t {
      std::string p(prefix);
      if (field.rfind(p, 0) != 0) corrupt("bad header: " + header);
      try {
        return static_cast<std::size_t>(std::stoull(field.substr(p.size())));
      } catch (const std::exception&) {
        corrupt("bad header: " + header);
      }
    };
    if (magic != "bibcurate-catalog" || version != "v1") corrupt("not a catalog snapshot");
    n_lib = count(a, "libraries=");
    n_exc = count(b, "exclusive=");
    n_audit = count(c, "audit=");
  }

  Catalog cat;
  std::string line;
  std::size_t seen_lib = 0, seen_exc = 0, seen_audit = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    auto sp = line.find(' ');
    if (sp == std::string::npos) corrupt("line " + std::to_string(lineno) + ": no record tag");
    std::string tag = line.substr(0, sp);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line.substr(sp + 1));
    } catch (const nlohmann::json::parse_error&) {
      corrupt("line " + std::to_string(lineno) + ": unreadable record");
    }
    if (!j.is_object()) corrupt("line " + std::to_string(lineno) + ": not an object");
    if (tag == "library") {
      Library lib;
      lib.key = detail::snapshot_string(j, "key");
      lib.name = detail::snapshot_string(j, "name");
      lib.description = detail::snapshot_string(j, "description");
      lib.created_at = detail::snapshot_time(j, "created");
      lib.updated_at = detail::snapshot_time(j, "updated");
      for (auto& m : detail::snapshot_strings(j, "members")) lib.members.insert(std::move(m));
      if (!is_library_key(lib.key)) corrupt("malformed key " + lib.key);
      if (lib.updated_at < lib.created_at) corrupt("updated before created for " + lib.key);
      if (!cat.libraries_.emplace(lib.key, lib).second) corrupt("duplicate library " + lib.key);
      ++seen_lib;
    } else if (tag == "exclusive") {
      cat.exclusive_.emplace_back(detail::snapshot_string(j, "a"), detail::snapshot_string(j, "b"));
      ++seen_exc;
    } else if (tag == "audit") {
      AuditEntry e;
      if (!j.contains("seq") || !j["seq"].is_number_unsigned()) corrupt("audit entry without seq");
      e.seq = j["seq"].get<std::uint64_t>();
      e.who = detail::snapshot_string(j, "who");
      e.when = detail::snapshot_time(j, "when");
      std::string op = detail::snapshot_string(j, "op");
      e.key = detail::snapshot_string(j, "key");
      if (op == "create") {
        e.op = AuditOp::create;
        e.name = detail::snapshot_string(j, "name");
        e.description = detail::snapshot_string(j, "description");
      } else if (op == "add" || op == "remove") {
        e.op = op == "add" ? AuditOp::add : AuditOp::remove;
        e.bibcodes = detail::snapshot_strings(j, "bibcodes");
      } else {
        corrupt("unknown audit op " + op);
      }
      if (!cat.audit_.empty() && e.seq <= cat.audit_.back().seq) corrupt("audit sequence not increasing");
      cat.audit_.push_back(std::move(e));
      ++seen_audit;
    } else {
      corrupt("line " + std::to_string(lineno) + ": unknown tag " + tag);
    }
  }
  if (seen_lib != n_lib || seen_exc != n_exc || seen_audit != n_audit) corrupt("truncated snapshot");
  for (const auto& [a, b] : cat.exclusive_)
    if (!cat.contains(a) || !cat.contains(b)) corrupt("exclusive pair names unknown library");
  return cat;
}

/// Writes atomically: temp file in the same directory, then rename.
inline void save_snapshot(const Catalog& cat, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoFailure, "cannot write " + tmp.string());
    out << cat.to_snapshot();
    out.flush();
    if (!out) throw Error(Errc::IoFailure, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::IoFailure, "rename to " + path.string() + ": " + ec.message());
}

inline Catalog load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return Catalog::from_snapshot(buf.str());
}

}  // namespace bibcurate
