#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>

#include "bibcurate/error.hpp"

namespace bibcurate {

using MemberSet = std::set<std::string>;

/// Answers the library-membership questions a query can ask:
/// docs(library/KEY) and bibgroup:NAME.
class LibraryResolver {
 public:
  virtual ~LibraryResolver() = default;
  /// Throws UnknownLibraryKey.
  virtual MemberSet members(std::string_view key) const = 0;
  /// Members of the library carrying this name; empty when none does.
  virtual MemberSet group(std::string_view name) const = 0;
};

/// Resolver over plain maps, for tests and ad-hoc evaluation.
class MapResolver : public LibraryResolver {
 public:
  std::map<std::string, MemberSet, std::less<>> by_key;
  std::map<std::string, std::string, std::less<>> key_by_name;

  MemberSet members(std::string_view key) const override {
    auto it = by_key.find(key);
    if (it == by_key.end()) throw Error(Errc::UnknownLibraryKey, std::string(key));
    return it->second;
  }

  MemberSet group(std::string_view name) const override {
    auto it = key_by_name.find(name);
    if (it == key_by_name.end()) return {};
    return members(it->second);
  }
};

/// Resolver that knows no libraries at all.
class NoLibraries : public LibraryResolver {
 public:
  MemberSet members(std::string_view key) const override {
    throw Error(Errc::UnknownLibraryKey, std::string(key));
  }
  MemberSet group(std::string_view) const override { return {}; }
};

}  // namespace bibcurate
