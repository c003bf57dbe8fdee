#pragma once

// Boolean query language: AST, parser, normalizer, serializer, validator.
//
// Grammar (binary NOT binds loosest, so a trailing "NOT docs(...)" subtracts
// from everything before it):
//
//   query    := or-expr ( NOT or-expr )*           A NOT B == And(A, Not(B))
//   or-expr  := and-expr ( OR and-expr )*
//   and-expr := unit ( AND unit | unit )*          juxtaposition == AND
//   unit     := NOT unit | '(' query ')' | docs-ref | term
//             | ['='] field ':' ( term | '(' query ')' )
//   docs-ref := docs(library/KEY)
//   term     := "quoted phrase" | bare-word | year form (under year: only)
//
// AND/OR/NOT are reserved only in upper case. A leading '=' on a field marks
// every phrase inside that scope as exact (no acronym expansion).

#include <algorithm>
#include <cctype>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "bibcurate/error.hpp"

namespace bibcurate {

enum class Field { abs, body, title, author, keyword, bibgroup, doctype, year, full };

inline std::string_view field_name(Field f) {
  switch (f) {
    case Field::abs: return "abs";
    case Field::body: return "body";
    case Field::title: return "title";
    case Field::author: return "author";
    case Field::keyword: return "keyword";
    case Field::bibgroup: return "bibgroup";
    case Field::doctype: return "doctype";
    case Field::year: return "year";
    case Field::full: return "full";
  }
  return "full";
}

inline std::optional<Field> field_from_name(std::string_view name) {
  static constexpr Field all[] = {Field::abs,     Field::body,    Field::title,
                                  Field::author,  Field::keyword, Field::bibgroup,
                                  Field::doctype, Field::year,    Field::full};
  for (Field f : all)
    if (field_name(f) == name) return f;
  return std::nullopt;
}

inline constexpr int kMinYear = 1000;
inline constexpr int kMaxYear = 2999;

/// Copyable owning pointer with deep value semantics, used to close the
/// recursion in QueryNode.
template <typename T>
class Box {
 public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  const T& operator*() const { return *ptr_; }
  T& operator*() { return *ptr_; }
  const T* operator->() const { return ptr_.get(); }
  T* operator->() { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

 private:
  std::unique_ptr<T> ptr_;
};

struct QueryNode;

struct Phrase {
  std::string text;
  bool exact = false;
  bool operator==(const Phrase&) const = default;
};

struct Word {
  std::string text;
  bool operator==(const Word&) const = default;
};

struct FieldScope {
  Field field;
  Box<QueryNode> child;
  bool operator==(const FieldScope&) const = default;
};

struct DocsRef {
  std::string key;
  bool operator==(const DocsRef&) const = default;
};

struct YearRange {
  int first;
  int last;
  bool operator==(const YearRange&) const = default;
};

struct And {
  std::vector<QueryNode> children;
  bool operator==(const And&) const = default;
};

struct Or {
  std::vector<QueryNode> children;
  bool operator==(const Or&) const = default;
};

struct Not {
  Box<QueryNode> child;
  bool operator==(const Not&) const = default;
};

struct QueryNode {
  using Variant = std::variant<Phrase, Word, FieldScope, DocsRef, YearRange, And, Or, Not>;
  Variant v;

  template <typename T>
    requires(std::is_same_v<T, Phrase> || std::is_same_v<T, Word> || std::is_same_v<T, FieldScope> ||
             std::is_same_v<T, DocsRef> || std::is_same_v<T, YearRange> || std::is_same_v<T, And> ||
             std::is_same_v<T, Or> || std::is_same_v<T, Not>)
  QueryNode(T alt) : v(std::move(alt)) {}

  template <typename T>
  bool is() const { return std::holds_alternative<T>(v); }
  template <typename T>
  const T& as() const { return std::get<T>(v); }
  template <typename T>
  T& as() { return std::get<T>(v); }

  bool operator==(const QueryNode&) const = default;
};

// Construction helpers.
namespace q {
inline QueryNode phrase(std::string text, bool exact = false) { return Phrase{std::move(text), exact}; }
inline QueryNode word(std::string text) { return Word{std::move(text)}; }
inline QueryNode scope(Field f, QueryNode child) { return FieldScope{f, std::move(child)}; }
inline QueryNode docs(std::string key) { return DocsRef{std::move(key)}; }
inline QueryNode years(int first, int last) { return YearRange{first, last}; }
inline QueryNode year(int y) { return YearRange{y, y}; }
inline QueryNode all_of(std::vector<QueryNode> children) { return And{std::move(children)}; }
inline QueryNode any_of(std::vector<QueryNode> children) { return Or{std::move(children)}; }
inline QueryNode negate(QueryNode child) { return Not{std::move(child)}; }
}  // namespace q

/// S-expression rendering for diagnostics and test output.
inline std::string debug_string(const QueryNode& n) {
  struct V {
    std::string operator()(const Phrase& p) const {
      return std::string(p.exact ? "ExactPhrase(\"" : "Phrase(\"") + p.text + "\")";
    }
    std::string operator()(const Word& w) const { return "Word(" + w.text + ")"; }
    std::string operator()(const FieldScope& s) const {
      return "FieldScope(" + std::string(field_name(s.field)) + ", " + debug_string(*s.child) + ")";
    }
    std::string operator()(const DocsRef& d) const { return "DocsRef(" + d.key + ")"; }
    std::string operator()(const YearRange& y) const {
      return "YearRange(" + std::to_string(y.first) + ", " + std::to_string(y.last) + ")";
    }
    std::string list(const char* name, const std::vector<QueryNode>& cs) const {
      std::string out = std::string(name) + "(";
      for (std::size_t i = 0; i < cs.size(); ++i) {
        if (i) out += ", ";
        out += debug_string(cs[i]);
      }
      return out + ")";
    }
    std::string operator()(const And& a) const { return list("And", a.children); }
    std::string operator()(const Or& o) const { return list("Or", o.children); }
    std::string operator()(const Not& x) const { return "Not(" + debug_string(*x.child) + ")"; }
  };
  return std::visit(V{}, n.v);
}

inline std::ostream& operator<<(std::ostream& os, const QueryNode& n) { return os << debug_string(n); }

namespace detail {

inline bool is_reserved(std::string_view s) { return s == "AND" || s == "OR" || s == "NOT"; }

inline bool is_bare_char(char c) {
  return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' && c != '"' &&
         c != ':';
}

inline bool is_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

/// Parses "2021" or "2018-2019".
inline std::optional<YearRange> parse_year_form(std::string_view s) {
  auto parse_one = [](std::string_view t) -> std::optional<int> {
    if (t.size() != 4) return std::nullopt;
    int v = 0;
    for (char c : t) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      v = v * 10 + (c - '0');
    }
    if (v < kMinYear || v > kMaxYear) return std::nullopt;
    return v;
  };
  auto dash = s.find('-');
  if (dash == std::string_view::npos) {
    auto y = parse_one(s);
    if (!y) return std::nullopt;
    return YearRange{*y, *y};
  }
  auto a = parse_one(s.substr(0, dash));
  auto b = parse_one(s.substr(dash + 1));
  if (!a || !b || *a > *b) return std::nullopt;
  return YearRange{*a, *b};
}

enum class Tok { LParen, RParen, Phrase, Bare, And, Or, Not, FieldPrefix, Docs, End };

struct Token {
  Tok kind;
  std::string text;  // phrase/bare text, docs key
  Field field = Field::full;
  bool exact = false;
  std::size_t offset = 0;
};

inline std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto at = [&](std::size_t k) { return k < s.size() ? s[k] : '\0'; };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (c == '(') {
      out.push_back({Tok::LParen, "", Field::full, false, start});
      ++i;
      continue;
    }
    if (c == ')') {
      out.push_back({Tok::RParen, "", Field::full, false, start});
      ++i;
      continue;
    }
    if (c == '"') {
      std::string text;
      ++i;
      bool closed = false;
      while (i < s.size()) {
        if (s[i] == '\\' && i + 1 < s.size()) {
          text += s[i + 1];
          i += 2;
          continue;
        }
        if (s[i] == '"') {
          closed = true;
          ++i;
          break;
        }
        text += s[i++];
      }
      if (!closed)
        throw Error(Errc::UnbalancedParen, "unterminated quote at offset " + std::to_string(start));
      out.push_back({Tok::Phrase, std::move(text), Field::full, false, start});
      continue;
    }
    // Bare run, possibly a field prefix or a docs reference.
    while (i < s.size() && is_bare_char(s[i])) ++i;
    std::string run(s.substr(start, i - start));
    if (at(i) == ':') {
      bool exact = !run.empty() && run.front() == '=';
      std::string name = exact ? run.substr(1) : run;
      auto f = field_from_name(name);
      if (!f) throw Error(Errc::UnknownField, "'" + name + "' at offset " + std::to_string(start));
      ++i;  // consume ':'
      out.push_back({Tok::FieldPrefix, "", *f, exact, start});
      continue;
    }
    if (run == "docs" && at(i) == '(') {
      const std::string_view lead = "(library/";
      if (s.substr(i, lead.size()) != lead)
        throw Error(Errc::MalformedDocsRef, "expected docs(library/KEY) at offset " + std::to_string(start));
      std::size_t k = i + lead.size();
      std::size_t key_start = k;
      while (k < s.size() && is_key_char(s[k])) ++k;
      if (k == key_start || at(k) != ')')
        throw Error(Errc::MalformedDocsRef, "expected docs(library/KEY) at offset " + std::to_string(start));
      out.push_back({Tok::Docs, std::string(s.substr(key_start, k - key_start)), Field::full, false, start});
      i = k + 1;
      continue;
    }
    if (run.empty()) {
      // A lone ':' with nothing before it.
      throw Error(Errc::UnknownField, "empty field name at offset " + std::to_string(start));
    }
    if (run.front() == '=')
      throw Error(Errc::UnknownField, "'=' must prefix a field name, at offset " + std::to_string(start));
    if (run == "AND") out.push_back({Tok::And, run, Field::full, false, start});
    else if (run == "OR") out.push_back({Tok::Or, run, Field::full, false, start});
    else if (run == "NOT") out.push_back({Tok::Not, run, Field::full, false, start});
    else out.push_back({Tok::Bare, std::move(run), Field::full, false, start});
  }
  out.push_back({Tok::End, "", Field::full, false, s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  QueryNode parse_top() {
    QueryNode n = parse_query();
    if (peek().kind == Tok::RParen)
      throw Error(Errc::UnbalancedParen, "unexpected ')' at offset " + std::to_string(peek().offset));
    if (peek().kind != Tok::End)
      throw Error(Errc::DanglingOperator, "unexpected token at offset " + std::to_string(peek().offset));
    return n;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  bool starts_unit(Tok k) const {
    return k == Tok::LParen || k == Tok::Phrase || k == Tok::Bare || k == Tok::FieldPrefix ||
           k == Tok::Docs || k == Tok::Not;
  }

  QueryNode parse_query() {
    QueryNode lhs = parse_or();
    if (peek().kind != Tok::Not) return lhs;
    std::vector<QueryNode> children;
    children.push_back(std::move(lhs));
    while (peek().kind == Tok::Not) {
      next();
      children.push_back(q::negate(parse_or()));
    }
    return q::all_of(std::move(children));
  }

  QueryNode parse_or() {
    std::vector<QueryNode> terms;
    terms.push_back(parse_and());
    while (peek().kind == Tok::Or) {
      next();
      terms.push_back(parse_and());
    }
    if (terms.size() == 1) return std::move(terms.front());
    return q::any_of(std::move(terms));
  }

  QueryNode parse_and() {
    std::vector<QueryNode> units;
    units.push_back(parse_unit());
    for (;;) {
      Tok k = peek().kind;
      if (k == Tok::And) {
        next();
        units.push_back(parse_unit());
      } else if (starts_unit(k) && k != Tok::Not) {
        units.push_back(parse_unit());
      } else {
        break;
      }
    }
    if (units.size() == 1) return std::move(units.front());
    return q::all_of(std::move(units));
  }

  QueryNode parse_group() {
    // '(' already consumed
    if (peek().kind == Tok::RParen)
      throw Error(Errc::EmptyQuery, "empty group at offset " + std::to_string(peek().offset));
    QueryNode inner = parse_query();
    if (peek().kind != Tok::RParen)
      throw Error(Errc::UnbalancedParen, "missing ')' at offset " + std::to_string(peek().offset));
    next();
    return inner;
  }

  QueryNode parse_unit() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Not: {
        next();
        return q::negate(parse_unit());
      }
      case Tok::LParen: {
        next();
        return parse_group();
      }
      case Tok::Docs: {
        return q::docs(next().text);
      }
      case Tok::FieldPrefix: {
        Token prefix = next();
        Tok k = peek().kind;
        if (k != Tok::LParen && k != Tok::Phrase && k != Tok::Bare)
          throw Error(Errc::DanglingOperator, std::string(field_name(prefix.field)) +
                                                  ": without operand at offset " +
                                                  std::to_string(prefix.offset));
        scopes_.push_back(prefix.field);
        QueryNode operand = (k == Tok::LParen) ? (next(), parse_group()) : parse_unit();
        scopes_.pop_back();
        if (prefix.field == Field::year) return operand;
        if (prefix.exact) mark_exact(operand);
        return q::scope(prefix.field, std::move(operand));
      }
      case Tok::Phrase: {
        Token tok = next();
        if (tok.text.find_first_not_of(" \t\r\n") == std::string::npos)
          throw Error(Errc::EmptyPhrase, "at offset " + std::to_string(tok.offset));
        if (in_year_scope()) return year_term(tok);
        return q::phrase(std::move(tok.text));
      }
      case Tok::Bare: {
        Token tok = next();
        if (in_year_scope()) return year_term(tok);
        return q::word(std::move(tok.text));
      }
      case Tok::RParen:
      case Tok::And:
      case Tok::Or:
      case Tok::End:
        throw Error(Errc::DanglingOperator, "operand expected at offset " + std::to_string(t.offset));
    }
    throw Error(Errc::DanglingOperator, "operand expected");
  }

  bool in_year_scope() const { return !scopes_.empty() && scopes_.back() == Field::year; }

  static QueryNode year_term(const Token& tok) {
    auto y = parse_year_form(tok.text);
    if (!y) throw Error(Errc::MalformedYear, "'" + tok.text + "' at offset " + std::to_string(tok.offset));
    return *y;
  }

  static void mark_exact(QueryNode& n) {
    std::visit(
        [](auto& alt) {
          using T = std::decay_t<decltype(alt)>;
          if constexpr (std::is_same_v<T, Phrase>) alt.exact = true;
          else if constexpr (std::is_same_v<T, FieldScope> || std::is_same_v<T, Not>) mark_exact(*alt.child);
          else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>)
            for (auto& c : alt.children) mark_exact(c);
        },
        n.v);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Field> scopes_;
};

}  // namespace detail

inline QueryNode parse(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw Error(Errc::EmptyQuery, "query is empty");
  return detail::Parser(detail::lex(text)).parse_top();
}

namespace detail {

inline QueryNode normalize_in(const QueryNode& n, std::optional<Field> scope) {
  return std::visit(
      [&](const auto& alt) -> QueryNode {
        using T = std::decay_t<decltype(alt)>;
        if constexpr (std::is_same_v<T, Phrase> || std::is_same_v<T, Word>) {
          return q::scope(scope.value_or(Field::full), alt);
        } else if constexpr (std::is_same_v<T, FieldScope>) {
          return normalize_in(*alt.child, alt.field);
        } else if constexpr (std::is_same_v<T, DocsRef> || std::is_same_v<T, YearRange>) {
          return alt;
        } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
          std::vector<QueryNode> flat;
          for (const auto& c : alt.children) {
            QueryNode nc = normalize_in(c, scope);
            if (nc.is<T>()) {
              for (auto& gc : nc.as<T>().children) flat.push_back(std::move(gc));
            } else {
              flat.push_back(std::move(nc));
            }
          }
          if (flat.size() == 1) return std::move(flat.front());
          return T{std::move(flat)};
        } else {  // Not
          QueryNode inner = normalize_in(*alt.child, scope);
          if (inner.is<Not>()) return *inner.as<Not>().child;
          return q::negate(std::move(inner));
        }
      },
      n.v);
}

inline std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

inline std::string print(const QueryNode& n);

inline std::string print_group(const QueryNode& n) {
  if (n.is<And>() || n.is<Or>()) return "(" + print(n) + ")";
  return print(n);
}

inline std::string print(const QueryNode& n) {
  return std::visit(
      [&](const auto& alt) -> std::string {
        using T = std::decay_t<decltype(alt)>;
        if constexpr (std::is_same_v<T, Phrase>) {
          return quote(alt.text);
        } else if constexpr (std::is_same_v<T, Word>) {
          return alt.text;
        } else if constexpr (std::is_same_v<T, FieldScope>) {
          bool exact = alt.child->template is<Phrase>() && alt.child->template as<Phrase>().exact;
          return (exact ? "=" : "") + std::string(field_name(alt.field)) + ":" + print_group(*alt.child);
        } else if constexpr (std::is_same_v<T, DocsRef>) {
          return "docs(library/" + alt.key + ")";
        } else if constexpr (std::is_same_v<T, YearRange>) {
          if (alt.first == alt.last) return "year:" + std::to_string(alt.first);
          return "year:" + std::to_string(alt.first) + "-" + std::to_string(alt.last);
        } else if constexpr (std::is_same_v<T, And>) {
          std::string out;
          for (std::size_t i = 0; i < alt.children.size(); ++i) {
            if (i) out += " AND ";
            const QueryNode& c = alt.children[i];
            out += c.is<Or>() || c.is<And>() ? "(" + print(c) + ")" : print(c);
          }
          return out;
        } else if constexpr (std::is_same_v<T, Or>) {
          std::string out;
          for (std::size_t i = 0; i < alt.children.size(); ++i) {
            if (i) out += " OR ";
            const QueryNode& c = alt.children[i];
            out += c.is<Or>() ? "(" + print(c) + ")" : print(c);
          }
          return out;
        } else {
          return "NOT " + print_group(*alt.child);
        }
      },
      n.v);
}

}  // namespace detail

/// Flattens nested And/Or, removes double negation, and pushes field scopes
/// down so every Phrase/Word sits directly under one FieldScope (unscoped
/// terms get `full`). Library references and year ranges shed any scope.
inline QueryNode normalize(const QueryNode& n) { return detail::normalize_in(n, std::nullopt); }

/// Canonical text; parse(serialize(n)) == normalize(n) for valid n.
inline std::string serialize(const QueryNode& n) { return detail::print(normalize(n)); }

enum class IssueKind {
  DocsRefInsideFieldScope,
  ComplementWarning,
  YearTermUnderNonYearField,
  NonYearTermUnderYearField,
  DegenerateGroup,
  EmptyPhraseText,
  InvalidYearRange,
};

enum class Severity { Warning, Error };

struct Issue {
  IssueKind kind;
  Severity severity;
  std::string detail;
  bool operator==(const Issue&) const = default;
};

inline std::string_view issue_name(IssueKind k) {
  switch (k) {
    case IssueKind::DocsRefInsideFieldScope: return "DocsRefInsideFieldScope";
    case IssueKind::ComplementWarning: return "ComplementWarning";
    case IssueKind::YearTermUnderNonYearField: return "YearTermUnderNonYearField";
    case IssueKind::NonYearTermUnderYearField: return "NonYearTermUnderYearField";
    case IssueKind::DegenerateGroup: return "DegenerateGroup";
    case IssueKind::EmptyPhraseText: return "EmptyPhraseText";
    case IssueKind::InvalidYearRange: return "InvalidYearRange";
  }
  return "Unknown";
}

inline std::vector<Issue> validate(const QueryNode& root) {
  std::vector<Issue> issues;
  if (root.is<Not>())
    issues.push_back({IssueKind::ComplementWarning, Severity::Warning,
                      "top-level NOT selects the complement of the whole corpus"});

  auto walk = [&](auto&& self, const QueryNode& n, std::optional<Field> scope) -> void {
    std::visit(
        [&](const auto& alt) {
          using T = std::decay_t<decltype(alt)>;
          if constexpr (std::is_same_v<T, Phrase>) {
            if (alt.text.find_first_not_of(" \t\r\n") == std::string::npos)
              issues.push_back({IssueKind::EmptyPhraseText, Severity::Error, "phrase is empty"});
            if (scope == Field::year)
              issues.push_back({IssueKind::NonYearTermUnderYearField, Severity::Error, alt.text});
          } else if constexpr (std::is_same_v<T, Word>) {
            if (scope == Field::year)
              issues.push_back({IssueKind::NonYearTermUnderYearField, Severity::Error, alt.text});
          } else if constexpr (std::is_same_v<T, FieldScope>) {
            self(self, *alt.child, alt.field);
          } else if constexpr (std::is_same_v<T, DocsRef>) {
            if (scope)
              issues.push_back({IssueKind::DocsRefInsideFieldScope, Severity::Error,
                                "docs(library/" + alt.key + ") under " + std::string(field_name(*scope)) + ":"});
          } else if constexpr (std::is_same_v<T, YearRange>) {
            if (alt.first > alt.last || alt.first < kMinYear || alt.last > kMaxYear)
              issues.push_back({IssueKind::InvalidYearRange, Severity::Error,
                                std::to_string(alt.first) + "-" + std::to_string(alt.last)});
            if (scope && *scope != Field::year)
              issues.push_back({IssueKind::YearTermUnderNonYearField, Severity::Warning,
                                "year filter under " + std::string(field_name(*scope)) + ":"});
          } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
            if (alt.children.size() < 2)
              issues.push_back({IssueKind::DegenerateGroup, Severity::Error, "group with fewer than two operands"});
            for (const auto& c : alt.children) self(self, c, scope);
          } else {
            self(self, *alt.child, scope);
          }
        },
        n.v);
  };
  walk(walk, root, std::nullopt);
  return issues;
}

inline bool has_errors(const std::vector<Issue>& issues) {
  return std::any_of(issues.begin(), issues.end(),
                     [](const Issue& i) { return i.severity == Severity::Error; });
}

/// Rewrites DocsRef keys through `mapping`; keys not in the mapping are kept.
template <typename Map>
QueryNode rebind_docs_refs(const QueryNode& n, const Map& mapping) {
  return std::visit(
      [&](const auto& alt) -> QueryNode {
        using T = std::decay_t<decltype(alt)>;
        if constexpr (std::is_same_v<T, DocsRef>) {
          auto it = mapping.find(alt.key);
          return it == mapping.end() ? QueryNode(alt) : q::docs(it->second);
        } else if constexpr (std::is_same_v<T, FieldScope>) {
          return q::scope(alt.field, rebind_docs_refs(*alt.child, mapping));
        } else if constexpr (std::is_same_v<T, Not>) {
          return q::negate(rebind_docs_refs(*alt.child, mapping));
        } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
          T out;
          for (const auto& c : alt.children) out.children.push_back(rebind_docs_refs(c, mapping));
          return out;
        } else {
          return alt;
        }
      },
      n.v);
}

/// All library keys referenced anywhere in the query.
inline std::vector<std::string> docs_refs(const QueryNode& n) {
  std::vector<std::string> keys;
  auto walk = [&](auto&& self, const QueryNode& x) -> void {
    std::visit(
        [&](const auto& alt) {
          using T = std::decay_t<decltype(alt)>;
          if constexpr (std::is_same_v<T, DocsRef>) keys.push_back(alt.key);
          else if constexpr (std::is_same_v<T, FieldScope> || std::is_same_v<T, Not>) self(self, *alt.child);
          else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>)
            for (const auto& c : alt.children) self(self, c);
        },
        x.v);
  };
  walk(walk, n);
  return keys;
}

}  // namespace bibcurate
