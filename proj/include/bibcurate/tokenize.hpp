#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bibcurate {

/// One indexed token. Plain parts have span 1; the joined form of a
/// hyphenated word sits at its first part's position and spans all parts.
struct Token {
  std::string text;
  std::uint32_t position = 0;
  std::uint32_t span = 1;
  bool operator==(const Token&) const = default;
};

namespace detail {
// Bytes >= 0x80 are treated as word characters so UTF-8 words stay whole.
inline bool is_word_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z');
}
inline char lower_ascii(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }
}  // namespace detail

/// Lower-cases and splits on non-alphanumeric characters. Runs joined by a
/// single '-' form a hyphen group, which also yields the concatenation of its
/// parts ("Fermi-Pasta" -> fermi, pasta, fermipasta).
inline std::vector<Token> tokenize(std::string_view text, std::uint32_t base = 0) {
  std::vector<Token> out;
  std::uint32_t pos = base;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!detail::is_word_byte(text[i])) {
      ++i;
      continue;
    }
    std::uint32_t group_start = pos;
    std::uint32_t parts = 0;
    std::string joined;
    for (;;) {
      std::string part;
      while (i < n && detail::is_word_byte(text[i])) part += detail::lower_ascii(text[i++]);
      joined += part;
      out.push_back({std::move(part), pos++, 1});
      ++parts;
      if (i + 1 < n && text[i] == '-' && detail::is_word_byte(text[i + 1])) {
        ++i;
        continue;
      }
      break;
    }
    if (parts > 1) out.push_back({std::move(joined), group_start, parts});
  }
  return out;
}

/// The plain parts of a text, in order; used for the words of a query phrase.
inline std::vector<std::string> token_parts(std::string_view text) {
  std::vector<std::string> words;
  for (auto& t : tokenize(text))
    if (t.span == 1) words.push_back(std::move(t.text));
  return words;
}

/// Position one past the last token, for laying out multi-valued fields.
inline std::uint32_t end_position(const std::vector<Token>& toks, std::uint32_t base) {
  std::uint32_t end = base;
  for (const auto& t : toks) end = std::max(end, t.position + t.span);
  return end;
}

}  // namespace bibcurate
