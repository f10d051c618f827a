// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// Small text utilities shared by salience extraction, ladder parsing and
// caption validation. Everything works on UTF-8 bytes; only ASCII letters
// are case-folded. Offsets are byte offsets into the original string.

#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ladderkit::text {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

/// Collapses whitespace runs to one space and trims both ends.
inline std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

/// Lowercase + whitespace-normalized form used for association strings.
inline std::string canonical(std::string_view s) { return to_lower(normalize_whitespace(s)); }

namespace detail {

// Length in bytes of a Unicode punctuation sequence starting at i (general
// punctuation block U+2010..U+205E, which covers dashes and curly quotes), or 0.
inline std::size_t unicode_punct_len(std::string_view s, std::size_t i) {
  if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2) {
    const auto b1 = static_cast<unsigned char>(s[i + 1]);
    const auto b2 = static_cast<unsigned char>(s[i + 2]);
    if ((b1 == 0x80 && b2 >= 0x90) || (b1 == 0x81 && b2 <= 0x9E)) return 3;
  }
  return 0;
}

inline bool is_curly_apostrophe(std::string_view s, std::size_t i) {
  return i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
         static_cast<unsigned char>(s[i + 1]) == 0x80 && static_cast<unsigned char>(s[i + 2]) == 0x99;
}

}  // namespace detail

/// Returns the byte length of a word character at i (alnum or a non-punctuation
/// UTF-8 sequence), or 0 if s[i] does not start a word character.
inline std::size_t word_char_len(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c < 0x80) return std::isalnum(c) ? 1 : 0;
  if (detail::unicode_punct_len(s, i) != 0) return 0;
  std::size_t n = 1;
  while (i + n < s.size() && (static_cast<unsigned char>(s[i + n]) & 0xC0) == 0x80) ++n;
  return n;
}

/// Byte length of an in-word joiner (hyphen or apostrophe) at i, else 0.
inline std::size_t joiner_len(std::string_view s, std::size_t i) {
  if (s[i] == '-' || s[i] == '\'') return 1;
  if (detail::is_curly_apostrophe(s, i)) return 3;
  return 0;
}

struct WordToken {
  std::string text;
  std::size_t offset = 0;
};

/// Splits into maximal runs of word characters. Hyphens and apostrophes are
/// kept when they sit between two word characters ("well-lit", "journey's").
inline std::vector<WordToken> tokenize_words(std::string_view s) {
  std::vector<WordToken> out;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t w = word_char_len(s, i);
    if (w == 0) {
      std::size_t p = detail::unicode_punct_len(s, i);
      i += p ? p : 1;
      continue;
    }
    const std::size_t start = i;
    i += w;
    while (i < s.size()) {
      if ((w = word_char_len(s, i)) != 0) {
        i += w;
        continue;
      }
      const std::size_t j = joiner_len(s, i);
      if (j != 0 && i + j < s.size() && word_char_len(s, i + j) != 0) {
        i += j;
        continue;
      }
      break;
    }
    out.push_back({std::string(s.substr(start, i - start)), start});
  }
  return out;
}

/// Whitespace-delimited tokens with leading/trailing punctuation stripped;
/// tokens that are pure punctuation are dropped.
inline std::vector<std::string> stripped_whitespace_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    const auto words = tokenize_words(s.substr(start, i - start));
    if (words.empty()) continue;
    const std::size_t first = words.front().offset;
    const std::size_t last = words.back().offset + words.back().text.size();
    out.emplace_back(s.substr(start + first, last - first));
  }
  return out;
}

/// Drops a trailing possessive ('s, ’s, or a bare apostrophe).
inline std::string strip_possessive(std::string_view w) {
  auto ends_with = [&](std::string_view suf) {
    return w.size() >= suf.size() && w.substr(w.size() - suf.size()) == suf;
  };
  for (std::string_view suf : {std::string_view("'s"), std::string_view("\xE2\x80\x99s"), std::string_view("'"),
                               std::string_view("\xE2\x80\x99")}) {
    if (ends_with(suf) && w.size() > suf.size()) return std::string(w.substr(0, w.size() - suf.size()));
  }
  return std::string(w);
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace ladderkit::text
