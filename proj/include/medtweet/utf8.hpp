#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "medtweet/errors.hpp"
#include "medtweet/strings.hpp"

namespace medtweet::utf8 {

// Byte length of the UTF-8 sequence starting at a lead byte; 0 if invalid lead.
inline std::size_t seq_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) return 2;
  if ((lead & 0xF0) == 0xE0) return 3;
  if ((lead & 0xF8) == 0xF0) return 4;
  return 0;
}

inline bool is_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

// Structural validation: lead/continuation byte layout, no overlong checks.
inline bool is_valid(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t n = seq_length(static_cast<unsigned char>(s[i]));
    if (n == 0 || i + n > s.size()) return false;
    for (std::size_t k = 1; k < n; ++k)
      if (!is_continuation(static_cast<unsigned char>(s[i + k]))) return false;
    i += n;
  }
  return true;
}

// Number of code points; input must be valid UTF-8.
inline std::size_t length(std::string_view s) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t n = seq_length(static_cast<unsigned char>(s[i]));
    if (n == 0) throw invalid_input("invalid UTF-8 byte sequence");
    i += n;
    ++count;
  }
  return count;
}

// Byte offset of the code point at index cp, or npos when cp == length(s).
inline std::size_t byte_offset(std::string_view s, std::size_t cp) {
  std::size_t i = 0, seen = 0;
  while (i < s.size() && seen < cp) {
    std::size_t n = seq_length(static_cast<unsigned char>(s[i]));
    if (n == 0) throw invalid_input("invalid UTF-8 byte sequence");
    i += n;
    ++seen;
  }
  if (seen < cp) throw invalid_input("code-point offset past end of string");
  return i;
}

// Substring by code-point range [start, end).
inline std::string_view substr(std::string_view s, std::size_t start, std::size_t end) {
  std::size_t b = byte_offset(s, start);
  std::size_t e = byte_offset(s, end);
  return s.substr(b, e - b);
}

struct CharSpan {
  std::size_t start = 0;  // code points, inclusive
  std::size_t end = 0;    // code points, exclusive
};

// First case-insensitive (ASCII fold) occurrence of needle in haystack,
// as a code-point span. Empty result when absent.
inline std::optional<CharSpan> find_fold(std::string_view haystack, std::string_view needle) {
  if (needle.empty() || haystack.empty()) return std::nullopt;
  std::string h = ascii_fold(haystack);
  std::string n = ascii_fold(needle);
  std::size_t byte_pos = h.find(n);
  if (byte_pos == std::string::npos) return std::nullopt;
  std::size_t start = length(haystack.substr(0, byte_pos));
  return CharSpan{start, start + length(needle)};
}

}  // namespace medtweet::utf8
