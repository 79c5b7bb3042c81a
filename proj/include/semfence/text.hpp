/* Copyright 2024 The Semfence Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef SEMFENCE_TEXT_HPP
#define SEMFENCE_TEXT_HPP

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace semfence {

// Half-open byte range [begin, end) into some string.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin >= end; }
  auto operator<=>(const Span&) const = default;
};

inline std::string_view slice(std::string_view s, Span span) {
  return s.substr(span.begin, span.end - span.begin);
}

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

inline bool is_ascii_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline bool is_ascii_alnum(char c) {
  return is_ascii_alpha(c) || is_ascii_digit(c);
}

// Identifier characters as they appear in schema names and SQL references.
// Bytes >= 0x80 (UTF-8 continuations and lead bytes) count as word material.
inline bool is_ident_char(char c) {
  return is_ascii_alnum(c) || c == '_' || static_cast<unsigned char>(c) >= 0x80;
}

inline char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string to_lower(std::string_view s);

// True iff a == b ignoring ASCII case.
bool iequals(std::string_view a, std::string_view b);

// Byte length of the UTF-8 code point starting at s[i] (clamped to the
// string end; malformed lead bytes advance by one).
std::size_t utf8_len(std::string_view s, std::size_t i);

std::string_view trim(std::string_view s);

// Collapses whitespace runs to single spaces and trims both ends.
std::string normalize_whitespace(std::string_view s);

// Splits into lines, tolerating a missing final newline and CRLF.
std::vector<std::string> split_lines(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace semfence

#endif  // SEMFENCE_TEXT_HPP
