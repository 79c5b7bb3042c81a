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
#include "semfence/preprocess.hpp"

#include <vector>

#include "semfence/error.hpp"
#include "semfence/text.hpp"

namespace semfence {

namespace {

bool is_identish(char c) { return is_ident_char(c) || c == '*'; }

// Quoted literal spans (quote chars included). Single and double quotes both
// delimit literals; backslash escapes are honored. Throws on open quotes.
std::vector<Span> quoted_spans(std::string_view s) {
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < s.size()) {
    const char q = s[i];
    if (q != '\'' && q != '"') {
      ++i;
      continue;
    }
    const std::size_t start = i++;
    bool closed = false;
    while (i < s.size()) {
      if (s[i] == '\\' && i + 1 < s.size()) {
        i += 2;
        continue;
      }
      if (s[i] == q) {
        closed = true;
        ++i;
        break;
      }
      ++i;
    }
    if (!closed) {
      throw PreprocessError("unbalanced quote at offset " +
                            std::to_string(start));
    }
    spans.push_back({start, i});
  }
  return spans;
}

// Positions inside numeric literals (so their dots are left alone).
std::vector<bool> numeric_mask(std::string_view s) {
  std::vector<bool> mask(s.size(), false);
  std::size_t i = 0;
  while (i < s.size()) {
    const bool digit_start =
        is_ascii_digit(s[i]) &&
        (i == 0 || (!is_ident_char(s[i - 1]) && s[i - 1] != '.'));
    const bool dot_start =
        s[i] == '.' && i + 1 < s.size() && is_ascii_digit(s[i + 1]) &&
        (i == 0 || (!is_ident_char(s[i - 1]) && s[i - 1] != '.'));
    if (!digit_start && !dot_start) {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool seen_dot = false;
    if (dot_start) {
      seen_dot = true;
      ++j;
    }
    while (j < s.size() && is_ascii_digit(s[j])) ++j;
    if (!seen_dot && j < s.size() && s[j] == '.' && j + 1 < s.size() &&
        is_ascii_digit(s[j + 1])) {
      ++j;
      while (j < s.size() && is_ascii_digit(s[j])) ++j;
    }
    if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
      std::size_t k = j + 1;
      if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
      if (k < s.size() && is_ascii_digit(s[k])) {
        j = k;
        while (j < s.size() && is_ascii_digit(s[j])) ++j;
      }
    }
    for (std::size_t p = i; p < j; ++p) mask[p] = true;
    i = j;
  }
  return mask;
}

// Surrounds selected characters with single spaces, never doubling one.
std::string space_out(std::string_view s,
                      const std::vector<bool>& spaced_here) {
  std::string out;
  out.reserve(s.size() + 8);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!spaced_here[i]) {
      out.push_back(s[i]);
      continue;
    }
    if (!out.empty() && out.back() != ' ') out.push_back(' ');
    out.push_back(s[i]);
    if (i + 1 < s.size() && s[i + 1] != ' ' && !spaced_here[i + 1]) {
      out.push_back(' ');
    } else if (i + 1 < s.size() && spaced_here[i + 1]) {
      out.push_back(' ');
    }
  }
  return out;
}

std::string space_underscores(std::string_view s) {
  std::vector<bool> targets(s.size(), false);
  for (std::size_t i = 0; i < s.size(); ++i) targets[i] = s[i] == '_';
  return space_out(s, targets);
}

std::string space_underscores_and_dots(std::string_view s) {
  const std::vector<bool> numeric = numeric_mask(s);
  std::vector<bool> targets(s.size(), false);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '_') {
      targets[i] = true;
    } else if (s[i] == '.' && !numeric[i]) {
      const bool left = i > 0 && is_identish(s[i - 1]);
      const bool right = i + 1 < s.size() && is_identish(s[i + 1]);
      targets[i] = left || right;
    }
  }
  return space_out(s, targets);
}

enum class KeywordDirection { Expand, Contract };

std::string rewrite_keywords(std::string_view s, const KeywordMap& keywords,
                             KeywordDirection dir) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_ident_char(s[i])) {
      out.push_back(s[i]);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_ident_char(s[j])) ++j;
    const std::string_view word = s.substr(i, j - i);
    const std::string* replacement = dir == KeywordDirection::Expand
                                         ? keywords.expansion_of(word)
                                         : keywords.abbreviation_of(word);
    if (replacement != nullptr) {
      out.append(*replacement);
    } else {
      out.append(word);
    }
    i = j;
  }
  return out;
}

// Removes the single spaces preprocess_sql inserted around '_' and around
// identifier-flanked '.'.
std::string collapse_spacing(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '_') {
      if (!out.empty() && out.back() == ' ') out.pop_back();
      out.push_back('_');
      if (i + 1 < s.size() && s[i + 1] == ' ') ++i;
      ++i;
      continue;
    }
    if (c == '.') {
      const bool left = out.size() >= 2 && out.back() == ' ' &&
                        is_identish(out[out.size() - 2]);
      const bool right = i + 1 < s.size() && s[i + 1] == ' ' &&
                         i + 2 < s.size() && is_identish(s[i + 2]);
      if (left && right) {
        out.pop_back();
        out.push_back('.');
        i += 2;  // skip the trailing space
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

// Applies fn to the stretches outside quoted literals; literals pass through
// byte-identical.
template <typename Fn>
std::string map_outside_quotes(std::string_view s, Fn&& fn) {
  const std::vector<Span> quotes = quoted_spans(s);
  std::string out;
  out.reserve(s.size() + 16);
  std::size_t pos = 0;
  for (const Span& q : quotes) {
    out += fn(s.substr(pos, q.begin - pos));
    out.append(s.substr(q.begin, q.end - q.begin));
    pos = q.end;
  }
  out += fn(s.substr(pos));
  return out;
}

}  // namespace

KeywordMap::KeywordMap()
    : pairs_{{"avg", "average"}, {"desc", "descending"}, {"asc", "ascending"}} {
}

KeywordMap::KeywordMap(std::vector<std::pair<std::string, std::string>> pairs)
    : pairs_(std::move(pairs)) {
  validate();
}

void KeywordMap::validate() const {
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    for (std::size_t j = 0; j < pairs_.size(); ++j) {
      if (i != j && iequals(pairs_[i].second, pairs_[j].second)) {
        throw ValidationError("keyword map: expansion '" + pairs_[i].second +
                              "' is shared by multiple abbreviations");
      }
      if (i != j && iequals(pairs_[i].first, pairs_[j].first)) {
        throw ValidationError("keyword map: duplicate abbreviation '" +
                              pairs_[i].first + "'");
      }
      if (i != j && iequals(pairs_[i].second, pairs_[j].first)) {
        throw ValidationError("keyword map: expansion '" + pairs_[i].second +
                              "' collides with abbreviation '" +
                              pairs_[j].first + "'");
      }
    }
  }
}

KeywordMap KeywordMap::load_tsv(const std::string& path) {
  const std::string data = read_file(path);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::size_t lineno = 0;
  for (const std::string& line : split_lines(data)) {
    ++lineno;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::size_t tab = t.find('\t');
    if (tab == std::string_view::npos) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected two tab-separated columns");
    }
    pairs.emplace_back(std::string(trim(t.substr(0, tab))),
                       std::string(trim(t.substr(tab + 1))));
  }
  return KeywordMap(std::move(pairs));
}

const std::string* KeywordMap::expansion_of(std::string_view word) const {
  for (const auto& [abbrev, expanded] : pairs_) {
    if (iequals(abbrev, word)) return &expanded;
  }
  return nullptr;
}

const std::string* KeywordMap::abbreviation_of(std::string_view word) const {
  for (const auto& [abbrev, expanded] : pairs_) {
    if (iequals(expanded, word)) return &abbrev;
  }
  return nullptr;
}

const KeywordMap& default_keyword_map() {
  static const KeywordMap map;
  return map;
}

std::string preprocess_schema(std::string_view text) {
  return space_underscores(text);
}

std::string preprocess_sql(std::string_view sql, const KeywordMap& keywords) {
  return map_outside_quotes(sql, [&](std::string_view seg) {
    return rewrite_keywords(space_underscores_and_dots(seg), keywords,
                            KeywordDirection::Expand);
  });
}

std::string postprocess_sql(std::string_view text, const KeywordMap& keywords) {
  return map_outside_quotes(text, [&](std::string_view seg) {
    return collapse_spacing(
        rewrite_keywords(seg, keywords, KeywordDirection::Contract));
  });
}

}  // namespace semfence
