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
#include "semfence/marker.hpp"

#include <algorithm>
#include <optional>

#include "semfence/error.hpp"

namespace semfence {

std::string open_marker(int index) {
  return "[sep" + std::to_string(index) + "]";
}

std::string close_marker(int index) {
  return "[/sep" + std::to_string(index) + "]";
}

std::vector<std::string> marker_tokens(int component_count) {
  std::vector<std::string> tokens;
  tokens.reserve(static_cast<std::size_t>(component_count) * 2);
  for (int n = 0; n < component_count; ++n) {
    tokens.push_back(open_marker(n));
    tokens.push_back(close_marker(n));
  }
  return tokens;
}

namespace {

struct MarkerToken {
  bool closer = false;
  int index = 0;
  std::size_t length = 0;
};

std::optional<MarkerToken> marker_at(std::string_view s, std::size_t i) {
  if (i >= s.size() || s[i] != '[') return std::nullopt;
  std::size_t j = i + 1;
  bool closer = false;
  if (j < s.size() && s[j] == '/') {
    closer = true;
    ++j;
  }
  if (s.compare(j, 3, "sep") != 0) return std::nullopt;
  j += 3;
  const std::size_t digits_begin = j;
  while (j < s.size() && is_ascii_digit(s[j]) && j - digits_begin < 9) ++j;
  if (j == digits_begin || j >= s.size() || s[j] != ']') return std::nullopt;
  MarkerToken token;
  token.closer = closer;
  token.index = std::stoi(std::string(s.substr(digits_begin, j - digits_begin)));
  token.length = j + 1 - i;
  return token;
}

struct SideSegment {
  Span span;
  int index = 0;
};

// Gathers one side's segments, sorted by start, and rejects bad spans.
std::vector<SideSegment> side_segments(
    std::string_view text, const std::vector<ComponentAlignment>& alignments,
    bool nl_side) {
  std::vector<SideSegment> segments;
  for (const ComponentAlignment& a : alignments) {
    const std::vector<Span>& spans = nl_side ? a.nl_segments : a.out_segments;
    if (nl_side && spans.empty()) {
      throw ValidationError("component " + std::to_string(a.index) +
                            " has no NL segments");
    }
    for (const Span& s : spans) {
      if (s.begin > s.end || s.end > text.size()) {
        throw ValidationError("component " + std::to_string(a.index) +
                              " span out of bounds");
      }
      segments.push_back({s, a.index});
    }
  }
  std::sort(segments.begin(), segments.end(),
            [](const SideSegment& a, const SideSegment& b) {
              return a.span.begin < b.span.begin ||
                     (a.span.begin == b.span.begin && a.span.end < b.span.end);
            });
  for (std::size_t i = 1; i < segments.size(); ++i) {
    if (segments[i].span.begin < segments[i - 1].span.end) {
      throw ValidationError("overlapping spans for components " +
                            std::to_string(segments[i - 1].index) + " and " +
                            std::to_string(segments[i].index));
    }
  }
  return segments;
}

std::string compose(std::string_view text,
                    const std::vector<SideSegment>& segments) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  for (const SideSegment& seg : segments) {
    const std::string_view gap = trim(text.substr(pos, seg.span.begin - pos));
    if (!gap.empty()) parts.emplace_back(gap);
    const std::string_view body = trim(slice(text, seg.span));
    std::string wrapped = open_marker(seg.index);
    if (!body.empty()) {
      wrapped += ' ';
      wrapped += body;
    }
    wrapped += ' ';
    wrapped += close_marker(seg.index);
    parts.push_back(std::move(wrapped));
    pos = seg.span.end;
  }
  const std::string_view tail = trim(text.substr(pos));
  if (!tail.empty()) parts.emplace_back(tail);
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += ' ';
    out += parts[i];
  }
  return out;
}

void validate_indices(const std::vector<ComponentAlignment>& alignments) {
  std::vector<const ComponentAlignment*> by_first_nl;
  by_first_nl.reserve(alignments.size());
  for (const ComponentAlignment& a : alignments) by_first_nl.push_back(&a);
  std::sort(by_first_nl.begin(), by_first_nl.end(),
            [](const ComponentAlignment* a, const ComponentAlignment* b) {
              const std::size_t sa =
                  a->nl_segments.empty() ? 0 : a->nl_segments.front().begin;
              const std::size_t sb =
                  b->nl_segments.empty() ? 0 : b->nl_segments.front().begin;
              return sa < sb;
            });
  for (std::size_t i = 0; i < by_first_nl.size(); ++i) {
    if (by_first_nl[i]->index != static_cast<int>(i)) {
      throw ValidationError(
          "component indices must be consecutive from 0 in NL order; found " +
          std::to_string(by_first_nl[i]->index) + " at position " +
          std::to_string(i));
    }
  }
}

}  // namespace

MarkedPair mark_pair(std::string_view nl, std::string_view out,
                     const std::vector<ComponentAlignment>& alignments) {
  if (alignments.empty()) {
    return {std::string(nl), std::string(out)};
  }
  validate_indices(alignments);
  const std::vector<SideSegment> nl_segments =
      side_segments(nl, alignments, /*nl_side=*/true);
  const std::vector<SideSegment> out_segments =
      side_segments(out, alignments, /*nl_side=*/false);
  return {compose(nl, nl_segments), compose(out, out_segments)};
}

StripResult strip_markers(std::string_view text) {
  StripResult result;
  bool pending_space = false;
  const auto append_text = [&](std::string_view chunk) {
    for (char c : chunk) {
      if (is_ascii_space(c)) {
        pending_space = !result.plain.empty();
        continue;
      }
      if (pending_space) {
        result.plain += ' ';
        pending_space = false;
      }
      result.plain += c;
    }
  };
  const auto next_char_pos = [&]() {
    return result.plain.size() + (pending_space ? 1 : 0);
  };

  struct Open {
    int index;
    std::size_t start;
  };
  std::optional<Open> open;
  std::size_t i = 0;
  std::size_t text_start = 0;
  while (i < text.size()) {
    const auto token = marker_at(text, i);
    if (!token) {
      ++i;
      continue;
    }
    append_text(text.substr(text_start, i - text_start));
    if (!token->closer) {
      if (open) {
        result.diagnostics.push_back("opener " + open_marker(token->index) +
                                     " while " + open_marker(open->index) +
                                     " is still open");
      } else {
        open = Open{token->index, next_char_pos()};
      }
    } else {
      if (!open) {
        result.diagnostics.push_back("closer " + close_marker(token->index) +
                                     " without matching opener");
      } else if (open->index != token->index) {
        result.diagnostics.push_back(
            "mismatched pair: " + open_marker(open->index) + " closed by " +
            close_marker(token->index));
        open.reset();
      } else {
        const std::size_t end = result.plain.size();
        const std::size_t begin = std::min(open->start, end);
        result.segments.emplace_back(open->index, Span{begin, end});
        open.reset();
      }
    }
    i += token->length;
    text_start = i;
  }
  append_text(text.substr(text_start));
  if (open) {
    result.diagnostics.push_back("unclosed " + open_marker(open->index));
  }
  return result;
}

MarkerDiagnostics validate_markers(std::string_view text) {
  MarkerDiagnostics diag;
  std::vector<int> first_appearance;
  const auto note_index = [&](int n) {
    if (std::find(first_appearance.begin(), first_appearance.end(), n) ==
        first_appearance.end()) {
      first_appearance.push_back(n);
    }
  };
  int open = -1;  // component index of the pending opener, -1 when none
  std::size_t i = 0;
  while (i < text.size()) {
    const auto token = marker_at(text, i);
    if (!token) {
      ++i;
      continue;
    }
    note_index(token->index);
    if (!token->closer) {
      if (open >= 0) {
        diag.issues.push_back("nesting: opener " + open_marker(token->index) +
                              " inside " + open_marker(open));
      } else {
        open = token->index;
      }
    } else if (open < 0) {
      diag.issues.push_back("closer " + close_marker(token->index) +
                            " without matching opener");
    } else {
      if (open != token->index) {
        diag.issues.push_back("mismatched pair: " + open_marker(open) +
                              " closed by " + close_marker(token->index));
      }
      open = -1;
    }
    i += token->length;
  }
  if (open >= 0) diag.issues.push_back("unclosed " + open_marker(open));
  for (std::size_t n = 0; n < first_appearance.size(); ++n) {
    if (first_appearance[n] != static_cast<int>(n)) {
      diag.issues.push_back(
          "component indices not contiguous from 0 in first-appearance order");
      break;
    }
  }
  diag.balanced = diag.issues.empty();
  return diag;
}

}  // namespace semfence
