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
#include "semfence/tokenizer.hpp"

#include <algorithm>
#include <json.hpp>

#include "semfence/error.hpp"
#include "semfence/parallel.hpp"
#include "semfence/preprocess.hpp"

namespace semfence {

namespace {

constexpr std::size_t kNoSpace = static_cast<std::size_t>(-1);

MarkerConvention parse_convention(std::string_view name) {
  if (name == "word_start") return MarkerConvention::WordStart;
  if (name == "continuation") return MarkerConvention::Continuation;
  if (name == "none") return MarkerConvention::None;
  throw ParseError("unknown tokenizer convention: " + std::string(name));
}

std::string default_marker(MarkerConvention convention) {
  switch (convention) {
    case MarkerConvention::WordStart:
      return "\xe2\x96\x81";  // U+2581 lower one-eighth block
    case MarkerConvention::Continuation:
      return "##";
    case MarkerConvention::None:
      return "";
  }
  return "";
}

bool whitespace_only(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return is_ascii_space(c); });
}

}  // namespace

SubwordVocabulary::SubwordVocabulary() = default;

SubwordVocabulary::SubwordVocabulary(std::vector<std::string> tokens,
                                     MarkerConvention convention,
                                     std::string marker,
                                     std::vector<std::string> specials)
    : convention_(convention), marker_(std::move(marker)) {
  if (marker_.empty()) marker_ = default_marker(convention_);
  for (const std::string& t : tokens) insert_with_fallback_chars(t);
  if (!marker_.empty()) insert_with_fallback_chars(marker_);
  for (const std::string& s : specials) {
    if (s.empty()) continue;
    insert_with_fallback_chars(s);
    if (special_set_.insert(s).second) specials_.push_back(s);
  }
  std::stable_sort(specials_.begin(), specials_.end(),
                   [](const std::string& a, const std::string& b) {
                     return a.size() > b.size();
                   });
}

void SubwordVocabulary::insert_with_fallback_chars(const std::string& token) {
  if (token.empty()) return;
  max_token_length_ = std::max(max_token_length_, token.size());
  tokens_.insert(token);
  // Character fallback: every code point of a token is itself a token.
  std::size_t i = 0;
  while (i < token.size()) {
    const std::size_t len = utf8_len(token, i);
    if (len < token.size()) tokens_.insert(token.substr(i, len));
    i += len;
  }
}

bool SubwordVocabulary::contains(std::string_view token) const {
  return tokens_.find(std::string(token)) != tokens_.end();
}

bool SubwordVocabulary::is_special(std::string_view token) const {
  return special_set_.find(std::string(token)) != special_set_.end();
}

SubwordVocabulary SubwordVocabulary::load(const std::string& path) {
  const std::string data = read_file(path);
  const std::string_view trimmed = trim(data);
  if (!trimmed.empty() && trimmed.front() == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(data);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path + ": parse error at byte " + std::to_string(e.byte) +
                       ": " + e.what());
    }
    const nlohmann::json& vocab_obj =
        doc.contains("vocab") ? doc.at("vocab") : doc;
    std::vector<std::string> tokens;
    for (auto it = vocab_obj.begin(); it != vocab_obj.end(); ++it) {
      tokens.push_back(it.key());
    }
    MarkerConvention convention = MarkerConvention::None;
    std::string marker;
    std::vector<std::string> specials;
    if (doc.contains("metadata")) {
      const nlohmann::json& meta = doc.at("metadata");
      if (meta.contains("convention")) {
        convention = parse_convention(meta.at("convention").get<std::string>());
      }
      if (meta.contains("marker")) marker = meta.at("marker").get<std::string>();
      if (meta.contains("specials")) {
        specials = meta.at("specials").get<std::vector<std::string>>();
      }
    }
    return SubwordVocabulary(std::move(tokens), convention, std::move(marker),
                             std::move(specials));
  }

  std::vector<std::string> lines = split_lines(data);
  MarkerConvention convention = MarkerConvention::None;
  std::string marker;
  std::size_t start = 0;
  if (!lines.empty() && lines[0].rfind("#convention=", 0) == 0) {
    std::string_view header(lines[0]);
    header.remove_prefix(1);  // '#'
    std::size_t pos = 0;
    while (pos < header.size()) {
      while (pos < header.size() && header[pos] == ' ') ++pos;
      const std::size_t end = header.find(' ', pos);
      const std::string_view field =
          header.substr(pos, end == std::string_view::npos ? end : end - pos);
      const std::size_t eq = field.find('=');
      if (eq != std::string_view::npos) {
        const std::string_view key = field.substr(0, eq);
        const std::string_view value = field.substr(eq + 1);
        if (key == "convention") {
          convention = parse_convention(value);
        } else if (key == "marker") {
          marker = std::string(value);
        }
      }
      if (end == std::string_view::npos) break;
      pos = end + 1;
    }
    start = 1;
  }
  std::vector<std::string> tokens;
  for (std::size_t i = start; i < lines.size(); ++i) {
    if (!lines[i].empty()) tokens.push_back(lines[i]);
  }
  return SubwordVocabulary(std::move(tokens), convention, std::move(marker));
}

SubwordVocabulary SubwordVocabulary::augmented(
    const std::vector<std::string>& new_tokens) const {
  SubwordVocabulary out = *this;
  for (const std::string& t : new_tokens) {
    if (t.empty()) continue;
    out.insert_with_fallback_chars(t);
    if (out.special_set_.insert(t).second) out.specials_.push_back(t);
  }
  std::stable_sort(out.specials_.begin(), out.specials_.end(),
                   [](const std::string& a, const std::string& b) {
                     return a.size() > b.size();
                   });
  return out;
}

SubwordVocabulary augment_vocab(const SubwordVocabulary& vocab,
                                const std::vector<std::string>& new_tokens) {
  return vocab.augmented(new_tokens);
}

namespace {

// Tokenization scanner shared by tokenize/tokenize_pieces/audit.
class Scanner {
 public:
  Scanner(std::string_view text, const SubwordVocabulary& vocab)
      : text_(text), vocab_(vocab) {}

  std::vector<TokenPiece> run() {
    const std::size_t n = text_.size();
    std::size_t i = 0;
    while (i < n) {
      if (const std::size_t slen = special_at(i); slen > 0) {
        emit(std::string(text_.substr(i, slen)), {i, i + slen});
        i += slen;
        continue;
      }
      const char c = text_[i];
      if (is_ascii_space(c)) {
        i = handle_whitespace(i);
        continue;
      }
      const std::size_t wend = word_end(i);
      const bool dummy_mark =
          vocab_.convention() == MarkerConvention::WordStart && i == 0;
      emit_word(i, wend, dummy_mark, kNoSpace);
      i = wend;
    }
    return std::move(pieces_);
  }

 private:
  std::size_t special_at(std::size_t i) const {
    for (const std::string& s : vocab_.specials()) {
      if (text_.compare(i, s.size(), s) == 0) return s.size();
    }
    return 0;
  }

  std::size_t word_end(std::size_t i) const {
    std::size_t j = i;
    while (j < text_.size() && !is_ascii_space(text_[j]) && special_at(j) == 0) {
      ++j;
    }
    return j;
  }

  void emit(std::string piece, Span extent) {
    pieces_.push_back({std::move(piece), extent});
  }

  std::size_t handle_whitespace(std::size_t i) {
    const char c = text_[i];
    if (vocab_.convention() == MarkerConvention::WordStart && c == ' ') {
      const bool next_is_word = i + 1 < text_.size() &&
                                !is_ascii_space(text_[i + 1]) &&
                                special_at(i + 1) == 0;
      if (next_is_word && !pieces_.empty()) {
        const std::size_t wend = word_end(i + 1);
        emit_word(i + 1, wend, /*marked=*/true, /*space_pos=*/i);
        return wend;
      }
      emit(vocab_.marker(), {i, i + 1});
      return i + 1;
    }
    if (vocab_.convention() == MarkerConvention::Continuation && c == ' ') {
      // A single space between two plain words is implied by the unmarked
      // word-start piece. Specials never take part: their spacing must stay
      // literal or detokenization could not tell "x [s]" from "x[s]".
      const bool next_is_word = i + 1 < text_.size() &&
                                !is_ascii_space(text_[i + 1]) &&
                                special_at(i + 1) == 0;
      const bool prev_ok = !pieces_.empty() &&
                           !whitespace_only(pieces_.back().text) &&
                           !vocab_.is_special(pieces_.back().text);
      if (next_is_word && prev_ok) {
        return i + 1;
      }
    }
    emit(std::string(1, c), {i, i + 1});
    return i + 1;
  }

  // Greedy longest match of a vocabulary token at [pos, wend). When
  // with_marker is set, candidates are marker-prefixed surfaces.
  std::size_t longest_match(std::size_t pos, std::size_t wend,
                            bool with_marker) const {
    const std::size_t cap =
        std::min(wend - pos, vocab_.max_token_length());
    for (std::size_t len = cap; len >= 1; --len) {
      std::string candidate;
      if (with_marker) candidate = vocab_.marker();
      candidate.append(text_.substr(pos, len));
      if (vocab_.contains(candidate)) return len;
    }
    return 0;
  }

  void emit_word(std::size_t wbegin, std::size_t wend, bool marked,
                 std::size_t space_pos) {
    const MarkerConvention conv = vocab_.convention();
    std::size_t pos = wbegin;
    bool at_word_start = true;
    while (pos < wend) {
      if (conv == MarkerConvention::WordStart && at_word_start && marked) {
        const std::size_t len = longest_match(pos, wend, /*with_marker=*/true);
        if (len > 0) {
          const std::size_t ext_begin = space_pos == kNoSpace ? pos : space_pos;
          emit(vocab_.marker() + std::string(text_.substr(pos, len)),
               {ext_begin, pos + len});
          pos += len;
          at_word_start = false;
          continue;
        }
        // No marked piece fits. An absorbed space still has to surface; a
        // text-start dummy mark just falls back to plain matching.
        if (space_pos != kNoSpace) {
          emit(vocab_.marker(), {space_pos, space_pos + 1});
        }
        marked = false;
        continue;
      }
      const bool continuation_pos =
          conv == MarkerConvention::Continuation && !at_word_start;
      const std::size_t len = longest_match(pos, wend, continuation_pos);
      if (len > 0) {
        std::string piece;
        if (continuation_pos) piece = vocab_.marker();
        piece.append(text_.substr(pos, len));
        emit(std::move(piece), {pos, pos + len});
        pos += len;
      } else {
        // Single code point fallback, emitted even when absent from the
        // vocabulary so that tokenization is total. Clamped to the word end:
        // a special may start inside a malformed UTF-8 sequence.
        const std::size_t cplen = std::min(utf8_len(text_, pos), wend - pos);
        std::string piece;
        if (continuation_pos) piece = vocab_.marker();
        piece.append(text_.substr(pos, cplen));
        emit(std::move(piece), {pos, pos + cplen});
        pos += cplen;
      }
      at_word_start = false;
    }
  }

  std::string_view text_;
  const SubwordVocabulary& vocab_;
  std::vector<TokenPiece> pieces_;
};

}  // namespace

std::vector<TokenPiece> tokenize_pieces(std::string_view text,
                                        const SubwordVocabulary& vocab) {
  return Scanner(text, vocab).run();
}

std::vector<std::string> tokenize(std::string_view text,
                                  const SubwordVocabulary& vocab) {
  std::vector<TokenPiece> pieces = tokenize_pieces(text, vocab);
  std::vector<std::string> out;
  out.reserve(pieces.size());
  for (TokenPiece& p : pieces) out.push_back(std::move(p.text));
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens,
                       const SubwordVocabulary& vocab) {
  const std::string& marker = vocab.marker();
  std::string out;
  switch (vocab.convention()) {
    case MarkerConvention::None:
      for (const std::string& t : tokens) out += t;
      break;
    case MarkerConvention::WordStart:
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string& t = tokens[i];
        if (t == marker) {
          out += ' ';
        } else if (!marker.empty() && t.rfind(marker, 0) == 0) {
          if (i > 0) out += ' ';  // the text-initial mark carries no space
          out += t.substr(marker.size());
        } else {
          out += t;
        }
      }
      break;
    case MarkerConvention::Continuation:
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string& t = tokens[i];
        if (!marker.empty() && t.size() > marker.size() &&
            t.rfind(marker, 0) == 0 && !vocab.is_special(t)) {
          out += t.substr(marker.size());
          continue;
        }
        if (i > 0 && !whitespace_only(t) && !whitespace_only(tokens[i - 1]) &&
            !vocab.is_special(t) && !vocab.is_special(tokens[i - 1])) {
          out += ' ';
        }
        out += t;
      }
      break;
  }
  return out;
}

std::vector<Span> segment_semantic_units(std::string_view text) {
  std::vector<Span> units;
  const std::size_t n = text.size();
  std::size_t i = 0;
  const auto word_char = [&](std::size_t p) {
    return is_ascii_alnum(text[p]) || static_cast<unsigned char>(text[p]) >= 0x80;
  };
  while (i < n) {
    if (is_ascii_space(text[i])) {
      ++i;
      continue;
    }
    if (word_char(i)) {
      std::size_t j = i;
      while (j < n && word_char(j)) ++j;
      // camel-case splits: boundary at every lower -> upper transition
      std::size_t start = i;
      for (std::size_t p = i + 1; p < j; ++p) {
        if (text[p] >= 'A' && text[p] <= 'Z' && text[p - 1] >= 'a' &&
            text[p - 1] <= 'z') {
          units.push_back({start, p});
          start = p;
        }
      }
      units.push_back({start, j});
      i = j;
      continue;
    }
    const std::size_t len = utf8_len(text, i);
    units.push_back({i, i + len});
    i += len;
  }
  return units;
}

namespace {

std::vector<std::size_t> violation_indices(std::string_view text,
                                           const std::vector<TokenPiece>& pieces,
                                           const std::vector<Span>& units) {
  std::vector<std::size_t> violations;
  const auto overlaps = [](Span a, Span b) {
    return a.begin < b.end && b.begin < a.end;
  };
  for (std::size_t t = 0; t < pieces.size(); ++t) {
    std::size_t count = 0;
    for (const Span& u : units) {
      if (overlaps(pieces[t].extent, u)) ++count;
      if (count >= 2) break;
    }
    if (count >= 2) violations.push_back(t);
  }
  // Keyword abbreviations ("avg", "desc") are single semantic units, yet
  // chopping them up is exactly what the spelling-expansion rule repairs;
  // count those splits as violations too.
  for (const Span& u : units) {
    const std::string word = to_lower(slice(text, u));
    if (default_keyword_map().expansion_of(word) == nullptr) continue;
    std::vector<std::size_t> inside;
    for (std::size_t t = 0; t < pieces.size(); ++t) {
      if (overlaps(pieces[t].extent, u)) inside.push_back(t);
    }
    if (inside.size() >= 2) {
      violations.insert(violations.end(), inside.begin(), inside.end());
    }
  }
  std::sort(violations.begin(), violations.end());
  violations.erase(std::unique(violations.begin(), violations.end()),
                   violations.end());
  return violations;
}

std::vector<std::size_t> audit_violations(std::string_view text,
                                          const SubwordVocabulary& vocab) {
  const std::vector<TokenPiece> pieces = tokenize_pieces(text, vocab);
  const std::vector<Span> units = segment_semantic_units(text);
  return violation_indices(text, pieces, units);
}

std::string preprocess_for_audit(std::string_view text) {
  try {
    return preprocess_sql(text);
  } catch (const PreprocessError&) {
    // NL with an apostrophe etc.; the underscore rule still applies.
    return preprocess_schema(text);
  }
}

}  // namespace

TokenAudit audit(std::string_view text, const SubwordVocabulary& vocab) {
  TokenAudit result;
  result.text = std::string(text);
  std::vector<TokenPiece> pieces = tokenize_pieces(text, vocab);
  result.units = segment_semantic_units(text);
  result.violations = violation_indices(text, pieces, result.units);
  result.tokens.reserve(pieces.size());
  for (TokenPiece& p : pieces) result.tokens.push_back(std::move(p.text));
  if (!result.violations.empty()) {
    const std::string fixed = preprocess_for_audit(text);
    result.resolvable = audit_violations(fixed, vocab).empty();
  }
  return result;
}

CorpusAuditReport audit_corpus(const std::vector<std::string>& texts,
                               const SubwordVocabulary& vocab, unsigned jobs) {
  CorpusAuditReport report;
  report.total_texts = texts.size();
  report.audits.resize(texts.size());
  parallel_for(texts.size(), jobs, [&](std::size_t i) {
    report.audits[i] = audit(texts[i], vocab);
  });
  for (const TokenAudit& a : report.audits) {
    report.total_violations += a.violations.size();
    if (a.resolvable) ++report.resolvable_texts;
  }
  return report;
}

}  // namespace semfence
