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
#ifndef SEMFENCE_TOKENIZER_HPP
#define SEMFENCE_TOKENIZER_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "semfence/text.hpp"

namespace semfence {

// How a vocabulary marks word boundaries on its pieces.
//   WordStart:    pieces that begin a word carry a prefix (SentencePiece "▁").
//   Continuation: pieces that continue a word carry a prefix (WordPiece "##").
//   None:         pieces are plain surfaces.
enum class MarkerConvention { WordStart, Continuation, None };

class SubwordVocabulary {
 public:
  SubwordVocabulary();
  SubwordVocabulary(std::vector<std::string> tokens,
                    MarkerConvention convention = MarkerConvention::None,
                    std::string marker = "",
                    std::vector<std::string> specials = {});

  // Plain text (one token per line, optional "#convention=... marker=..."
  // header) or JSON ({"vocab": {token: id}, "metadata": {...}} or a bare
  // token->id object).
  static SubwordVocabulary load(const std::string& path);

  bool contains(std::string_view token) const;
  bool is_special(std::string_view token) const;
  SubwordVocabulary augmented(const std::vector<std::string>& new_tokens) const;
  MarkerConvention convention() const { return convention_; }
  const std::string& marker() const { return marker_; }
  const std::vector<std::string>& specials() const { return specials_; }
  std::size_t size() const { return tokens_.size(); }
  std::size_t max_token_length() const { return max_token_length_; }

 private:
  void insert_with_fallback_chars(const std::string& token);

  std::unordered_set<std::string> tokens_;
  MarkerConvention convention_ = MarkerConvention::None;
  std::string marker_;
  std::vector<std::string> specials_;  // longest first
  std::unordered_set<std::string> special_set_;
  std::size_t max_token_length_ = 1;
};

// Returns a vocabulary containing all prior tokens plus new_tokens, each
// registered as a special (emitted atomically). Idempotent.
SubwordVocabulary augment_vocab(const SubwordVocabulary& vocab,
                                const std::vector<std::string>& new_tokens);

struct TokenPiece {
  std::string text;
  Span extent;  // bytes of the input the piece accounts for
};

// Greedy longest-match subword tokenization within whitespace-delimited
// words; specials match first and are never split. Total for every input:
// detokenize(tokenize(text)) == text.
std::vector<std::string> tokenize(std::string_view text,
                                  const SubwordVocabulary& vocab);
std::vector<TokenPiece> tokenize_pieces(std::string_view text,
                                        const SubwordVocabulary& vocab);
std::string detokenize(const std::vector<std::string>& tokens,
                       const SubwordVocabulary& vocab);

// Minimal meaning-bearing units: whitespace-separated words split at
// underscores, dots, punctuation and lower->upper camel transitions;
// separators are their own single-character units.
std::vector<Span> segment_semantic_units(std::string_view text);

struct TokenAudit {
  std::string text;
  std::vector<std::string> tokens;
  std::vector<Span> units;
  std::vector<std::size_t> violations;  // token indices
  bool resolvable = false;
};

// Flags tokens that straddle semantic-unit boundaries (plus tokens that chop
// up a keyword abbreviation such as "avg"); resolvable reports whether the
// standard preprocessing rules eliminate every violation.
TokenAudit audit(std::string_view text, const SubwordVocabulary& vocab);

struct CorpusAuditReport {
  std::size_t total_texts = 0;
  std::size_t total_violations = 0;
  std::size_t resolvable_texts = 0;
  std::vector<TokenAudit> audits;
};

CorpusAuditReport audit_corpus(const std::vector<std::string>& texts,
                               const SubwordVocabulary& vocab,
                               unsigned jobs = 1);

}  // namespace semfence

#endif  // SEMFENCE_TOKENIZER_HPP
