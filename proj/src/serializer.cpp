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
#include "semfence/serializer.hpp"

#include <algorithm>
#include <map>

#include "semfence/error.hpp"
#include "semfence/marker.hpp"
#include "semfence/text.hpp"

namespace semfence {

namespace {

// Lowercased, punctuation replaced by spaces, whitespace collapsed.
std::string normalize_for_match(std::string_view s) {
  std::string mapped;
  mapped.reserve(s.size());
  for (char c : s) {
    if (is_ascii_alnum(c) || static_cast<unsigned char>(c) >= 0x80) {
      mapped.push_back(ascii_lower(c));
    } else {
      mapped.push_back(' ');
    }
  }
  return normalize_whitespace(mapped);
}

std::size_t longest_common_substring(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1] + 1;
        best = std::max(best, cur[j]);
      } else {
        cur[j] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return best;
}

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ') ++i;
    if (i > start) words.push_back(s.substr(start, i - start));
  }
  return words;
}

bool contains_at_word_boundary(std::string_view haystack,
                               std::string_view needle) {
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
    const bool left_ok = pos == 0 || haystack[pos - 1] == ' ';
    const std::size_t after = pos + needle.size();
    const bool right_ok = after == haystack.size() || haystack[after] == ' ';
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

struct MatchScore {
  double score = 0.0;
  std::size_t length = 0;  // matched characters
};

// Best normalized LCS ratio of the cell against question word n-grams.
MatchScore best_match(const std::vector<std::string_view>& question_words,
                      std::string_view question_norm, std::string_view cell,
                      double threshold) {
  MatchScore best;
  if (contains_at_word_boundary(question_norm, cell)) {
    return {1.0, cell.size()};
  }
  const std::size_t cell_words = split_words(cell).size();
  const std::size_t max_n =
      std::min(question_words.size(), cell_words + 2);
  for (std::size_t n = 1; n <= max_n; ++n) {
    for (std::size_t start = 0; start + n <= question_words.size(); ++start) {
      std::string ngram;
      for (std::size_t w = start; w < start + n; ++w) {
        if (!ngram.empty()) ngram += ' ';
        ngram += question_words[w];
      }
      const std::size_t longer = std::max(ngram.size(), cell.size());
      const std::size_t shorter = std::min(ngram.size(), cell.size());
      if (longer == 0 ||
          static_cast<double>(shorter) / static_cast<double>(longer) <
              threshold) {
        continue;  // even a full overlap could not reach the threshold
      }
      const std::size_t lcs = longest_common_substring(ngram, cell);
      const double score =
          static_cast<double>(lcs) / static_cast<double>(longer);
      if (score > best.score ||
          (score == best.score && lcs > best.length)) {
        best = {score, lcs};
      }
    }
  }
  return best;
}

}  // namespace

std::vector<Grounding> ground_values(std::string_view question,
                                     const SchemaDb& db, double threshold,
                                     std::size_t max_columns) {
  const std::string question_norm = normalize_for_match(question);
  const std::vector<std::string_view> question_words =
      split_words(question_norm);
  std::vector<Grounding> candidates;
  for (std::size_t t = 0; t < db.tables.size(); ++t) {
    for (std::size_t c = 0; c < db.tables[t].columns.size(); ++c) {
      const ColumnRef ref{static_cast<int>(t), static_cast<int>(c)};
      const auto contents = db.content_index.find(ref);
      if (contents == db.content_index.end()) continue;
      if (db.tables[t].columns[c].type != ColumnType::Text) continue;
      Grounding best;
      double best_score = 0.0;
      for (const std::string& cell : contents->second) {
        const std::string cell_norm = normalize_for_match(cell);
        if (cell_norm.size() < 2) continue;
        const MatchScore m =
            best_match(question_words, question_norm, cell_norm, threshold);
        if (m.score < threshold) continue;
        const bool better =
            m.score > best_score ||
            (m.score == best_score && m.length > best.match_length) ||
            (m.score == best_score && m.length == best.match_length &&
             !best.value.empty() && cell < best.value);
        if (better) {
          best = {ref, cell, m.length};
          best_score = m.score;
        }
      }
      if (best_score >= threshold) candidates.push_back(std::move(best));
    }
  }
  // Longest matches win the (at most) max_columns slots; schema order breaks
  // ties. The result is reported back in schema order.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Grounding& a, const Grounding& b) {
                     return a.match_length > b.match_length;
                   });
  if (candidates.size() > max_columns) candidates.resize(max_columns);
  std::sort(candidates.begin(), candidates.end(),
            [](const Grounding& a, const Grounding& b) {
              return a.column < b.column;
            });
  return candidates;
}

std::string serialize_input(std::string_view question, const SchemaDb& db,
                            const std::vector<Grounding>& groundings,
                            bool preprocess) {
  std::map<ColumnRef, const Grounding*> grounded;
  for (const Grounding& g : groundings) grounded[g.column] = &g;
  const auto name_of = [&](const std::string& raw) {
    return preprocess ? preprocess_schema(raw) : raw;
  };
  std::string out(question);
  out += " | ";
  out += name_of(db.db_id);
  for (std::size_t t = 0; t < db.tables.size(); ++t) {
    out += " | ";
    out += name_of(db.tables[t].name);
    const auto& columns = db.tables[t].columns;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out += c == 0 ? " : " : " , ";
      out += name_of(columns[c].name);
      const auto it =
          grounded.find(ColumnRef{static_cast<int>(t), static_cast<int>(c)});
      if (it != grounded.end()) {
        out += " ( ";
        out += it->second->value;
        out += " )";
      }
    }
  }
  return out;
}

ModelPair build_model_pair(const ParallelExample& example, const SchemaDb& db,
                           const PairOptions& options) {
  if (options.mark && !example.alignments.has_value()) {
    throw ConfigError("marking requested but example has no alignments");
  }
  const KeywordMap& keywords =
      options.keywords != nullptr ? *options.keywords : default_keyword_map();

  std::string question = example.question;
  std::string target = example.target;
  if (options.mark) {
    MarkedPair marked =
        mark_pair(example.question, example.target, *example.alignments);
    question = std::move(marked.nl);
    target = std::move(marked.out);
  }
  if (options.preprocess) {
    target = preprocess_sql(target, keywords);
  }
  std::vector<Grounding> groundings;
  if (options.ground) {
    // Grounding looks at the original question; markers carry no content.
    groundings = ground_values(example.question, db, options.ground_threshold);
  }
  ModelPair pair;
  pair.source =
      serialize_input(question, db, groundings, options.preprocess);
  pair.target = std::move(target);
  return pair;
}

}  // namespace semfence
