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
#ifndef SEMFENCE_PREPROCESS_HPP
#define SEMFENCE_PREPROCESS_HPP

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semfence {

// Ordered abbreviation -> expansion pairs used by the keyword-spelling rule.
// Defaults to the three attested pairs: avg/average, desc/descending,
// asc/ascending.
class KeywordMap {
 public:
  KeywordMap();
  explicit KeywordMap(std::vector<std::pair<std::string, std::string>> pairs);

  // Two-column TSV: abbreviation <TAB> expansion. '#' lines are comments.
  static KeywordMap load_tsv(const std::string& path);

  const std::vector<std::pair<std::string, std::string>>& pairs() const {
    return pairs_;
  }

  // Case-insensitive lookups; nullptr when the word is not mapped.
  const std::string* expansion_of(std::string_view word) const;
  const std::string* abbreviation_of(std::string_view word) const;

 private:
  void validate() const;

  std::vector<std::pair<std::string, std::string>> pairs_;
};

const KeywordMap& default_keyword_map();

// Surrounds every underscore that touches a non-space character with single
// spaces. Idempotent; never doubles an existing space.
std::string preprocess_schema(std::string_view text);

// Applies, outside quoted literals: underscore spacing, spacing around
// Table.Column access dots (numeric-literal dots untouched), and whole-word
// keyword expansion. Throws PreprocessError on an unbalanced quote.
std::string preprocess_sql(std::string_view sql,
                           const KeywordMap& keywords = default_keyword_map());

// Inverse surface transform: collapses " _ " and identifier-adjacent " . ",
// and reverses keyword expansion, outside quoted literals.
std::string postprocess_sql(std::string_view text,
                            const KeywordMap& keywords = default_keyword_map());

}  // namespace semfence

#endif  // SEMFENCE_PREPROCESS_HPP
