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
#ifndef SEMFENCE_SERIALIZER_HPP
#define SEMFENCE_SERIALIZER_HPP

#include <string>
#include <string_view>
#include <vector>

#include "semfence/corpus.hpp"
#include "semfence/preprocess.hpp"

namespace semfence {

struct Grounding {
  ColumnRef column;
  std::string value;
  std::size_t match_length = 0;  // matched characters, for ranking
};

// Database cell values mentioned by the question, found by fuzzy matching
// question n-grams against content_index values of text columns. At most one
// value per column and max_columns columns total; longest matches win, then
// schema order.
std::vector<Grounding> ground_values(std::string_view question,
                                     const SchemaDb& db,
                                     double threshold = 0.85,
                                     std::size_t max_columns = 3);

// "<question> | <db_id> | <table> : <col> , <col> | ..." with grounded
// columns rendered "<col> ( <value> )". With preprocess, schema names pass
// through preprocess_schema.
std::string serialize_input(std::string_view question, const SchemaDb& db,
                            const std::vector<Grounding>& groundings = {},
                            bool preprocess = false);

struct PairOptions {
  bool preprocess = true;
  bool mark = true;
  bool ground = true;
  double ground_threshold = 0.85;
  const KeywordMap* keywords = nullptr;  // default map when null
};

struct ModelPair {
  std::string source;
  std::string target;
};

// Source: mark -> preprocess -> serialize (markers wrap the question only;
// the schema is never marked). Target: mark -> preprocess. Throws ConfigError
// when mark is requested without alignments.
ModelPair build_model_pair(const ParallelExample& example, const SchemaDb& db,
                           const PairOptions& options = {});

}  // namespace semfence

#endif  // SEMFENCE_SERIALIZER_HPP
