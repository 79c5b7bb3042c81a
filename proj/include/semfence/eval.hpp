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
#ifndef SEMFENCE_EVAL_HPP
#define SEMFENCE_EVAL_HPP

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semfence/corpus.hpp"
#include "semfence/sql.hpp"

namespace semfence {

enum class Tri { False, True, NotRun };

struct EvalOutcome {
  bool em = false;
  Tri ex = Tri::NotRun;
  std::map<std::string, bool> clause_breakdown;
  std::optional<std::string> error;
};

struct EmConfig {
  bool compare_values = false;  // historical Spider EM convention
};

// Exact Match: per-clause set equality of the canonical ASTs. Parse failures
// fold into the outcome (em=false plus a diagnostic), never throw.
EvalOutcome exact_match(const std::string& pred, const std::string& gold,
                        const SchemaDb& schema, const EmConfig& config = {});

struct ExConfig {
  std::chrono::milliseconds timeout{30000};
  std::size_t row_cap = 100000;
};

// Execution Match: runs both queries on the SQLite database and compares
// result multisets (ordered when the gold query has a top-level ORDER BY).
// Pred failures fold into the outcome; a missing database file throws
// EnvironmentError and a failing gold query throws DataError.
EvalOutcome execution_match(const std::string& pred, const std::string& gold,
                            const std::string& db_path,
                            const ExConfig& config = {});

struct EvalPair {
  std::string pred;
  std::string gold;
  std::string db_id;
  std::string split;  // optional grouping label
};

struct CorpusEvalConfig {
  EmConfig em;
  ExConfig ex;
  bool with_execution = false;
  // Strip boundary markers and undo token preprocessing before scoring, so
  // model-surface outputs evaluate directly. Canonical SQL is unaffected.
  bool normalize = false;
  unsigned jobs = 1;
};

struct SplitStats {
  std::size_t count = 0;
  std::size_t em_count = 0;
  std::size_t ex_count = 0;
  std::size_t error_count = 0;
  double em_rate = 0.0;  // percent
  double ex_rate = 0.0;  // percent
};

struct CorpusEvalReport {
  SplitStats overall;
  std::map<std::string, SplitStats> splits;
  std::vector<EvalOutcome> outcomes;  // one per input pair, input order
};

CorpusEvalReport evaluate_corpus(const std::vector<EvalPair>& pairs,
                                 const std::vector<SchemaDb>& schemas,
                                 const std::string& db_root,
                                 const CorpusEvalConfig& config = {});

}  // namespace semfence

#endif  // SEMFENCE_EVAL_HPP
