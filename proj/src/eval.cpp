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
#include "semfence/eval.hpp"

#include <algorithm>

#include "semfence/error.hpp"
#include "semfence/marker.hpp"
#include "semfence/parallel.hpp"
#include "semfence/preprocess.hpp"

namespace semfence {

EvalOutcome exact_match(const std::string& pred, const std::string& gold,
                        const SchemaDb& schema, const EmConfig& config) {
  EvalOutcome outcome;
  sql::Query gold_ast;
  try {
    gold_ast = sql::parse_sql(gold, schema);
  } catch (const Error& e) {
    outcome.error = std::string("gold: ") + e.what();
    return outcome;
  }
  sql::Query pred_ast;
  try {
    pred_ast = sql::parse_sql(pred, schema);
  } catch (const Error& e) {
    outcome.error = std::string("pred: ") + e.what();
    for (const char* name : sql::kClauseNames) {
      outcome.clause_breakdown[name] = false;
    }
    return outcome;
  }
  const auto pred_keys = sql::clause_keys(pred_ast, config.compare_values);
  const auto gold_keys = sql::clause_keys(gold_ast, config.compare_values);
  bool all = true;
  for (std::size_t i = 0; i < pred_keys.size(); ++i) {
    const bool equal = pred_keys[i].second == gold_keys[i].second;
    outcome.clause_breakdown[pred_keys[i].first] = equal;
    all = all && equal;
  }
  outcome.em = all;
  return outcome;
}

namespace {

std::string normalize_prediction(const std::string& text) {
  return postprocess_sql(strip_markers(text).plain);
}

SplitStats finalize(SplitStats stats, bool with_execution) {
  if (stats.count > 0) {
    stats.em_rate = 100.0 * static_cast<double>(stats.em_count) /
                    static_cast<double>(stats.count);
    if (with_execution) {
      stats.ex_rate = 100.0 * static_cast<double>(stats.ex_count) /
                      static_cast<double>(stats.count);
    }
  }
  return stats;
}

}  // namespace

CorpusEvalReport evaluate_corpus(const std::vector<EvalPair>& pairs,
                                 const std::vector<SchemaDb>& schemas,
                                 const std::string& db_root,
                                 const CorpusEvalConfig& config) {
  CorpusEvalReport report;
  report.outcomes.resize(pairs.size());
  parallel_for(pairs.size(), config.jobs, [&](std::size_t i) {
    const EvalPair& pair = pairs[i];
    EvalOutcome& outcome = report.outcomes[i];
    std::string pred = pair.pred;
    std::string gold = pair.gold;
    if (config.normalize) {
      try {
        pred = normalize_prediction(pred);
      } catch (const Error& e) {
        outcome.error = std::string("pred: ") + e.what();
        return;
      }
      try {
        gold = normalize_prediction(gold);
      } catch (const Error& e) {
        outcome.error = std::string("gold: ") + e.what();
        return;
      }
    }
    const SchemaDb* schema = nullptr;
    for (const SchemaDb& db : schemas) {
      if (db.db_id == pair.db_id) {
        schema = &db;
        break;
      }
    }
    if (schema == nullptr) {
      outcome.error = "unknown db_id '" + pair.db_id + "'";
      return;
    }
    outcome = exact_match(pred, gold, *schema, config.em);
    if (config.with_execution) {
      try {
        const EvalOutcome ex = execution_match(
            pred, gold, database_path(db_root, pair.db_id), config.ex);
        outcome.ex = ex.ex;
        if (ex.error && !outcome.error) outcome.error = ex.error;
      } catch (const Error& e) {
        if (!outcome.error) outcome.error = e.what();
      }
    }
  });

  const auto accumulate = [&](SplitStats& stats, const EvalOutcome& o) {
    ++stats.count;
    if (o.em) ++stats.em_count;
    if (o.ex == Tri::True) ++stats.ex_count;
    if (o.error) ++stats.error_count;
  };
  std::map<std::string, SplitStats> splits;
  SplitStats overall;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    accumulate(overall, report.outcomes[i]);
    const std::string split = pairs[i].split.empty() ? "all" : pairs[i].split;
    accumulate(splits[split], report.outcomes[i]);
  }
  report.overall = finalize(overall, config.with_execution);
  for (auto& [name, stats] : splits) {
    report.splits[name] = finalize(stats, config.with_execution);
  }
  return report;
}

}  // namespace semfence
