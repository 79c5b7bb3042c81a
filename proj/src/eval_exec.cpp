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
#include <algorithm>
#include <filesystem>
#include <functional>

#include "semfence/error.hpp"
#include "semfence/eval.hpp"
#include "sqlite_util.hpp"

namespace semfence {

namespace {

// One result cell: a type tag plus sqlite's text rendering. Keeping the tag
// distinguishes NULL from the empty string and 1 from '1'.
using Cell = std::pair<char, std::string>;
using Row = std::vector<Cell>;

struct ResultSet {
  std::vector<Row> rows;
  int columns = 0;
  bool truncated = false;
};

struct Deadline {
  std::chrono::steady_clock::time_point at;
  bool expired = false;
};

extern "C" int progress_callback(void* arg) {
  auto* deadline = static_cast<Deadline*>(arg);
  if (std::chrono::steady_clock::now() >= deadline->at) {
    deadline->expired = true;
    return 1;  // interrupt
  }
  return 0;
}

ResultSet run_query(const SqliteDb& conn, const std::string& sql,
                    const ExConfig& config) {
  Deadline deadline{std::chrono::steady_clock::now() + config.timeout, false};
  sqlite3_progress_handler(conn.get(), 1000, progress_callback, &deadline);
  ResultSet result;
  try {
    SqliteStmt stmt(conn, sql);
    result.columns = sqlite3_column_count(stmt.get());
    for (;;) {
      const int rc = sqlite3_step(stmt.get());
      if (rc == SQLITE_DONE) break;
      if (rc != SQLITE_ROW) {
        if (deadline.expired) {
          throw Error("timeout after " +
                      std::to_string(config.timeout.count()) + " ms");
        }
        throw Error(std::string("execution failed: ") + conn.error());
      }
      if (result.rows.size() >= config.row_cap) {
        result.truncated = true;
        break;
      }
      Row row;
      row.reserve(static_cast<std::size_t>(result.columns));
      for (int c = 0; c < result.columns; ++c) {
        const int type = sqlite3_column_type(stmt.get(), c);
        if (type == SQLITE_NULL) {
          row.emplace_back('n', "");
          continue;
        }
        const unsigned char* text = sqlite3_column_text(stmt.get(), c);
        const char tag = type == SQLITE_INTEGER  ? 'i'
                         : type == SQLITE_FLOAT  ? 'f'
                         : type == SQLITE_TEXT   ? 't'
                                                 : 'b';
        row.emplace_back(
            tag, text != nullptr ? reinterpret_cast<const char*>(text) : "");
      }
      result.rows.push_back(std::move(row));
    }
  } catch (...) {
    sqlite3_progress_handler(conn.get(), 0, nullptr, nullptr);
    throw;
  }
  sqlite3_progress_handler(conn.get(), 0, nullptr, nullptr);
  return result;
}

// perm maps gold column j to pred column perm[j].
bool rows_match(const std::vector<Row>& pred, const std::vector<Row>& gold,
                const std::vector<int>& perm, bool ordered) {
  std::vector<Row> projected;
  projected.reserve(pred.size());
  for (const Row& r : pred) {
    Row out;
    out.reserve(perm.size());
    for (const int src : perm) out.push_back(r[static_cast<std::size_t>(src)]);
    projected.push_back(std::move(out));
  }
  if (ordered) return projected == gold;
  std::vector<Row> sorted_gold = gold;
  std::sort(projected.begin(), projected.end());
  std::sort(sorted_gold.begin(), sorted_gold.end());
  return projected == sorted_gold;
}

// Multiset comparison, insensitive to column permutation (projections are
// sets at the EM level, so a reordered projection must still execute-match).
bool results_equal(const ResultSet& pred, const ResultSet& gold,
                   bool ordered) {
  if (pred.columns != gold.columns) return false;
  if (pred.rows.size() != gold.rows.size()) return false;
  const int c = gold.columns;
  if (c == 0) return true;
  std::vector<int> identity(static_cast<std::size_t>(c));
  for (int i = 0; i < c; ++i) identity[static_cast<std::size_t>(i)] = i;
  if (rows_match(pred.rows, gold.rows, identity, ordered)) return true;
  if (c > 8) return false;  // permutation search is for small result shapes

  const auto column_values = [&](const std::vector<Row>& rows, int col) {
    std::vector<Cell> values;
    values.reserve(rows.size());
    for (const Row& r : rows) values.push_back(r[static_cast<std::size_t>(col)]);
    if (!ordered) std::sort(values.begin(), values.end());
    return values;
  };
  std::vector<std::vector<Cell>> pred_cols;
  std::vector<std::vector<Cell>> gold_cols;
  for (int i = 0; i < c; ++i) {
    pred_cols.push_back(column_values(pred.rows, i));
    gold_cols.push_back(column_values(gold.rows, i));
  }
  std::vector<int> perm(static_cast<std::size_t>(c), -1);
  std::vector<bool> used(static_cast<std::size_t>(c), false);
  const std::function<bool(int)> assign = [&](int j) -> bool {
    if (j == c) return rows_match(pred.rows, gold.rows, perm, ordered);
    for (int i = 0; i < c; ++i) {
      if (used[static_cast<std::size_t>(i)] ||
          pred_cols[static_cast<std::size_t>(i)] !=
              gold_cols[static_cast<std::size_t>(j)]) {
        continue;
      }
      used[static_cast<std::size_t>(i)] = true;
      perm[static_cast<std::size_t>(j)] = i;
      if (assign(j + 1)) return true;
      used[static_cast<std::size_t>(i)] = false;
    }
    return false;
  };
  return assign(0);
}

}  // namespace

EvalOutcome execution_match(const std::string& pred, const std::string& gold,
                            const std::string& db_path,
                            const ExConfig& config) {
  if (!std::filesystem::exists(db_path)) {
    throw EnvironmentError("database file missing: " + db_path);
  }
  EvalOutcome outcome;
  SqliteDb conn(db_path);
  ResultSet gold_result;
  try {
    gold_result = run_query(conn, gold, config);
  } catch (const std::exception& e) {
    throw DataError(std::string("gold query failed: ") + e.what());
  }
  ResultSet pred_result;
  try {
    pred_result = run_query(conn, pred, config);
  } catch (const std::exception& e) {
    outcome.ex = Tri::False;
    outcome.error = std::string("pred: ") + e.what();
    return outcome;
  }
  const bool ordered = sql::has_top_level_order_by(gold);
  outcome.ex =
      results_equal(pred_result, gold_result, ordered) ? Tri::True : Tri::False;
  return outcome;
}

}  // namespace semfence
