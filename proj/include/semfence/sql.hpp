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
#ifndef SEMFENCE_SQL_HPP
#define SEMFENCE_SQL_HPP

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semfence/corpus.hpp"

namespace semfence::sql {

enum class AggOp { None, Count, Sum, Avg, Min, Max };
enum class ArithOp { None, Add, Sub, Mul, Div };
enum class CmpOp { Eq, Ne, Lt, Gt, Le, Ge, Like, In, Between, Exists };
enum class SetOp { None, Union, Intersect, Except };

// A possibly aggregated column reference. After resolution, table/column are
// canonical lowercase schema names (aliases eliminated); star columns use "*".
struct ColumnUnit {
  AggOp agg = AggOp::None;
  bool distinct = false;
  std::string table;
  std::string column;
  bool star = false;
};

struct Operand {
  bool is_literal = false;
  ColumnUnit column;
  std::string literal;  // verbatim; string quotes stripped
};

struct ValueUnit {
  ArithOp op = ArithOp::None;
  Operand first;
  Operand second;  // meaningful iff op != None
};

struct Query;

// Right-hand side of a comparison.
struct Value {
  enum class Kind { Literal, Column, Subquery };
  Kind kind = Kind::Literal;
  std::string literal;
  ColumnUnit column;
  std::unique_ptr<Query> subquery;
};

// AND/OR tree over comparison leaves, as written (canonicalization happens
// at key construction).
struct Condition {
  enum class Kind { And, Or, Leaf };
  Kind kind = Kind::Leaf;
  std::vector<Condition> children;
  bool negated = false;
  CmpOp op = CmpOp::Eq;
  ValueUnit lhs;
  std::vector<Value> rhs;  // 1 value; Between: 2; In: n; Exists: 1 subquery
};

struct SelectTerm {
  AggOp agg = AggOp::None;
  bool distinct = false;  // DISTINCT inside the aggregate
  ValueUnit value;
};

struct TableRef {
  enum class Kind { Named, Derived };
  Kind kind = Kind::Named;
  std::string name;  // canonical for Named; "#d<i>" for Derived
  std::unique_ptr<Query> subquery;
  std::string alias;
};

struct OrderTerm {
  ValueUnit value;
  bool descending = false;
};

struct Query {
  bool distinct = false;
  std::vector<SelectTerm> select;
  std::vector<TableRef> from;
  std::vector<std::pair<ColumnUnit, ColumnUnit>> join_conditions;
  std::optional<Condition> where;
  std::vector<ColumnUnit> group_by;
  std::optional<Condition> having;
  std::vector<OrderTerm> order_by;
  std::optional<long long> limit;
  SetOp set_op = SetOp::None;
  bool set_all = false;
  std::unique_ptr<Query> set_rhs;
};

// Parses the supported SELECT subset and resolves every column reference
// against the schema (aliases eliminated, names case-folded). Throws
// ParseError (with offset), UnsupportedError (naming the construct), or
// ResolutionError.
Query parse_sql(std::string_view sql, const SchemaDb& schema);

inline constexpr const char* kClauseNames[] = {
    "select", "from", "where", "group_by", "having", "order_by", "limit",
    "set_op"};

// Canonical per-clause comparison keys: multi-element clauses are sorted
// (sets), order_by stays ordered, literals become "?" when with_values is
// false (limit values are always compared).
std::vector<std::pair<std::string, std::string>> clause_keys(const Query& q,
                                                             bool with_values);

// Whole-query canonical form (concatenated clause keys).
std::string canonical_key(const Query& q, bool with_values);

// Light scan: does the statement have a top-level ORDER BY (outside quotes
// and parentheses)? Used to pick ordered result comparison.
bool has_top_level_order_by(std::string_view sql);

}  // namespace semfence::sql

#endif  // SEMFENCE_SQL_HPP
