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

#include "semfence/sql.hpp"

namespace semfence::sql {

namespace {

std::string_view agg_name(AggOp op) {
  switch (op) {
    case AggOp::None:
      return "";
    case AggOp::Count:
      return "count";
    case AggOp::Sum:
      return "sum";
    case AggOp::Avg:
      return "avg";
    case AggOp::Min:
      return "min";
    case AggOp::Max:
      return "max";
  }
  return "";
}

std::string_view arith_name(ArithOp op) {
  switch (op) {
    case ArithOp::None:
      return "";
    case ArithOp::Add:
      return "+";
    case ArithOp::Sub:
      return "-";
    case ArithOp::Mul:
      return "*";
    case ArithOp::Div:
      return "/";
  }
  return "";
}

std::string_view cmp_name(CmpOp op) {
  switch (op) {
    case CmpOp::Eq:
      return "=";
    case CmpOp::Ne:
      return "!=";
    case CmpOp::Lt:
      return "<";
    case CmpOp::Gt:
      return ">";
    case CmpOp::Le:
      return "<=";
    case CmpOp::Ge:
      return ">=";
    case CmpOp::Like:
      return "like";
    case CmpOp::In:
      return "in";
    case CmpOp::Between:
      return "between";
    case CmpOp::Exists:
      return "exists";
  }
  return "";
}

std::string column_key(const ColumnUnit& cu) {
  std::string base;
  if (cu.star) {
    base = cu.table.empty() ? "*" : cu.table + ".*";
  } else {
    base = cu.table + "." + cu.column;
  }
  if (cu.distinct) base = "distinct " + base;
  if (cu.agg == AggOp::None) return base;
  return std::string(agg_name(cu.agg)) + "(" + base + ")";
}

std::string literal_key(const std::string& literal, bool with_values) {
  return with_values ? "lit:" + literal : "lit:?";
}

std::string operand_key(const Operand& o, bool with_values) {
  return o.is_literal ? literal_key(o.literal, with_values) : column_key(o.column);
}

std::string value_unit_key(const ValueUnit& v, bool with_values) {
  if (v.op == ArithOp::None) return operand_key(v.first, with_values);
  return std::string(arith_name(v.op)) + "(" + operand_key(v.first, with_values) +
         "," + operand_key(v.second, with_values) + ")";
}

std::string term_key(const SelectTerm& t, bool with_values) {
  std::string inner = value_unit_key(t.value, with_values);
  if (t.distinct) inner = "distinct " + inner;
  if (t.agg == AggOp::None) return inner;
  return std::string(agg_name(t.agg)) + "(" + inner + ")";
}

std::string value_key(const Value& v, bool with_values) {
  switch (v.kind) {
    case Value::Kind::Literal:
      return literal_key(v.literal, with_values);
    case Value::Kind::Column:
      return "col:" + column_key(v.column);
    case Value::Kind::Subquery:
      return "sub:(" + canonical_key(*v.subquery, with_values) + ")";
  }
  return "";
}

std::string condition_key(const Condition& c, bool with_values) {
  if (c.kind == Condition::Kind::Leaf) {
    std::vector<std::string> rhs;
    rhs.reserve(c.rhs.size());
    for (const Value& v : c.rhs) rhs.push_back(value_key(v, with_values));
    if (c.op == CmpOp::In) std::sort(rhs.begin(), rhs.end());
    std::string key = c.negated ? "not " : "";
    key += cmp_name(c.op);
    key += "(";
    if (c.op != CmpOp::Exists) key += value_unit_key(c.lhs, with_values);
    key += ";";
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      if (i > 0) key += ",";
      key += rhs[i];
    }
    key += ")";
    return key;
  }
  // Same-kind subtrees flatten before sorting so that grouping parentheses
  // do not affect the canonical form.
  std::vector<std::string> parts;
  const auto flatten = [&](const auto& self, const Condition& node) -> void {
    for (const Condition& child : node.children) {
      if (child.kind == node.kind) {
        self(self, child);
      } else {
        parts.push_back(condition_key(child, with_values));
      }
    }
  };
  flatten(flatten, c);
  std::sort(parts.begin(), parts.end());
  std::string key = c.kind == Condition::Kind::And ? "and(" : "or(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) key += "&";
    key += parts[i];
  }
  key += ")";
  return key;
}

std::string join_sorted(std::vector<std::string> parts, const char* sep) {
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> clause_keys(const Query& q,
                                                             bool with_values) {
  std::vector<std::pair<std::string, std::string>> keys;

  std::vector<std::string> terms;
  terms.reserve(q.select.size());
  for (const SelectTerm& t : q.select) terms.push_back(term_key(t, with_values));
  keys.emplace_back("select", (q.distinct ? std::string("distinct;") : "") +
                                  join_sorted(std::move(terms), "|"));

  std::vector<std::string> tables;
  for (const TableRef& ref : q.from) {
    if (ref.kind == TableRef::Kind::Derived) {
      tables.push_back("(" + canonical_key(*ref.subquery, with_values) + ")");
    } else {
      tables.push_back(ref.name);
    }
  }
  std::vector<std::string> joins;
  for (const auto& [left, right] : q.join_conditions) {
    std::string a = column_key(left);
    std::string b = column_key(right);
    if (b < a) std::swap(a, b);
    joins.push_back(a + "=" + b);
  }
  keys.emplace_back("from", "tables{" + join_sorted(std::move(tables), ",") +
                                "};joins{" +
                                join_sorted(std::move(joins), ",") + "}");

  keys.emplace_back(
      "where", q.where ? condition_key(*q.where, with_values) : std::string());

  std::vector<std::string> groups;
  for (const ColumnUnit& cu : q.group_by) groups.push_back(column_key(cu));
  keys.emplace_back("group_by", join_sorted(std::move(groups), ","));

  keys.emplace_back("having", q.having
                                  ? condition_key(*q.having, with_values)
                                  : std::string());

  std::string order;
  for (std::size_t i = 0; i < q.order_by.size(); ++i) {
    if (i > 0) order += ",";
    order += value_unit_key(q.order_by[i].value, with_values);
    order += q.order_by[i].descending ? " desc" : " asc";
  }
  keys.emplace_back("order_by", std::move(order));

  // LIMIT values stay comparable even in value-insensitive mode.
  keys.emplace_back("limit",
                    q.limit ? std::to_string(*q.limit) : std::string());

  std::string set;
  if (q.set_op != SetOp::None) {
    set = q.set_op == SetOp::Union
              ? "union"
              : (q.set_op == SetOp::Intersect ? "intersect" : "except");
    if (q.set_all) set += " all";
    set += "(" + canonical_key(*q.set_rhs, with_values) + ")";
  }
  keys.emplace_back("set_op", std::move(set));
  return keys;
}

std::string canonical_key(const Query& q, bool with_values) {
  std::string out;
  for (const auto& [name, key] : clause_keys(q, with_values)) {
    out += name;
    out += "=";
    out += key;
    out += ";";
  }
  return out;
}

}  // namespace semfence::sql
