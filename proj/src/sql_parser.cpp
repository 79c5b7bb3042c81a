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
#include <unordered_set>

#include "semfence/error.hpp"
#include "semfence/sql.hpp"
#include "semfence/text.hpp"

namespace semfence::sql {

namespace {

struct Token {
  enum class Kind { Ident, Number, String, Op, Punct, End };
  Kind kind = Kind::End;
  std::string text;   // verbatim (string contents without quotes)
  std::string lower;  // lowered text for idents/ops
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view sql) : sql_(sql) {}

  std::vector<Token> run() {
    std::vector<Token> tokens;
    std::size_t i = 0;
    const std::size_t n = sql_.size();
    while (i < n) {
      const char c = sql_[i];
      if (is_ascii_space(c)) {
        ++i;
        continue;
      }
      if (c == '\'' || c == '"') {
        tokens.push_back(lex_string(i));
        continue;
      }
      if (is_ascii_digit(c) ||
          (c == '.' && i + 1 < n && is_ascii_digit(sql_[i + 1]))) {
        tokens.push_back(lex_number(i));
        continue;
      }
      if (is_ascii_alpha(c) || c == '_' ||
          static_cast<unsigned char>(c) >= 0x80) {
        tokens.push_back(lex_ident(i));
        continue;
      }
      tokens.push_back(lex_symbol(i));
    }
    tokens.push_back({Token::Kind::End, "", "", n});
    return tokens;
  }

 private:
  Token lex_string(std::size_t& i) {
    const char q = sql_[i];
    const std::size_t start = i++;
    std::string content;
    while (i < sql_.size()) {
      if (sql_[i] == '\\' && i + 1 < sql_.size()) {
        content += sql_[i + 1];
        i += 2;
        continue;
      }
      if (sql_[i] == q) {
        ++i;
        return {Token::Kind::String, content, "", start};
      }
      content += sql_[i++];
    }
    throw ParseError("syntax error at offset " + std::to_string(start) +
                     ": unterminated string literal");
  }

  Token lex_number(std::size_t& i) {
    const std::size_t start = i;
    while (i < sql_.size() && is_ascii_digit(sql_[i])) ++i;
    if (i < sql_.size() && sql_[i] == '.') {
      ++i;
      while (i < sql_.size() && is_ascii_digit(sql_[i])) ++i;
    }
    if (i < sql_.size() && (sql_[i] == 'e' || sql_[i] == 'E')) {
      std::size_t j = i + 1;
      if (j < sql_.size() && (sql_[j] == '+' || sql_[j] == '-')) ++j;
      if (j < sql_.size() && is_ascii_digit(sql_[j])) {
        i = j;
        while (i < sql_.size() && is_ascii_digit(sql_[i])) ++i;
      }
    }
    return {Token::Kind::Number, std::string(sql_.substr(start, i - start)),
            "", start};
  }

  Token lex_ident(std::size_t& i) {
    const std::size_t start = i;
    while (i < sql_.size() && is_ident_char(sql_[i])) ++i;
    std::string text(sql_.substr(start, i - start));
    std::string lower = to_lower(text);
    return {Token::Kind::Ident, std::move(text), std::move(lower), start};
  }

  Token lex_symbol(std::size_t& i) {
    const std::size_t start = i;
    const char c = sql_[i];
    const auto two = [&](char a, char b) {
      return c == a && i + 1 < sql_.size() && sql_[i + 1] == b;
    };
    if (two('<', '=') || two('>', '=') || two('!', '=') || two('<', '>') ||
        two('=', '=')) {
      i += 2;
      std::string text(sql_.substr(start, 2));
      return {Token::Kind::Op, text, text == "<>" ? "!=" : (text == "==" ? "=" : text), start};
    }
    if (c == '=' || c == '<' || c == '>') {
      ++i;
      std::string text(1, c);
      return {Token::Kind::Op, text, text, start};
    }
    if (c == '(' || c == ')' || c == ',' || c == '.' || c == '*' || c == '+' ||
        c == '-' || c == '/' || c == ';') {
      ++i;
      return {Token::Kind::Punct, std::string(1, c), std::string(1, c), start};
    }
    throw ParseError("syntax error at offset " + std::to_string(start) +
                     ": unexpected character '" + std::string(1, c) + "'");
  }

  std::string_view sql_;
};

const std::unordered_set<std::string>& reserved_words() {
  static const std::unordered_set<std::string> words{
      "select", "distinct", "from",   "join",      "inner",  "on",
      "as",     "where",    "and",    "or",        "not",    "in",
      "like",   "between",  "exists", "group",     "by",     "having",
      "order",  "asc",      "desc",   "limit",     "union",  "intersect",
      "except", "all",      "count",  "sum",       "avg",    "min",
      "max",    "is",       "null",   "case",      "cast",   "over",
      "with",   "left",     "right",  "full",      "outer",  "cross",
      "natural"};
  return words;
}

std::optional<AggOp> agg_from_word(std::string_view w) {
  if (w == "count") return AggOp::Count;
  if (w == "sum") return AggOp::Sum;
  if (w == "avg") return AggOp::Avg;
  if (w == "min") return AggOp::Min;
  if (w == "max") return AggOp::Max;
  return std::nullopt;
}

struct ScopeEntry {
  std::string alias;      // lowered
  bool derived = false;
  std::string canonical;  // canonical table name or "#d<i>"
  int table_index = -1;   // into schema.tables for named entries
};

using Scope = std::vector<ScopeEntry>;

class Parser {
 public:
  Parser(std::string_view sql, const SchemaDb& schema)
      : tokens_(Lexer(sql).run()), schema_(schema) {}

  Query parse() {
    Query q = parse_query();
    accept_punct(";");
    if (peek().kind != Token::Kind::End) {
      throw ParseError("syntax error at offset " +
                       std::to_string(peek().offset) +
                       ": unexpected trailing input '" + peek().text + "'");
    }
    std::vector<const Scope*> scopes;
    resolve_query(q, scopes);
    return q;
  }

 private:
  // ---- token helpers ----

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }

  const Token& advance() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

  bool is_kw(std::string_view word, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Token::Kind::Ident && t.lower == word;
  }

  bool accept_kw(std::string_view word) {
    if (!is_kw(word)) return false;
    ++pos_;
    return true;
  }

  void expect_kw(std::string_view word) {
    if (!accept_kw(word)) {
      throw ParseError("syntax error at offset " +
                       std::to_string(peek().offset) + ": expected '" +
                       std::string(word) + "', found '" + peek().text + "'");
    }
  }

  bool is_punct(std::string_view p, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Token::Kind::Punct && t.lower == p;
  }

  bool accept_punct(std::string_view p) {
    if (!is_punct(p)) return false;
    ++pos_;
    return true;
  }

  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) {
      throw ParseError("syntax error at offset " +
                       std::to_string(peek().offset) + ": expected '" +
                       std::string(p) + "', found '" +
                       (peek().kind == Token::Kind::End ? "end of input"
                                                        : peek().text) +
                       "'");
    }
  }

  [[noreturn]] void unsupported(const std::string& construct) {
    throw UnsupportedError("unsupported construct at offset " +
                           std::to_string(peek().offset) + ": " + construct);
  }

  void reject_unsupported_keyword() {
    if (is_kw("with")) unsupported("WITH (common table expression)");
    if (is_kw("case")) unsupported("CASE expression");
    if (is_kw("cast")) unsupported("CAST expression");
    if (is_kw("over")) unsupported("window function");
  }

  // ---- grammar ----

  Query parse_query() {
    reject_unsupported_keyword();
    Query q = parse_select_core();
    if (is_kw("union") || is_kw("intersect") || is_kw("except")) {
      const std::string op = advance().lower;
      q.set_op = op == "union"
                     ? SetOp::Union
                     : (op == "intersect" ? SetOp::Intersect : SetOp::Except);
      q.set_all = accept_kw("all");
      q.set_rhs = std::make_unique<Query>(parse_query());
    }
    return q;
  }

  Query parse_select_core() {
    expect_kw("select");
    Query q;
    q.distinct = accept_kw("distinct");
    q.select.push_back(parse_select_term());
    while (accept_punct(",")) q.select.push_back(parse_select_term());
    expect_kw("from");
    parse_from(q);
    if (accept_kw("where")) q.where = parse_condition();
    if (accept_kw("group")) {
      expect_kw("by");
      q.group_by.push_back(parse_column_ref(/*allow_star=*/false));
      while (accept_punct(",")) {
        q.group_by.push_back(parse_column_ref(/*allow_star=*/false));
      }
    }
    if (accept_kw("having")) q.having = parse_condition();
    if (accept_kw("order")) {
      expect_kw("by");
      q.order_by.push_back(parse_order_term());
      while (accept_punct(",")) q.order_by.push_back(parse_order_term());
    }
    if (accept_kw("limit")) {
      const Token& t = peek();
      if (t.kind != Token::Kind::Number) {
        throw ParseError("syntax error at offset " + std::to_string(t.offset) +
                         ": LIMIT expects a number");
      }
      q.limit = std::stoll(advance().text);
      if (is_kw("offset")) unsupported("LIMIT ... OFFSET");
    }
    return q;
  }

  SelectTerm parse_select_term() {
    reject_unsupported_keyword();
    SelectTerm term;
    if (is_punct("*")) {
      ++pos_;
      term.value.first.column.star = true;
      term.value.first.column.column = "*";
      return term;
    }
    const auto agg = peek().kind == Token::Kind::Ident
                         ? agg_from_word(peek().lower)
                         : std::nullopt;
    if (agg && is_punct("(", 1)) {
      ++pos_;
      expect_punct("(");
      term.agg = *agg;
      term.distinct = accept_kw("distinct");
      term.value = parse_value_unit(/*allow_star=*/true);
      expect_punct(")");
      return term;
    }
    term.value = parse_value_unit(/*allow_star=*/false);
    return term;
  }

  OrderTerm parse_order_term() {
    OrderTerm term;
    term.value = parse_value_unit(/*allow_star=*/true);
    if (accept_kw("desc")) {
      term.descending = true;
    } else {
      accept_kw("asc");
    }
    return term;
  }

  ValueUnit parse_value_unit(bool allow_star) {
    ValueUnit unit;
    unit.first = parse_operand(allow_star);
    ArithOp op = ArithOp::None;
    if (is_punct("+")) {
      op = ArithOp::Add;
    } else if (is_punct("-")) {
      op = ArithOp::Sub;
    } else if (is_punct("*") && !is_next_terminator(1)) {
      op = ArithOp::Mul;
    } else if (is_punct("/")) {
      op = ArithOp::Div;
    }
    if (op != ArithOp::None) {
      ++pos_;
      unit.op = op;
      unit.second = parse_operand(/*allow_star=*/false);
    }
    return unit;
  }

  // After a '*', decides whether it closes a select term ("select *, a") or
  // acts as multiplication ("a * b").
  bool is_next_terminator(std::size_t ahead) const {
    const Token& t = peek(ahead);
    if (t.kind == Token::Kind::End) return true;
    if (t.kind == Token::Kind::Punct && (t.lower == "," || t.lower == ")")) {
      return true;
    }
    if (t.kind == Token::Kind::Ident && reserved_words().count(t.lower) > 0 &&
        agg_from_word(t.lower) == std::nullopt) {
      return true;
    }
    return false;
  }

  Operand parse_operand(bool allow_star) {
    reject_unsupported_keyword();
    Operand operand;
    const Token& t = peek();
    if (t.kind == Token::Kind::Number) {
      operand.is_literal = true;
      operand.literal = advance().text;
      return operand;
    }
    if (t.kind == Token::Kind::String) {
      operand.is_literal = true;
      operand.literal = advance().text;
      return operand;
    }
    if (t.kind == Token::Kind::Punct && t.lower == "-" &&
        peek(1).kind == Token::Kind::Number) {
      ++pos_;
      operand.is_literal = true;
      operand.literal = "-" + advance().text;
      return operand;
    }
    const auto agg = t.kind == Token::Kind::Ident ? agg_from_word(t.lower)
                                                  : std::nullopt;
    if (agg && is_punct("(", 1)) {
      ++pos_;
      expect_punct("(");
      const bool distinct = accept_kw("distinct");
      ColumnUnit cu = parse_column_ref(/*allow_star=*/true);
      cu.agg = *agg;
      cu.distinct = distinct;
      expect_punct(")");
      operand.column = std::move(cu);
      return operand;
    }
    if (allow_star && t.kind == Token::Kind::Punct && t.lower == "*") {
      ++pos_;
      operand.column.star = true;
      operand.column.column = "*";
      return operand;
    }
    operand.column = parse_column_ref(allow_star);
    return operand;
  }

  ColumnUnit parse_column_ref(bool allow_star) {
    reject_unsupported_keyword();
    ColumnUnit cu;
    if (allow_star && is_punct("*")) {
      ++pos_;
      cu.star = true;
      cu.column = "*";
      return cu;
    }
    const Token& t = peek();
    if (t.kind != Token::Kind::Ident) {
      throw ParseError("syntax error at offset " + std::to_string(t.offset) +
                       ": expected a column reference, found '" +
                       (t.kind == Token::Kind::End ? "end of input" : t.text) +
                       "'");
    }
    std::string first = advance().lower;
    if (accept_punct(".")) {
      cu.table = std::move(first);
      if (is_punct("*")) {
        ++pos_;
        cu.star = true;
        cu.column = "*";
        return cu;
      }
      const Token& col = peek();
      if (col.kind != Token::Kind::Ident) {
        throw ParseError("syntax error at offset " +
                         std::to_string(col.offset) +
                         ": expected a column name after '.'");
      }
      cu.column = advance().lower;
      return cu;
    }
    cu.column = std::move(first);
    return cu;
  }

  void parse_from(Query& q) {
    parse_table_item(q);
    for (;;) {
      if (accept_punct(",")) {
        parse_table_item(q);
        continue;
      }
      if (is_kw("left") || is_kw("right") || is_kw("full") || is_kw("outer") ||
          is_kw("cross") || is_kw("natural")) {
        unsupported(to_lower(peek().text) + " join");
      }
      if (is_kw("inner") || is_kw("join")) {
        accept_kw("inner");
        expect_kw("join");
        parse_table_item(q);
        if (accept_kw("on")) {
          parse_join_condition(q);
          while (accept_kw("and")) parse_join_condition(q);
        }
        continue;
      }
      break;
    }
  }

  void parse_table_item(Query& q) {
    TableRef ref;
    if (accept_punct("(")) {
      if (!is_kw("select")) {
        throw ParseError("syntax error at offset " +
                         std::to_string(peek().offset) +
                         ": expected a subquery in FROM");
      }
      ref.kind = TableRef::Kind::Derived;
      ref.subquery = std::make_unique<Query>(parse_query());
      expect_punct(")");
    } else {
      const Token& t = peek();
      if (t.kind != Token::Kind::Ident || reserved_words().count(t.lower) > 0) {
        throw ParseError("syntax error at offset " + std::to_string(t.offset) +
                         ": expected a table name");
      }
      ref.name = advance().lower;
    }
    if (accept_kw("as")) {
      const Token& t = peek();
      if (t.kind != Token::Kind::Ident) {
        throw ParseError("syntax error at offset " + std::to_string(t.offset) +
                         ": expected an alias after AS");
      }
      ref.alias = advance().lower;
    } else if (peek().kind == Token::Kind::Ident &&
               reserved_words().count(peek().lower) == 0) {
      ref.alias = advance().lower;
    }
    q.from.push_back(std::move(ref));
  }

  void parse_join_condition(Query& q) {
    ColumnUnit left = parse_column_ref(/*allow_star=*/false);
    if (!(peek().kind == Token::Kind::Op && peek().lower == "=")) {
      unsupported("non-equality join condition");
    }
    ++pos_;
    ColumnUnit right = parse_column_ref(/*allow_star=*/false);
    q.join_conditions.emplace_back(std::move(left), std::move(right));
  }

  Condition parse_condition() { return parse_or(); }

  Condition parse_or() {
    Condition first = parse_and();
    if (!is_kw("or")) return first;
    Condition node;
    node.kind = Condition::Kind::Or;
    node.children.push_back(std::move(first));
    while (accept_kw("or")) node.children.push_back(parse_and());
    return node;
  }

  Condition parse_and() {
    Condition first = parse_condition_unit();
    if (!is_kw("and")) return first;
    Condition node;
    node.kind = Condition::Kind::And;
    node.children.push_back(std::move(first));
    while (accept_kw("and")) node.children.push_back(parse_condition_unit());
    return node;
  }

  Condition parse_condition_unit() {
    reject_unsupported_keyword();
    bool negated = accept_kw("not");
    if (is_punct("(") && !is_kw("select", 1)) {
      if (negated) unsupported("NOT over a parenthesized condition");
      expect_punct("(");
      Condition inner = parse_condition();
      expect_punct(")");
      return inner;
    }
    if (is_kw("exists")) {
      ++pos_;
      expect_punct("(");
      Condition leaf;
      leaf.negated = negated;
      leaf.op = CmpOp::Exists;
      Value v;
      v.kind = Value::Kind::Subquery;
      v.subquery = std::make_unique<Query>(parse_query());
      leaf.rhs.push_back(std::move(v));
      expect_punct(")");
      return leaf;
    }
    Condition leaf;
    leaf.negated = negated;
    leaf.lhs = parse_value_unit(/*allow_star=*/false);
    if (is_kw("is")) unsupported("IS [NOT] NULL");
    if (accept_kw("not")) {
      leaf.negated = !leaf.negated;
      if (accept_kw("in")) {
        leaf.op = CmpOp::In;
        parse_in_rhs(leaf);
        return leaf;
      }
      if (accept_kw("like")) {
        leaf.op = CmpOp::Like;
        leaf.rhs.push_back(parse_value());
        return leaf;
      }
      if (accept_kw("between")) {
        leaf.op = CmpOp::Between;
        leaf.rhs.push_back(parse_value());
        expect_kw("and");
        leaf.rhs.push_back(parse_value());
        return leaf;
      }
      throw ParseError("syntax error at offset " +
                       std::to_string(peek().offset) +
                       ": expected IN, LIKE or BETWEEN after NOT");
    }
    if (accept_kw("in")) {
      leaf.op = CmpOp::In;
      parse_in_rhs(leaf);
      return leaf;
    }
    if (accept_kw("like")) {
      leaf.op = CmpOp::Like;
      leaf.rhs.push_back(parse_value());
      return leaf;
    }
    if (accept_kw("between")) {
      leaf.op = CmpOp::Between;
      leaf.rhs.push_back(parse_value());
      expect_kw("and");
      leaf.rhs.push_back(parse_value());
      return leaf;
    }
    const Token& t = peek();
    if (t.kind != Token::Kind::Op) {
      throw ParseError("syntax error at offset " + std::to_string(t.offset) +
                       ": expected a comparison operator, found '" +
                       (t.kind == Token::Kind::End ? "end of input" : t.text) +
                       "'");
    }
    const std::string op = advance().lower;
    if (op == "=") {
      leaf.op = CmpOp::Eq;
    } else if (op == "!=") {
      leaf.op = CmpOp::Ne;
    } else if (op == "<") {
      leaf.op = CmpOp::Lt;
    } else if (op == ">") {
      leaf.op = CmpOp::Gt;
    } else if (op == "<=") {
      leaf.op = CmpOp::Le;
    } else if (op == ">=") {
      leaf.op = CmpOp::Ge;
    } else {
      throw ParseError("syntax error at offset " + std::to_string(t.offset) +
                       ": unknown operator '" + op + "'");
    }
    leaf.rhs.push_back(parse_value());
    return leaf;
  }

  void parse_in_rhs(Condition& leaf) {
    expect_punct("(");
    if (is_kw("select")) {
      Value v;
      v.kind = Value::Kind::Subquery;
      v.subquery = std::make_unique<Query>(parse_query());
      leaf.rhs.push_back(std::move(v));
    } else {
      leaf.rhs.push_back(parse_value());
      while (accept_punct(",")) leaf.rhs.push_back(parse_value());
    }
    expect_punct(")");
  }

  Value parse_value() {
    reject_unsupported_keyword();
    Value v;
    const Token& t = peek();
    if (accept_punct("(")) {
      if (!is_kw("select")) {
        throw ParseError("syntax error at offset " + std::to_string(t.offset) +
                         ": expected a subquery");
      }
      v.kind = Value::Kind::Subquery;
      v.subquery = std::make_unique<Query>(parse_query());
      expect_punct(")");
      return v;
    }
    if (t.kind == Token::Kind::Number || t.kind == Token::Kind::String) {
      v.kind = Value::Kind::Literal;
      v.literal = advance().text;
      return v;
    }
    if (t.kind == Token::Kind::Punct && t.lower == "-" &&
        peek(1).kind == Token::Kind::Number) {
      ++pos_;
      v.kind = Value::Kind::Literal;
      v.literal = "-" + advance().text;
      return v;
    }
    if (t.kind == Token::Kind::Ident) {
      v.kind = Value::Kind::Column;
      v.column = parse_column_ref(/*allow_star=*/false);
      return v;
    }
    throw ParseError("syntax error at offset " + std::to_string(t.offset) +
                     ": expected a value, found '" +
                     (t.kind == Token::Kind::End ? "end of input" : t.text) +
                     "'");
  }

  // ---- resolution ----

  void resolve_query(Query& q, std::vector<const Scope*>& outer) {
    Scope scope;
    int derived_count = 0;
    for (TableRef& ref : q.from) {
      ScopeEntry entry;
      if (ref.kind == TableRef::Kind::Derived) {
        resolve_query(*ref.subquery, outer);
        entry.derived = true;
        entry.canonical = "#d" + std::to_string(derived_count++);
        ref.name = entry.canonical;
        entry.alias = ref.alias;  // may be empty; then unreachable by name
      } else {
        const auto table_index = schema_.find_table(ref.name);
        if (!table_index) {
          throw ResolutionError("unknown table '" + ref.name + "' in " +
                                schema_.db_id);
        }
        entry.table_index = *table_index;
        entry.canonical =
            to_lower(schema_.tables[static_cast<std::size_t>(*table_index)].name);
        ref.name = entry.canonical;
        entry.alias = ref.alias.empty() ? entry.canonical : ref.alias;
      }
      scope.push_back(std::move(entry));
    }
    std::vector<const Scope*> scopes = outer;
    scopes.push_back(&scope);

    for (SelectTerm& term : q.select) resolve_value_unit(term.value, scopes);
    for (auto& [left, right] : q.join_conditions) {
      resolve_column(left, scopes);
      resolve_column(right, scopes);
    }
    if (q.where) resolve_condition(*q.where, scopes);
    for (ColumnUnit& cu : q.group_by) resolve_column(cu, scopes);
    if (q.having) resolve_condition(*q.having, scopes);
    for (OrderTerm& term : q.order_by) resolve_value_unit(term.value, scopes);
    if (q.set_rhs) resolve_query(*q.set_rhs, outer);
  }

  void resolve_condition(Condition& c, std::vector<const Scope*>& scopes) {
    if (c.kind != Condition::Kind::Leaf) {
      for (Condition& child : c.children) resolve_condition(child, scopes);
      return;
    }
    if (c.op != CmpOp::Exists) resolve_value_unit(c.lhs, scopes);
    for (Value& v : c.rhs) {
      if (v.kind == Value::Kind::Column) {
        resolve_column(v.column, scopes);
      } else if (v.kind == Value::Kind::Subquery) {
        resolve_query(*v.subquery, scopes);
      }
    }
  }

  void resolve_value_unit(ValueUnit& unit, std::vector<const Scope*>& scopes) {
    resolve_operand(unit.first, scopes);
    if (unit.op != ArithOp::None) resolve_operand(unit.second, scopes);
  }

  void resolve_operand(Operand& operand, std::vector<const Scope*>& scopes) {
    if (!operand.is_literal) resolve_column(operand.column, scopes);
  }

  void resolve_column(ColumnUnit& cu, std::vector<const Scope*>& scopes) {
    if (cu.star && cu.table.empty()) return;
    if (!cu.table.empty()) {
      // qualified: find the alias in the nearest scope
      for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
        for (const ScopeEntry& entry : **it) {
          if (entry.alias != cu.table) continue;
          cu.table = entry.canonical;
          if (!cu.star && !entry.derived) {
            if (!schema_.find_column(entry.table_index, cu.column)) {
              throw ResolutionError("column '" + cu.column +
                                    "' not found in table '" +
                                    entry.canonical + "'");
            }
          }
          return;
        }
      }
      throw ResolutionError("unknown table or alias '" + cu.table + "'");
    }
    // unqualified: first named table (in FROM order, innermost scope first)
    // that declares the column
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      for (const ScopeEntry& entry : **it) {
        if (entry.derived) continue;
        if (schema_.find_column(entry.table_index, cu.column)) {
          cu.table = entry.canonical;
          return;
        }
      }
    }
    // fall back to a derived table in the innermost scope
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      for (const ScopeEntry& entry : **it) {
        if (entry.derived) {
          cu.table = entry.canonical;
          return;
        }
      }
    }
    throw ResolutionError("column '" + cu.column +
                          "' does not resolve against any table in scope");
  }

  std::vector<Token> tokens_;
  const SchemaDb& schema_;
  std::size_t pos_ = 0;
};

}  // namespace

Query parse_sql(std::string_view sql, const SchemaDb& schema) {
  return Parser(sql, schema).parse();
}

bool has_top_level_order_by(std::string_view sql) {
  int depth = 0;
  std::size_t i = 0;
  while (i < sql.size()) {
    const char c = sql[i];
    if (c == '\'' || c == '"') {
      ++i;
      while (i < sql.size()) {
        if (sql[i] == '\\' && i + 1 < sql.size()) {
          i += 2;
          continue;
        }
        if (sql[i] == c) {
          ++i;
          break;
        }
        ++i;
      }
      continue;
    }
    if (c == '(') {
      ++depth;
      ++i;
      continue;
    }
    if (c == ')') {
      --depth;
      ++i;
      continue;
    }
    if (depth == 0 && (c == 'o' || c == 'O')) {
      const bool left_ok = i == 0 || !is_ident_char(sql[i - 1]);
      if (left_ok && sql.size() - i >= 5 &&
          iequals(sql.substr(i, 5), "order") &&
          (i + 5 == sql.size() || !is_ident_char(sql[i + 5]))) {
        return true;
      }
    }
    ++i;
  }
  return false;
}

}  // namespace semfence::sql
