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
#include <doctest.h>

#include "em_fixture.hpp"
#include "semfence/eval.hpp"
#include "sql_oracle.hpp"
#include "testing.hpp"

using namespace semfence;

TEST_CASE("exact match basics") {
  const SchemaDb schema = test::school_schema();
  const std::string gold = "SELECT count(*) FROM head WHERE head.age > 56";
  // reflexivity
  EvalOutcome same = exact_match(gold, gold, schema);
  CHECK(same.em);
  for (const auto& [clause, ok] : same.clause_breakdown) {
    CAPTURE(clause);
    CHECK(ok);
  }
  // projection is a set
  CHECK(exact_match("SELECT name, age FROM head", "SELECT age, name FROM head",
                    schema)
            .em);
  // value placeholders
  const std::string changed = "SELECT count(*) FROM head WHERE head.age > 60";
  CHECK(exact_match(changed, gold, schema, {.compare_values = false}).em);
  CHECK_FALSE(exact_match(changed, gold, schema, {.compare_values = true}).em);
}

TEST_CASE("exact match invariances") {
  const SchemaDb schema = test::school_schema();
  // alias renaming
  CHECK(exact_match("SELECT a.name FROM head AS a WHERE a.age > 5",
                    "SELECT b.name FROM head AS b WHERE b.age > 5", schema,
                    {.compare_values = true})
            .em);
  // conjunct reordering
  CHECK(exact_match(
            "SELECT name FROM head WHERE age > 5 AND born_state = 'Ohio'",
            "SELECT name FROM head WHERE born_state = 'Ohio' AND age > 5",
            schema, {.compare_values = true})
            .em);
  // keyword case
  CHECK(exact_match("select COUNT(*) from HEAD", "SELECT count(*) FROM head",
                    schema)
            .em);
  // group-by reordering
  CHECK(exact_match(
            "SELECT count(*) FROM head GROUP BY born_state, department_id",
            "SELECT count(*) FROM head GROUP BY department_id, born_state",
            schema)
            .em);
  // order_by stays ordered
  CHECK_FALSE(exact_match("SELECT name FROM head ORDER BY name, age",
                          "SELECT name FROM head ORDER BY age, name", schema)
                  .em);
}

TEST_CASE("parse failures fold into the outcome") {
  const SchemaDb schema = test::school_schema();
  const EvalOutcome bad_pred =
      exact_match("SELECT FROM nothing", "SELECT name FROM head", schema);
  CHECK_FALSE(bad_pred.em);
  REQUIRE(bad_pred.error.has_value());
  CHECK(bad_pred.error->find("pred") != std::string::npos);
  for (const auto& [clause, ok] : bad_pred.clause_breakdown) {
    CAPTURE(clause);
    CHECK_FALSE(ok);
  }
  const EvalOutcome bad_gold =
      exact_match("SELECT name FROM head", "garbage here", schema);
  CHECK_FALSE(bad_gold.em);
  REQUIRE(bad_gold.error.has_value());
  CHECK(bad_gold.error->find("gold") != std::string::npos);
}

TEST_CASE("clause breakdown pinpoints the difference") {
  const SchemaDb schema = test::school_schema();
  const EvalOutcome o = exact_match(
      "SELECT name FROM head WHERE age > 5 LIMIT 3",
      "SELECT name FROM head WHERE age > 5 LIMIT 4", schema);
  CHECK_FALSE(o.em);
  CHECK(o.clause_breakdown.at("select"));
  CHECK(o.clause_breakdown.at("where"));
  CHECK_FALSE(o.clause_breakdown.at("limit"));
}

TEST_CASE("em implies every clause matched") {
  const std::vector<SchemaDb> schemas{test::school_schema(),
                                      test::concerts_schema(),
                                      test::flights_schema()};
  for (const test::EmCase& c : test::em_fixture_cases()) {
    const SchemaDb& schema = schemas[c.schema_index];
    for (const bool values : {false, true}) {
      const EvalOutcome o =
          exact_match(c.pred, c.gold, schema, {.compare_values = values});
      if (o.em) {
        for (const auto& [clause, ok] : o.clause_breakdown) {
          CAPTURE(c.pred);
          CHECK(ok);
        }
      }
    }
  }
}

TEST_CASE("exact match agrees with the brute-force oracle on every fixture") {
  const std::vector<SchemaDb> schemas{test::school_schema(),
                                      test::concerts_schema(),
                                      test::flights_schema()};
  const std::vector<test::EmCase> cases = test::em_fixture_cases();
  REQUIRE(cases.size() >= 50);
  for (const test::EmCase& c : cases) {
    const SchemaDb& schema = schemas[c.schema_index];
    const sql::Query pred = sql::parse_sql(c.pred, schema);
    const sql::Query gold = sql::parse_sql(c.gold, schema);
    for (const bool values : {false, true}) {
      const bool expected = values ? c.em_with_values : c.em_without_values;
      const bool oracle_verdict = test::oracle::equiv_query(pred, gold, values);
      const bool em =
          exact_match(c.pred, c.gold, schema, {.compare_values = values}).em;
      CAPTURE(c.pred);
      CAPTURE(c.gold);
      CAPTURE(values);
      CHECK(oracle_verdict == expected);
      REQUIRE(em == oracle_verdict);
    }
  }
}

TEST_CASE("em is reflexive and symmetric across the fixture") {
  const std::vector<SchemaDb> schemas{test::school_schema(),
                                      test::concerts_schema(),
                                      test::flights_schema()};
  for (const test::EmCase& c : test::em_fixture_cases()) {
    const SchemaDb& schema = schemas[c.schema_index];
    CHECK(exact_match(c.gold, c.gold, schema, {.compare_values = true}).em);
    CHECK(exact_match(c.pred, c.pred, schema, {.compare_values = true}).em);
    CHECK(exact_match(c.pred, c.gold, schema).em ==
          exact_match(c.gold, c.pred, schema).em);
  }
}
