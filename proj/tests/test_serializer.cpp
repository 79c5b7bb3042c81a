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

#include "semfence/error.hpp"
#include "semfence/serializer.hpp"
#include "testing.hpp"

using namespace semfence;

namespace {

// Matches the serialization shown for the running example: one database,
// one table, three snake-case columns.
SchemaDb table1_schema() {
  return test::make_schema(
      "department_management",
      {{"department",
        {{"id", ColumnType::Number},
         {"budget_in_billions", ColumnType::Number},
         {"num_employees", ColumnType::Number}}}});
}

ParallelExample table1_example() {
  ParallelExample ex;
  ex.question = "How many heads of the departments are older than 56 ?";
  ex.target = "select count ( head.* ) where head.age > 56";
  ex.db_id = "department_management";
  const auto span = [](const std::string& text, const std::string& part) {
    return Span{text.find(part), text.find(part) + part.size()};
  };
  ex.alignments = std::vector<ComponentAlignment>{
      {0,
       {span(ex.question, "How many heads of the departments")},
       {span(ex.target, "select count ( head.* )")}},
      {1,
       {span(ex.question, "are older than 56 ?")},
       {span(ex.target, "where head.age > 56")}}};
  return ex;
}

}  // namespace

TEST_CASE("ground_values finds mentioned cell values") {
  SchemaDb db = test::make_schema(
      "flights", {{"flight", {{"origin", ColumnType::Text},
                              {"destination", ColumnType::Text}}}});
  db.content_index[{0, 0}] = {"Chicago", "New York", "Boston"};
  db.content_index[{0, 1}] = {"Denver", "Los Angeles"};

  SUBCASE("exact containment") {
    const auto groundings =
        ground_values("flights where origin = New York please", db);
    REQUIRE(groundings.size() == 1);
    CHECK(groundings[0].column == ColumnRef{0, 0});
    CHECK(groundings[0].value == "New York");
  }

  SUBCASE("no shared n-gram gives nothing") {
    CHECK(ground_values("how many heads are there", db).empty());
  }

  SUBCASE("fuzzy match at the documented ratio") {
    // lcs("new yorke", "new york") = 8, max length 9: score 8/9 ~ 0.889
    const auto hit = ground_values("new yorke", db, 0.85);
    REQUIRE(hit.size() == 1);
    CHECK(hit[0].value == "New York");
    CHECK(ground_values("new yorke", db, 0.90).empty());
  }

  SUBCASE("at most one value per column, capped columns") {
    SchemaDb wide = test::make_schema(
        "w", {{"t", {{"a", ColumnType::Text},
                     {"b", ColumnType::Text},
                     {"c", ColumnType::Text},
                     {"d", ColumnType::Text}}}});
    for (int c = 0; c < 4; ++c) {
      wide.content_index[{0, c}] = {"common phrase"};
    }
    const auto groundings = ground_values("a common phrase appears", wide);
    CHECK(groundings.size() == 3);  // longest matches win, 3-column cap
  }

  SUBCASE("non-text columns are not grounded") {
    SchemaDb numeric = test::make_schema(
        "n", {{"t", {{"age", ColumnType::Number}}}});
    numeric.content_index[{0, 0}] = {"56"};
    CHECK(ground_values("people older than 56", numeric).empty());
  }
}

TEST_CASE("serialize_input renders the flat schema format") {
  const SchemaDb db = table1_schema();
  CHECK(serialize_input("How many?", db) ==
        "How many? | department_management | department : id , "
        "budget_in_billions , num_employees");
  // preprocessing passes schema names through the snake-case rule
  CHECK(serialize_input("How many heads of the departments are older than "
                        "56 ?",
                        db, {}, /*preprocess=*/true) ==
        "How many heads of the departments are older than 56 ? | department "
        "_ management | department : id , budget _ in _ billions , num _ "
        "employees");
  // zero tables
  const SchemaDb bare = test::make_schema("tiny", {});
  CHECK(serialize_input("q", bare) == "q | tiny");
}

TEST_CASE("grounded columns carry a parenthesized value") {
  SchemaDb db = test::make_schema(
      "world", {{"t1", {{"c1", ColumnType::Text}, {"c2", ColumnType::Text}}}});
  const std::vector<Grounding> groundings{{{0, 0}, "New York", 8}};
  CHECK(serialize_input("q", db, groundings) ==
        "q | world | t1 : c1 ( New York ) , c2");
}

TEST_CASE("grounding suffix removal recovers the ungrounded serialization") {
  SchemaDb db = test::make_schema(
      "world", {{"t1", {{"c1", ColumnType::Text}, {"c2", ColumnType::Text}}},
                {"t2", {{"c3", ColumnType::Text}}}});
  const std::vector<Grounding> groundings{{{0, 1}, "va l", 3},
                                          {{1, 0}, "w", 1}};
  std::string grounded = serialize_input("q", db, groundings);
  const std::string plain = serialize_input("q", db);
  for (const Grounding& g : groundings) {
    const std::string suffix = " ( " + g.value + " )";
    const std::size_t at = grounded.find(suffix);
    REQUIRE(at != std::string::npos);
    grounded.erase(at, suffix.size());
  }
  CHECK(grounded == plain);
}

TEST_CASE("build_model_pair pipelines") {
  const SchemaDb db = table1_schema();
  const ParallelExample ex = table1_example();

  SUBCASE("all options off is the identity pipeline") {
    PairOptions options;
    options.preprocess = false;
    options.mark = false;
    options.ground = false;
    const ModelPair pair = build_model_pair(ex, db, options);
    CHECK(pair.source ==
          "How many heads of the departments are older than 56 ? | "
          "department_management | department : id , budget_in_billions , "
          "num_employees");
    CHECK(pair.target == ex.target);
  }

  SUBCASE("preprocess only reproduces the schema and SQL rewrites") {
    PairOptions options;
    options.mark = false;
    options.ground = false;
    const ModelPair pair = build_model_pair(ex, db, options);
    CHECK(pair.source ==
          "How many heads of the departments are older than 56 ? | "
          "department _ management | department : id , budget _ in _ "
          "billions , num _ employees");
    CHECK(pair.target == "select count ( head . * ) where head . age > 56");
  }

  SUBCASE("mark only reproduces the marked pair") {
    PairOptions options;
    options.preprocess = false;
    options.ground = false;
    const ModelPair pair = build_model_pair(ex, db, options);
    CHECK(pair.source ==
          "[sep0] How many heads of the departments [/sep0] [sep1] are older "
          "than 56 ? [/sep1] | department_management | department : id , "
          "budget_in_billions , num_employees");
    CHECK(pair.target ==
          "[sep0] select count ( head.* ) [/sep0] [sep1] where head.age > 56 "
          "[/sep1]");
  }

  SUBCASE("marking precedes preprocessing; markers stay intact") {
    PairOptions options;
    options.ground = false;
    const ModelPair pair = build_model_pair(ex, db, options);
    CHECK(pair.source ==
          "[sep0] How many heads of the departments [/sep0] [sep1] are older "
          "than 56 ? [/sep1] | department _ management | department : id , "
          "budget _ in _ billions , num _ employees");
    CHECK(pair.target ==
          "[sep0] select count ( head . * ) [/sep0] [sep1] where head . age "
          "> 56 [/sep1]");
  }

  SUBCASE("marking without alignments is a configuration error") {
    ParallelExample bare = ex;
    bare.alignments.reset();
    PairOptions options;
    options.ground = false;
    CHECK_THROWS_AS(build_model_pair(bare, db, options), ConfigError);
  }

  SUBCASE("grounded value lands in the marked, preprocessed source") {
    SchemaDb grounded_db = test::make_schema(
        "flights", {{"flight", {{"origin", ColumnType::Text}}}});
    grounded_db.content_index[{0, 0}] = {"New York"};
    ParallelExample mention;
    mention.question = "flights from New York";
    mention.target = "select * where flight.origin = 'New York'";
    mention.db_id = "flights";
    PairOptions options;
    options.mark = false;
    const ModelPair pair = build_model_pair(mention, grounded_db, options);
    CHECK(pair.source ==
          "flights from New York | flights | flight : origin ( New York )");
    CHECK(pair.target ==
          "select * where flight . origin = 'New York'");
  }
}

TEST_CASE("source format grammar and marker-free schema") {
  const SchemaDb schemas[] = {table1_schema(), test::school_schema(),
                              test::flights_schema()};
  for (const SchemaDb& db : schemas) {
    const std::string source = serialize_input("a question", db);
    // grammar: Q | DB ( | TABLE : COL ( , COL )* )*
    const std::size_t first_bar = source.find(" | ");
    REQUIRE(first_bar != std::string::npos);
    std::size_t pos = first_bar + 3;
    std::vector<std::string> sections;
    while (pos < source.size()) {
      const std::size_t next = source.find(" | ", pos);
      sections.push_back(source.substr(
          pos, next == std::string::npos ? next : next - pos));
      if (next == std::string::npos) break;
      pos = next + 3;
    }
    REQUIRE(!sections.empty());
    CHECK(sections[0] == db.db_id);
    for (std::size_t t = 1; t < sections.size(); ++t) {
      const std::size_t colon = sections[t].find(" : ");
      REQUIRE(colon != std::string::npos);
      CHECK(sections[t].substr(0, colon) == db.tables[t - 1].name);
      CHECK(sections[t].find("[sep") == std::string::npos);
    }
  }
}
