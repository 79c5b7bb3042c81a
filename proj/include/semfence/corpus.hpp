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
#ifndef SEMFENCE_CORPUS_HPP
#define SEMFENCE_CORPUS_HPP

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semfence/marker.hpp"
#include "semfence/text.hpp"

namespace semfence {

enum class ColumnType { Text, Number, Time, Boolean, Others };

ColumnType column_type_from_string(std::string_view s);
std::string_view to_string(ColumnType t);

// (table index, column index) into SchemaDb::tables.
struct ColumnRef {
  int table = -1;
  int column = -1;
  auto operator<=>(const ColumnRef&) const = default;
};

struct ColumnDef {
  std::string name;
  ColumnType type = ColumnType::Others;
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;
};

struct SchemaDb {
  std::string db_id;
  std::vector<TableDef> tables;
  std::vector<ColumnRef> primary_keys;
  std::vector<std::pair<ColumnRef, ColumnRef>> foreign_keys;
  // Distinct cell values per column, lexicographic, capped (see kContentCap).
  std::map<ColumnRef, std::vector<std::string>> content_index;

  const TableDef& table_at(ColumnRef ref) const;
  const ColumnDef& column_at(ColumnRef ref) const;
  std::optional<int> find_table(std::string_view name) const;
  std::optional<ColumnRef> find_column(int table, std::string_view name) const;
};

struct ParallelExample {
  std::string question;
  std::string target;
  std::string db_id;
  std::optional<std::vector<ComponentAlignment>> alignments;
};

inline constexpr std::size_t kContentCap = 5000;

// Spider tables.json. Throws ParseError (with byte offset) on malformed
// JSON and ValidationError (naming the db_id) on dangling key references
// or duplicate names.
std::vector<SchemaDb> load_schemas(const std::string& path);

// Spider train/dev-style examples (question, query, db_id; other keys
// ignored). The schema-checked overload throws on an unknown db_id, naming
// the example index.
std::vector<ParallelExample> load_examples(const std::string& path);
std::vector<ParallelExample> load_examples(const std::string& path,
                                           const std::vector<SchemaDb>& schemas);

// Writes the toolkit's own examples format (a load_examples fixpoint).
void save_examples(const std::string& path,
                   const std::vector<ParallelExample>& examples);

// Component annotation file: [{example_index, components: [{nl, out:[...]}]}].
// NL fragments must tile the question (whitespace-insensitively); output
// fragments bind to the leftmost unbound occurrence. Spans are reported
// against the original strings. NL-only components are accepted and noted in
// diagnostics.
std::vector<ParallelExample> load_component_annotations(
    const std::string& path, std::vector<ParallelExample> examples,
    std::vector<std::string>* diagnostics = nullptr);

std::string database_path(const std::string& db_root, const std::string& db_id);

// Up to k distinct values of one column, lexicographic; cached in
// content_index on first use. Throws EnvironmentError when the database file
// is missing and ValidationError on an unknown column.
std::vector<std::string> sample_column_contents(SchemaDb& db,
                                                const std::string& db_root,
                                                ColumnRef column,
                                                std::size_t k);

// Fills content_index for every text-typed column (value grounding input).
void populate_content_index(SchemaDb& db, const std::string& db_root);

const SchemaDb& schema_by_id(const std::vector<SchemaDb>& schemas,
                             std::string_view db_id);

}  // namespace semfence

#endif  // SEMFENCE_CORPUS_HPP
