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
#include "semfence/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <json.hpp>

#include "semfence/error.hpp"
#include "sqlite_util.hpp"

namespace semfence {

using nlohmann::json;

ColumnType column_type_from_string(std::string_view s) {
  if (s == "text") return ColumnType::Text;
  if (s == "number") return ColumnType::Number;
  if (s == "time") return ColumnType::Time;
  if (s == "boolean") return ColumnType::Boolean;
  return ColumnType::Others;
}

std::string_view to_string(ColumnType t) {
  switch (t) {
    case ColumnType::Text:
      return "text";
    case ColumnType::Number:
      return "number";
    case ColumnType::Time:
      return "time";
    case ColumnType::Boolean:
      return "boolean";
    case ColumnType::Others:
      return "others";
  }
  return "others";
}

const TableDef& SchemaDb::table_at(ColumnRef ref) const {
  if (ref.table < 0 || ref.table >= static_cast<int>(tables.size())) {
    throw ValidationError(db_id + ": table index " + std::to_string(ref.table) +
                          " out of range");
  }
  return tables[static_cast<std::size_t>(ref.table)];
}

const ColumnDef& SchemaDb::column_at(ColumnRef ref) const {
  const TableDef& table = table_at(ref);
  if (ref.column < 0 || ref.column >= static_cast<int>(table.columns.size())) {
    throw ValidationError(db_id + ": column index " +
                          std::to_string(ref.column) + " out of range in " +
                          table.name);
  }
  return table.columns[static_cast<std::size_t>(ref.column)];
}

std::optional<int> SchemaDb::find_table(std::string_view name) const {
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (iequals(tables[i].name, name)) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::optional<ColumnRef> SchemaDb::find_column(int table,
                                               std::string_view name) const {
  if (table < 0 || table >= static_cast<int>(tables.size())) return std::nullopt;
  const TableDef& t = tables[static_cast<std::size_t>(table)];
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (iequals(t.columns[c].name, name)) {
      return ColumnRef{table, static_cast<int>(c)};
    }
  }
  return std::nullopt;
}

const SchemaDb& schema_by_id(const std::vector<SchemaDb>& schemas,
                             std::string_view db_id) {
  for (const SchemaDb& db : schemas) {
    if (db.db_id == db_id) return db;
  }
  throw ValidationError("unknown db_id '" + std::string(db_id) + "'");
}

namespace {

json parse_json_file(const std::string& path) {
  const std::string data = read_file(path);
  try {
    return json::parse(data);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": parse error at byte " + std::to_string(e.byte) +
                     ": " + e.what());
  }
}

}  // namespace

std::vector<SchemaDb> load_schemas(const std::string& path) {
  const json doc = parse_json_file(path);
  if (!doc.is_array()) {
    throw ParseError(path + ": expected a top-level array of databases");
  }
  std::vector<SchemaDb> schemas;
  schemas.reserve(doc.size());
  for (const json& entry : doc) {
    SchemaDb db;
    try {
      db.db_id = entry.at("db_id").get<std::string>();
      for (const json& t : entry.at("table_names_original")) {
        db.tables.push_back({t.get<std::string>(), {}});
      }
      const json& columns = entry.at("column_names_original");
      const json* types = entry.contains("column_types")
                              ? &entry.at("column_types")
                              : nullptr;
      // Global column index (Spider layout, with the leading [-1, "*"]) to
      // our (table, column) references, for translating key lists.
      std::vector<ColumnRef> global;
      global.reserve(columns.size());
      for (std::size_t i = 0; i < columns.size(); ++i) {
        const json& c = columns[i];
        const int table_index = c.at(0).get<int>();
        const std::string name = c.at(1).get<std::string>();
        if (table_index < 0) {
          global.push_back({-1, -1});  // the "*" pseudo-column
          continue;
        }
        if (table_index >= static_cast<int>(db.tables.size())) {
          throw ValidationError(db.db_id + ": column '" + name +
                                "' references missing table index " +
                                std::to_string(table_index));
        }
        ColumnDef col;
        col.name = name;
        if (types != nullptr && i < types->size()) {
          col.type = column_type_from_string((*types)[i].get<std::string>());
        }
        TableDef& table = db.tables[static_cast<std::size_t>(table_index)];
        global.push_back(
            {table_index, static_cast<int>(table.columns.size())});
        table.columns.push_back(std::move(col));
      }
      const auto resolve_key = [&](int global_index) {
        if (global_index <= 0 ||
            global_index >= static_cast<int>(global.size()) ||
            global[static_cast<std::size_t>(global_index)].table < 0) {
          throw ValidationError(db.db_id + ": key references column index " +
                                std::to_string(global_index) +
                                " which is not a declared column");
        }
        return global[static_cast<std::size_t>(global_index)];
      };
      if (entry.contains("primary_keys")) {
        for (const json& pk : entry.at("primary_keys")) {
          db.primary_keys.push_back(resolve_key(pk.get<int>()));
        }
      }
      if (entry.contains("foreign_keys")) {
        for (const json& fk : entry.at("foreign_keys")) {
          db.foreign_keys.emplace_back(resolve_key(fk.at(0).get<int>()),
                                       resolve_key(fk.at(1).get<int>()));
        }
      }
    } catch (const json::exception& e) {
      throw ParseError(path + ": malformed schema entry" +
                       (db.db_id.empty() ? "" : " for '" + db.db_id + "'") +
                       ": " + e.what());
    }
    for (std::size_t a = 0; a < db.tables.size(); ++a) {
      for (std::size_t b = a + 1; b < db.tables.size(); ++b) {
        if (iequals(db.tables[a].name, db.tables[b].name)) {
          throw ValidationError(db.db_id + ": duplicate table name '" +
                                db.tables[a].name + "'");
        }
      }
      const auto& cols = db.tables[a].columns;
      for (std::size_t x = 0; x < cols.size(); ++x) {
        for (std::size_t y = x + 1; y < cols.size(); ++y) {
          if (iequals(cols[x].name, cols[y].name)) {
            throw ValidationError(db.db_id + ": duplicate column name '" +
                                  cols[x].name + "' in table " +
                                  db.tables[a].name);
          }
        }
      }
    }
    schemas.push_back(std::move(db));
  }
  return schemas;
}

std::vector<ParallelExample> load_examples(const std::string& path) {
  const json doc = parse_json_file(path);
  if (!doc.is_array()) {
    throw ParseError(path + ": expected a top-level array of examples");
  }
  std::vector<ParallelExample> examples;
  examples.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& entry = doc[i];
    ParallelExample ex;
    try {
      ex.question = entry.at("question").get<std::string>();
      ex.target = entry.at("query").get<std::string>();
      ex.db_id = entry.at("db_id").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError(path + ": example " + std::to_string(i) + ": " +
                       e.what());
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

std::vector<ParallelExample> load_examples(
    const std::string& path, const std::vector<SchemaDb>& schemas) {
  std::vector<ParallelExample> examples = load_examples(path);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const std::string& db_id = examples[i].db_id;
    const bool known =
        std::any_of(schemas.begin(), schemas.end(),
                    [&](const SchemaDb& db) { return db.db_id == db_id; });
    if (!known) {
      throw ValidationError("example " + std::to_string(i) +
                            ": unknown db_id '" + db_id + "'");
    }
  }
  return examples;
}

void save_examples(const std::string& path,
                   const std::vector<ParallelExample>& examples) {
  json doc = json::array();
  for (const ParallelExample& ex : examples) {
    doc.push_back(
        {{"question", ex.question}, {"query", ex.target}, {"db_id", ex.db_id}});
  }
  write_file(path, doc.dump(2) + "\n");
}

namespace {

// One side of a string with whitespace removed, keeping original positions.
struct CompactText {
  std::string bytes;
  std::vector<std::size_t> positions;

  explicit CompactText(std::string_view s) {
    bytes.reserve(s.size());
    positions.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!is_ascii_space(s[i])) {
        bytes.push_back(s[i]);
        positions.push_back(i);
      }
    }
  }

  Span original_span(std::size_t begin, std::size_t end) const {
    return {positions[begin], positions[end - 1] + 1};
  }
};

}  // namespace

std::vector<ParallelExample> load_component_annotations(
    const std::string& path, std::vector<ParallelExample> examples,
    std::vector<std::string>* diagnostics) {
  const json doc = parse_json_file(path);
  if (!doc.is_array()) {
    throw ParseError(path + ": expected a top-level array of annotations");
  }
  for (const json& entry : doc) {
    std::size_t example_index = 0;
    try {
      example_index = entry.at("example_index").get<std::size_t>();
    } catch (const json::exception& e) {
      throw ParseError(path + ": bad annotation entry: " + e.what());
    }
    if (example_index >= examples.size()) {
      throw ValidationError("annotation references example " +
                            std::to_string(example_index) + " but only " +
                            std::to_string(examples.size()) + " were loaded");
    }
    ParallelExample& ex = examples[example_index];
    const std::string at =
        "example " + std::to_string(example_index) + ": ";
    const CompactText question(ex.question);
    const CompactText target(ex.target);
    std::vector<bool> bound(target.bytes.size(), false);
    std::vector<ComponentAlignment> alignments;
    std::size_t cursor = 0;  // into question.bytes
    const json& components = entry.contains("components")
                                 ? entry.at("components")
                                 : json::array();
    for (std::size_t k = 0; k < components.size(); ++k) {
      const json& comp = components[k];
      ComponentAlignment alignment;
      alignment.index = static_cast<int>(k);
      std::string nl_fragment;
      std::vector<std::string> out_fragments;
      try {
        nl_fragment = comp.at("nl").get<std::string>();
        if (comp.contains("out")) {
          out_fragments = comp.at("out").get<std::vector<std::string>>();
        }
      } catch (const json::exception& e) {
        throw ParseError(path + ": " + at + "component " + std::to_string(k) +
                         ": " + e.what());
      }
      const CompactText fragment(nl_fragment);
      if (fragment.bytes.empty()) {
        throw AlignmentError(at + "component " + std::to_string(k) +
                             ": empty NL fragment");
      }
      if (question.bytes.compare(cursor, fragment.bytes.size(),
                                 fragment.bytes) != 0) {
        throw AlignmentError(at + "component " + std::to_string(k) +
                             ": NL fragment \"" + nl_fragment +
                             "\" does not continue the question");
      }
      alignment.nl_segments.push_back(
          question.original_span(cursor, cursor + fragment.bytes.size()));
      cursor += fragment.bytes.size();

      for (const std::string& out_fragment : out_fragments) {
        const CompactText needle(out_fragment);
        if (needle.bytes.empty()) {
          throw AlignmentError(at + "component " + std::to_string(k) +
                               ": empty output fragment");
        }
        // Leftmost occurrence whose positions are all still unbound.
        std::size_t found = std::string::npos;
        for (std::size_t s = 0;
             needle.bytes.size() <= target.bytes.size() &&
             s + needle.bytes.size() <= target.bytes.size();
             ++s) {
          if (target.bytes.compare(s, needle.bytes.size(), needle.bytes) != 0) {
            continue;
          }
          bool free = true;
          for (std::size_t p = s; p < s + needle.bytes.size(); ++p) {
            if (bound[p]) {
              free = false;
              break;
            }
          }
          if (free) {
            found = s;
            break;
          }
        }
        if (found == std::string::npos) {
          throw AlignmentError(at + "component " + std::to_string(k) +
                               ": output fragment \"" + out_fragment +
                               "\" not found in target");
        }
        for (std::size_t p = found; p < found + needle.bytes.size(); ++p) {
          bound[p] = true;
        }
        alignment.out_segments.push_back(
            target.original_span(found, found + needle.bytes.size()));
      }
      if (alignment.out_segments.empty() && diagnostics != nullptr) {
        diagnostics->push_back(at + "component " + std::to_string(k) +
                               " is NL-only (no output fragments)");
      }
      alignments.push_back(std::move(alignment));
    }
    if (cursor != question.bytes.size()) {
      throw AlignmentError(at +
                           "NL fragments do not cover the whole question");
    }
    ex.alignments = std::move(alignments);
  }
  return examples;
}

std::string database_path(const std::string& db_root, const std::string& db_id) {
  const std::filesystem::path p =
      std::filesystem::path(db_root) / db_id / (db_id + ".sqlite");
  return p.string();
}

std::vector<std::string> sample_column_contents(SchemaDb& db,
                                                const std::string& db_root,
                                                ColumnRef column,
                                                std::size_t k) {
  const TableDef& table = db.table_at(column);
  const ColumnDef& col = db.column_at(column);
  auto it = db.content_index.find(column);
  if (it == db.content_index.end()) {
    const std::string path = database_path(db_root, db.db_id);
    if (!std::filesystem::exists(path)) {
      throw EnvironmentError("database file missing: " + path);
    }
    SqliteDb conn(path);
    const std::string sql = "SELECT DISTINCT CAST(" + quote_ident(col.name) +
                            " AS TEXT) AS v FROM " + quote_ident(table.name) +
                            " WHERE " + quote_ident(col.name) +
                            " IS NOT NULL ORDER BY v LIMIT " +
                            std::to_string(kContentCap);
    std::vector<std::string> values;
    SqliteStmt stmt(conn, sql);
    while (sqlite3_step(stmt.get()) == SQLITE_ROW) {
      const unsigned char* text = sqlite3_column_text(stmt.get(), 0);
      values.emplace_back(text != nullptr
                              ? reinterpret_cast<const char*>(text)
                              : "");
    }
    it = db.content_index.emplace(column, std::move(values)).first;
  }
  const std::vector<std::string>& cached = it->second;
  const std::size_t take = std::min(k, cached.size());
  return {cached.begin(), cached.begin() + static_cast<std::ptrdiff_t>(take)};
}

void populate_content_index(SchemaDb& db, const std::string& db_root) {
  for (std::size_t t = 0; t < db.tables.size(); ++t) {
    for (std::size_t c = 0; c < db.tables[t].columns.size(); ++c) {
      if (db.tables[t].columns[c].type != ColumnType::Text) continue;
      sample_column_contents(db, db_root,
                             {static_cast<int>(t), static_cast<int>(c)},
                             kContentCap);
    }
  }
}

}  // namespace semfence
