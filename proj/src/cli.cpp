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
#include "semfence/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "semfence/corpus.hpp"
#include "semfence/error.hpp"
#include "semfence/eval.hpp"
#include "semfence/marker.hpp"
#include "semfence/preprocess.hpp"
#include "semfence/serializer.hpp"
#include "semfence/text.hpp"
#include "semfence/tokenizer.hpp"

namespace semfence::cli {

namespace {

using nlohmann::json;

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  return read_file(path);
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  write_file(path, content);
}

std::vector<json> read_jsonl(const std::string& path) {
  std::vector<json> records;
  std::size_t lineno = 0;
  for (const std::string& line : split_lines(read_input(path))) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

KeywordMap keywords_from(const std::string& path) {
  return path.empty() ? default_keyword_map() : KeywordMap::load_tsv(path);
}

std::string resolve_db_root(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  const char* env = std::getenv("SEMFENCE_DB_ROOT");
  return env != nullptr ? env : "";
}

// ---- preprocess ----

struct PreprocessArgs {
  std::string input;
  std::string output;
  std::string mode = "sql";
  std::string keywords_path;
  std::string field;  // JSONL mode when set
};

int run_preprocess(const PreprocessArgs& args) {
  const KeywordMap keywords = keywords_from(args.keywords_path);
  const auto transform = [&](const std::string& text) {
    return args.mode == "schema" ? preprocess_schema(text)
                                 : preprocess_sql(text, keywords);
  };
  const std::vector<std::string> lines = split_lines(read_input(args.input));
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      if (args.field.empty()) {
        out += transform(lines[i]);
      } else {
        json record = json::parse(lines[i]);
        record[args.field] = transform(record.at(args.field).get<std::string>());
        out += record.dump();
      }
    } catch (const std::exception& e) {
      std::cerr << args.input << ":" << (i + 1) << ": " << e.what() << "\n";
      return 2;
    }
    out += '\n';
  }
  write_output(args.output, out);
  return 0;
}

// ---- mark ----

struct MarkArgs {
  std::string examples;
  std::string annotations;
  std::string tables;
  std::string output;
};

int run_mark(const MarkArgs& args) {
  std::vector<ParallelExample> examples;
  if (args.tables.empty()) {
    examples = load_examples(args.examples);
  } else {
    examples = load_examples(args.examples, load_schemas(args.tables));
  }
  std::vector<std::string> diagnostics;
  examples =
      load_component_annotations(args.annotations, std::move(examples),
                                 &diagnostics);
  for (const std::string& d : diagnostics) std::cerr << d << "\n";
  std::string out;
  for (const ParallelExample& ex : examples) {
    json record;
    if (ex.alignments) {
      MarkedPair marked = mark_pair(ex.question, ex.target, *ex.alignments);
      record = {{"question", marked.nl},
                {"query", marked.out},
                {"db_id", ex.db_id}};
    } else {
      record = {{"question", ex.question},
                {"query", ex.target},
                {"db_id", ex.db_id}};
    }
    out += record.dump();
    out += '\n';
  }
  write_output(args.output, out);
  return 0;
}

// ---- audit ----

struct AuditArgs {
  std::string corpus;
  std::string vocab;
  std::string output;
  std::string field;
  unsigned jobs = 1;
  std::string format = "json";
};

int run_audit(const AuditArgs& args) {
  std::vector<std::string> texts;
  if (args.field.empty()) {
    texts = split_lines(read_input(args.corpus));
  } else {
    for (const json& record : read_jsonl(args.corpus)) {
      texts.push_back(record.at(args.field).get<std::string>());
    }
  }
  const SubwordVocabulary vocab = SubwordVocabulary::load(args.vocab);
  const CorpusAuditReport report = audit_corpus(texts, vocab, args.jobs);
  std::string out;
  if (args.format == "tsv") {
    out = "index\tn_tokens\tn_violations\tresolvable\ttext\n";
    for (std::size_t i = 0; i < report.audits.size(); ++i) {
      const TokenAudit& a = report.audits[i];
      out += std::to_string(i) + "\t" + std::to_string(a.tokens.size()) + "\t" +
             std::to_string(a.violations.size()) + "\t" +
             (a.resolvable ? "1" : "0") + "\t" + a.text + "\n";
    }
  } else {
    json doc;
    doc["total_texts"] = report.total_texts;
    doc["total_violations"] = report.total_violations;
    doc["resolvable_texts"] = report.resolvable_texts;
    json items = json::array();
    for (const TokenAudit& a : report.audits) {
      json item;
      item["text"] = a.text;
      item["tokens"] = a.tokens;
      item["violations"] = a.violations;
      item["resolvable"] = a.resolvable;
      items.push_back(std::move(item));
    }
    doc["texts"] = std::move(items);
    out = doc.dump(2) + "\n";
  }
  write_output(args.output, out);
  std::cerr << "audited " << report.total_texts << " texts: "
            << report.total_violations << " violations, "
            << report.resolvable_texts << " resolvable texts\n";
  return 0;
}

// ---- serialize ----

struct SerializeArgs {
  std::string examples;
  std::string tables;
  std::string annotations;
  std::string db_root;
  std::string output;
  std::string keywords_path;
  bool no_ground = false;
  bool no_preprocess = false;
  bool no_mark = false;
  double ground_threshold = 0.85;
};

int run_serialize(const SerializeArgs& args) {
  std::vector<SchemaDb> schemas = load_schemas(args.tables);
  std::vector<ParallelExample> examples =
      load_examples(args.examples, schemas);
  const bool mark = !args.no_mark && !args.annotations.empty();
  if (mark) {
    std::vector<std::string> diagnostics;
    examples = load_component_annotations(args.annotations,
                                          std::move(examples), &diagnostics);
    for (const std::string& d : diagnostics) std::cerr << d << "\n";
  }
  const bool ground = !args.no_ground;
  const std::string db_root = resolve_db_root(args.db_root);
  if (ground && db_root.empty()) {
    throw ConfigError(
        "value grounding needs --db-root (or SEMFENCE_DB_ROOT); pass "
        "--no-ground to serialize without database contents");
  }
  if (ground) {
    for (SchemaDb& db : schemas) populate_content_index(db, db_root);
  }
  const KeywordMap keywords = keywords_from(args.keywords_path);
  std::string out;
  for (const ParallelExample& ex : examples) {
    const SchemaDb& db = schema_by_id(schemas, ex.db_id);
    PairOptions options;
    options.preprocess = !args.no_preprocess;
    options.mark = mark && ex.alignments.has_value();
    options.ground = ground;
    options.ground_threshold = args.ground_threshold;
    options.keywords = &keywords;
    const ModelPair pair = build_model_pair(ex, db, options);
    const json record = {
        {"source", pair.source}, {"target", pair.target}, {"db_id", ex.db_id}};
    out += record.dump();
    out += '\n';
  }
  write_output(args.output, out);
  return 0;
}

// ---- eval ----

struct EvalArgs {
  std::string preds;
  std::string golds;
  std::string tables;
  std::string db_root;
  std::string output;
  std::string format = "json";
  bool compare_values = false;
  bool no_exec = false;
  bool no_normalize = false;
  long timeout_ms = 30000;
  unsigned jobs = 1;
};

std::vector<EvalPair> read_eval_pairs(const EvalArgs& args) {
  std::vector<EvalPair> pairs;
  const std::string preds_data = read_input(args.preds);
  const std::string preds_head = preds_data.substr(0, preds_data.find('\n'));
  const std::string_view first_line = trim(preds_head);
  const bool jsonl = !first_line.empty() && first_line.front() == '{';
  if (jsonl) {
    std::size_t lineno = 0;
    for (const std::string& line : split_lines(preds_data)) {
      ++lineno;
      if (trim(line).empty()) continue;
      json record;
      try {
        record = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ParseError(args.preds + ":" + std::to_string(lineno) + ": " +
                         e.what());
      }
      EvalPair pair;
      pair.pred = record.at("pred").get<std::string>();
      if (record.contains("gold")) pair.gold = record.at("gold");
      if (record.contains("db_id")) pair.db_id = record.at("db_id");
      if (record.contains("split")) pair.split = record.at("split");
      pairs.push_back(std::move(pair));
    }
  } else {
    // Plain text: one prediction per line, optionally "sql<TAB>db_id".
    for (const std::string& line : split_lines(preds_data)) {
      EvalPair pair;
      const std::size_t tab = line.find('\t');
      if (tab == std::string::npos) {
        pair.pred = line;
      } else {
        pair.pred = line.substr(0, tab);
        pair.db_id = std::string(trim(line.substr(tab + 1)));
      }
      pairs.push_back(std::move(pair));
    }
  }
  if (!args.golds.empty()) {
    // Gold file: "sql<TAB>db_id" lines (Spider convention) or JSONL.
    std::vector<std::pair<std::string, std::string>> golds;
    const std::string gold_data = read_input(args.golds);
    const std::string gold_head = gold_data.substr(0, gold_data.find('\n'));
    const std::string_view gold_first = trim(gold_head);
    if (!gold_first.empty() && gold_first.front() == '{') {
      for (const json& record : read_jsonl(args.golds)) {
        golds.emplace_back(record.at("gold").get<std::string>(),
                           record.value("db_id", ""));
      }
    } else {
      for (const std::string& line : split_lines(gold_data)) {
        if (trim(line).empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
          golds.emplace_back(line, "");
        } else {
          golds.emplace_back(line.substr(0, tab),
                             std::string(trim(line.substr(tab + 1))));
        }
      }
    }
    if (golds.size() != pairs.size()) {
      throw ValidationError("prediction/gold count mismatch: " +
                            std::to_string(pairs.size()) + " vs " +
                            std::to_string(golds.size()));
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      pairs[i].gold = golds[i].first;
      if (pairs[i].db_id.empty()) pairs[i].db_id = golds[i].second;
    }
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].gold.empty()) {
      throw ValidationError("pair " + std::to_string(i) +
                            " has no gold query (provide --golds or a "
                            "'gold' field)");
    }
    if (pairs[i].db_id.empty()) {
      throw ValidationError("pair " + std::to_string(i) + " has no db_id");
    }
  }
  return pairs;
}

std::string format_rate(double rate, bool available) {
  if (!available) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", rate);
  return buf;
}

int run_eval(const EvalArgs& args) {
  const std::vector<SchemaDb> schemas = load_schemas(args.tables);
  const std::vector<EvalPair> pairs = read_eval_pairs(args);
  const std::string db_root = resolve_db_root(args.db_root);
  CorpusEvalConfig config;
  config.em.compare_values = args.compare_values;
  config.ex.timeout = std::chrono::milliseconds(args.timeout_ms);
  config.with_execution = !args.no_exec && !db_root.empty();
  config.normalize = !args.no_normalize;
  config.jobs = args.jobs;
  const CorpusEvalReport report =
      evaluate_corpus(pairs, schemas, db_root, config);

  const bool ex_on = config.with_execution;
  std::ostringstream table;
  table << "split\tcount\tEM\tEX\n";
  for (const auto& [name, stats] : report.splits) {
    table << name << "\t" << stats.count << "\t"
          << format_rate(stats.em_rate, true) << "\t"
          << format_rate(stats.ex_rate, ex_on) << "\n";
  }
  table << "overall\t" << report.overall.count << "\t"
        << format_rate(report.overall.em_rate, true) << "\t"
        << format_rate(report.overall.ex_rate, ex_on) << "\n";
  std::cout << table.str();

  std::string out;
  if (args.format == "tsv") {
    out = table.str();
  } else {
    const auto stats_json = [&](const SplitStats& s) {
      json j;
      j["count"] = s.count;
      j["em"] = s.em_rate;
      if (ex_on) {
        j["ex"] = s.ex_rate;
      } else {
        j["ex"] = nullptr;
      }
      j["errors"] = s.error_count;
      return j;
    };
    json doc;
    doc["overall"] = stats_json(report.overall);
    json splits;
    for (const auto& [name, stats] : report.splits) {
      splits[name] = stats_json(stats);
    }
    doc["splits"] = std::move(splits);
    json examples = json::array();
    for (std::size_t i = 0; i < report.outcomes.size(); ++i) {
      const EvalOutcome& o = report.outcomes[i];
      json item;
      item["index"] = i;
      item["db_id"] = pairs[i].db_id;
      if (!pairs[i].split.empty()) item["split"] = pairs[i].split;
      item["em"] = o.em;
      item["ex"] = o.ex == Tri::True    ? "true"
                   : o.ex == Tri::False ? "false"
                                        : "not_run";
      if (!o.clause_breakdown.empty()) item["clauses"] = o.clause_breakdown;
      if (o.error) item["error"] = *o.error;
      examples.push_back(std::move(item));
    }
    doc["examples"] = std::move(examples);
    out = doc.dump(2) + "\n";
  }
  if (!args.output.empty()) write_output(args.output, out);

  const bool failures = report.overall.error_count > 0;
  return failures ? 1 : 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{
      "semfence: semantic-boundary preprocessing, marking, auditing and "
      "EM/EX evaluation for text-to-SQL corpora"};
  app.require_subcommand(1);

  unsigned jobs = 1;
  std::string format = "json";
  app.add_option("--jobs", jobs, "worker threads for corpus-level commands")
      ->capture_default_str();
  app.add_option("--format", format, "report format")
      ->check(CLI::IsMember({"json", "tsv"}))
      ->capture_default_str();

  PreprocessArgs pre;
  CLI::App* cmd_pre =
      app.add_subcommand("preprocess", "apply token preprocessing to lines");
  cmd_pre->add_option("--in", pre.input, "input file ('-' for stdin)")
      ->required();
  cmd_pre->add_option("--out", pre.output, "output file (default stdout)");
  cmd_pre->add_option("--mode", pre.mode, "schema or sql")
      ->check(CLI::IsMember({"schema", "sql"}))
      ->capture_default_str();
  cmd_pre->add_option("--keywords", pre.keywords_path,
                      "keyword map TSV (abbreviation<TAB>expansion)");
  cmd_pre->add_option("--field", pre.field,
                      "treat input as JSON lines and rewrite this field");

  MarkArgs mark;
  CLI::App* cmd_mark = app.add_subcommand(
      "mark", "insert component boundary markers from annotations");
  cmd_mark->add_option("--examples", mark.examples, "examples JSON file")
      ->required();
  cmd_mark->add_option("--annotations", mark.annotations,
                       "component annotation JSON file")
      ->required();
  cmd_mark->add_option("--tables", mark.tables,
                       "tables.json (enables db_id validation)");
  cmd_mark->add_option("--out", mark.output, "output JSONL (default stdout)");

  AuditArgs audit_args;
  CLI::App* cmd_audit = app.add_subcommand(
      "audit", "audit subword tokenization against semantic boundaries");
  cmd_audit->add_option("--corpus", audit_args.corpus,
                        "text file, one line per text ('-' for stdin)")
      ->required();
  cmd_audit->add_option("--vocab", audit_args.vocab, "vocabulary file")
      ->required();
  cmd_audit->add_option("--out", audit_args.output,
                        "report file (default stdout)");
  cmd_audit->add_option("--field", audit_args.field,
                        "treat corpus as JSON lines and audit this field");

  SerializeArgs ser;
  CLI::App* cmd_ser = app.add_subcommand(
      "serialize", "emit model-ready source/target JSONL pairs");
  cmd_ser->add_option("--examples", ser.examples, "examples JSON file")
      ->required();
  cmd_ser->add_option("--tables", ser.tables, "tables.json")->required();
  cmd_ser->add_option("--annotations", ser.annotations,
                      "component annotation JSON file (enables marking)");
  cmd_ser->add_option("--db-root", ser.db_root,
                      "database root (fallback: SEMFENCE_DB_ROOT)");
  cmd_ser->add_option("--out", ser.output, "output JSONL (default stdout)");
  cmd_ser->add_option("--keywords", ser.keywords_path, "keyword map TSV");
  cmd_ser->add_flag("--no-ground", ser.no_ground, "skip value grounding");
  cmd_ser->add_flag("--no-preprocess", ser.no_preprocess,
                    "skip token preprocessing");
  cmd_ser->add_flag("--no-mark", ser.no_mark, "skip boundary marking");
  cmd_ser->add_option("--ground-threshold", ser.ground_threshold,
                      "fuzzy match score threshold")
      ->capture_default_str();

  EvalArgs ev;
  CLI::App* cmd_eval =
      app.add_subcommand("eval", "score predictions with EM and EX");
  cmd_eval->add_option("--preds", ev.preds,
                       "predictions: JSONL {pred, gold?, db_id?, split?} or "
                       "plain lines")
      ->required();
  cmd_eval->add_option("--golds", ev.golds,
                       "gold file: 'sql<TAB>db_id' lines or JSONL");
  cmd_eval->add_option("--tables", ev.tables, "tables.json")->required();
  cmd_eval->add_option("--db-root", ev.db_root,
                       "database root (fallback: SEMFENCE_DB_ROOT)");
  cmd_eval->add_option("--out", ev.output, "report file");
  cmd_eval->add_flag("--compare-values", ev.compare_values,
                     "compare literal values in EM");
  cmd_eval->add_flag("--no-exec", ev.no_exec, "skip Execution Match");
  cmd_eval->add_flag("--no-normalize", ev.no_normalize,
                     "skip marker stripping and postprocessing");
  cmd_eval->add_option("--timeout-ms", ev.timeout_ms,
                       "per-query execution timeout")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  audit_args.jobs = jobs;
  audit_args.format = format;
  ev.jobs = jobs;
  ev.format = format;

  try {
    if (cmd_pre->parsed()) return run_preprocess(pre);
    if (cmd_mark->parsed()) return run_mark(mark);
    if (cmd_audit->parsed()) return run_audit(audit_args);
    if (cmd_ser->parsed()) return run_serialize(ser);
    if (cmd_eval->parsed()) return run_eval(ev);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("semfence");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace semfence::cli
