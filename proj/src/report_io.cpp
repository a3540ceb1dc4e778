#include "tgqa/eval/report_io.hpp"

#include <cmath>
#include <fstream>

#include "tgqa/error.hpp"
#include "tgqa/io/config.hpp"

namespace tgqa::eval {

using nlohmann::json;

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json subset_json(const SubsetAccuracy& s) { return {{"count", s.count}, {"accuracy", optional_json(s.accuracy)}}; }

json record_to_json(const PredictionRecord& r) {
  json cells = json::array();
  for (const auto& c : r.predicted_cells) cells.push_back({{"row", c.row}, {"col", c.col}});
  return {{"sequence_id", r.sequence_id},
          {"position", r.position},
          {"table_id", r.table_id},
          {"columns", r.predicted.columns},
          {"rows", r.predicted.rows},
          {"cells", cells},
          {"predicted_texts", r.predicted_texts},
          {"gold_texts", r.gold_texts},
          {"correct", r.correct},
          {"superlative", r.superlative},
          {"table_cells", r.table_cells}};
}

PredictionRecord record_from_json(const json& j) {
  PredictionRecord r;
  r.sequence_id = j.at("sequence_id").get<std::string>();
  r.position = j.at("position").get<int>();
  r.table_id = j.at("table_id").get<std::string>();
  r.predicted.columns = j.at("columns").get<std::vector<int>>();
  r.predicted.rows = j.at("rows").get<std::vector<int>>();
  for (const auto& c : j.at("cells")) r.predicted_cells.push_back({c.at("row").get<int>(), c.at("col").get<int>()});
  r.predicted_texts = j.at("predicted_texts").get<std::vector<std::string>>();
  r.gold_texts = j.at("gold_texts").get<std::vector<std::string>>();
  r.correct = j.at("correct").get<bool>();
  r.superlative = j.at("superlative").get<bool>();
  r.table_cells = j.at("table_cells").get<int>();
  return r;
}

bool same(double a, double b) { return std::abs(a - b) <= 1e-12; }

bool same(const std::optional<double>& a, const json& b) {
  if (!a) return b.is_null();
  return b.is_number() && same(*a, b.get<double>());
}

}  // namespace

json report_to_json(const EvalReport& rep) {
  json pos = json::array();
  for (const auto& p : rep.pos_acc) pos.push_back(optional_json(p));
  json buckets = json::array();
  for (const auto& b : rep.size_buckets) {
    buckets.push_back({{"min_cells", b.min_cells}, {"max_cells", b.max_cells}, {"count", b.count},
                       {"accuracy", b.accuracy}});
  }
  json records = json::array();
  for (const auto& r : rep.records) records.push_back(record_to_json(r));
  return {{"config", io::to_json(rep.config)},
          {"num_questions", rep.num_questions},
          {"num_sequences", rep.num_sequences},
          {"all", rep.all_acc},
          {"seq", rep.seq_acc},
          {"pos", pos},
          {"pos_count", rep.pos_count},
          {"table_size_buckets", buckets},
          {"largest_tables", subset_json(rep.largest_tables)},
          {"superlative", subset_json(rep.superlative)},
          {"records", records}};
}

EvalReport report_from_json(const json& j) {
  try {
    EvalConfig config;
    try {
      config = io::eval_config_from_json(j.at("config"));
    } catch (const ConfigError& e) {
      throw FormatError(std::string("report config invalid: ") + e.what());
    }
    std::vector<PredictionRecord> records;
    for (const auto& r : j.at("records")) records.push_back(record_from_json(r));
    EvalReport rep = compute_metrics(records, config);
    bool ok = rep.num_questions == j.at("num_questions").get<int>() &&
              rep.num_sequences == j.at("num_sequences").get<int>() && same(rep.all_acc, j.at("all").get<double>()) &&
              same(rep.seq_acc, j.at("seq").get<double>()) && j.at("pos").size() == rep.pos_acc.size();
    for (std::size_t k = 0; ok && k < rep.pos_acc.size(); ++k) ok = same(rep.pos_acc[k], j.at("pos")[k]);
    if (!ok) throw FormatError("report aggregates disagree with its records");
    return rep;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  } catch (const EvaluationError& e) {
    throw FormatError(std::string("report records inconsistent: ") + e.what());
  }
}

void write_report(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << report_to_json(report).dump(2) << "\n";
}

EvalReport read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open report " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("report " + path + " is not valid JSON: " + e.what());
  }
  return report_from_json(j);
}

void write_annotations(const std::vector<ErrorAnnotation>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  for (const auto& a : rows) {
    const json j = {{"sequence_id", a.sequence_id},
                    {"position", a.position},
                    {"category", a.category ? json(to_string(*a.category)) : json(nullptr)},
                    {"note", a.note}};
    out << j.dump() << "\n";
  }
}

std::vector<ErrorAnnotation> read_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open annotations " + path);
  std::vector<ErrorAnnotation> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    try {
      const json j = json::parse(line);
      ErrorAnnotation a;
      a.sequence_id = j.at("sequence_id").get<std::string>();
      a.position = j.at("position").get<int>();
      const auto& cat = j.at("category");
      if (!cat.is_null()) {
        a.category = error_category_from_string(cat.get<std::string>());
        if (!a.category) throw FormatError(where + ": unknown error category '" + cat.get<std::string>() + "'");
      }
      a.note = j.value("note", "");
      rows.push_back(std::move(a));
    } catch (const json::exception& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace tgqa::eval
