#include "tgqa/io/sqa.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "tgqa/error.hpp"
#include "tgqa/text/normalize.hpp"

namespace tgqa::io {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}
  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(char c) {
    skip_ws();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return i_ < s_.size() ? s_[i_] : '\0';
  }
  bool done() {
    skip_ws();
    return i_ == s_.size();
  }
  int integer() {
    skip_ws();
    const std::size_t start = i_;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
    if (start == i_ || i_ - start > 9) fail("expected a row or column index");
    return std::stoi(std::string(s_.substr(start, i_ - start)));
  }
  std::string quoted() {
    skip_ws();
    if (i_ >= s_.size() || (s_[i_] != '\'' && s_[i_] != '"')) fail("expected a quoted string");
    const char q = s_[i_++];
    std::string out;
    while (i_ < s_.size() && s_[i_] != q) {
      if (s_[i_] == '\\' && i_ + 1 < s_.size()) {
        const char e = s_[++i_];
        out.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e);
        ++i_;
      } else {
        out.push_back(s_[i_++]);
      }
    }
    if (i_ >= s_.size()) fail("unterminated string");
    ++i_;
    return out;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(what + " at offset " + std::to_string(i_) + " in '" + std::string(s_) + "'");
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
};

CellCoord parse_pair(Cursor& c) {
  if (!c.eat('(')) c.fail("expected '('");
  const int row = c.integer();
  if (!c.eat(',')) c.fail("expected ','");
  const int col = c.integer();
  if (!c.eat(')')) c.fail("expected ')'");
  return {row, col};
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  for (auto& f : out) {
    // Spreadsheet exports wrap fields in double quotes with doubled inner quotes.
    if (f.size() >= 2 && f.front() == '"' && f.back() == '"') {
      std::string inner;
      for (std::size_t i = 1; i + 1 < f.size(); ++i) {
        inner.push_back(f[i]);
        if (f[i] == '"' && f[i + 1] == '"' && i + 2 < f.size()) ++i;
      }
      f = inner;
    }
  }
  return out;
}

std::vector<std::string> sorted_normalized(const std::vector<std::string>& xs) {
  std::vector<std::string> out;
  for (const auto& x : xs) out.push_back(text::normalize(x));
  std::sort(out.begin(), out.end());
  return out;
}

struct PendingRow {
  std::string file;
  int line;
  std::string raw;
  int position;
  QuestionTurn turn;
};

struct PendingSequence {
  std::string table_id;
  std::vector<PendingRow> rows;
};

}  // namespace

std::vector<CellCoord> parse_coordinates(std::string_view s) {
  Cursor c(s);
  std::vector<CellCoord> out;
  if (!c.eat('[')) c.fail("expected '['");
  if (c.eat(']')) {
    if (!c.done()) c.fail("trailing characters");
    return out;
  }
  do {
    const char p = c.peek();
    if (p == '\'' || p == '"') {
      const std::string inner = c.quoted();
      Cursor ic(inner);
      out.push_back(parse_pair(ic));
      if (!ic.done()) ic.fail("trailing characters in coordinate");
    } else {
      out.push_back(parse_pair(c));
    }
  } while (c.eat(','));
  if (!c.eat(']')) c.fail("expected ']'");
  if (!c.done()) c.fail("trailing characters");
  return out;
}

std::vector<std::string> parse_answer_texts(std::string_view s) {
  Cursor c(s);
  std::vector<std::string> out;
  if (!c.eat('[')) c.fail("expected '['");
  if (c.eat(']')) {
    if (!c.done()) c.fail("trailing characters");
    return out;
  }
  do {
    out.push_back(c.quoted());
  } while (c.eat(','));
  if (!c.eat(']')) c.fail("expected ']'");
  if (!c.done()) c.fail("trailing characters");
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      field.clear();
      row.clear();
      any = false;
    } else {
      field.push_back(ch);
      any = true;
    }
  }
  if (quoted) throw DataError("unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

Table load_table_csv(const std::string& path, const std::string& table_id) {
  auto rows = parse_csv(read_file(path));
  if (rows.size() < 2) throw DataError("table " + path + " needs a header and at least one row");
  std::vector<std::string> header = std::move(rows.front());
  rows.erase(rows.begin());
  try {
    return Table(table_id, std::move(header), std::move(rows));
  } catch (const InvalidTableError& e) {
    throw InvalidTableError("table " + path + ": " + e.what());
  }
}

LoadedSplit load_split(const std::string& tsv_path, const std::string& tables_dir, const LoadOptions& options) {
  return load_splits({tsv_path}, tables_dir, options);
}

LoadedSplit load_splits(const std::vector<std::string>& tsv_paths, const std::string& tables_dir,
                        const LoadOptions& options) {
  LoadedSplit out;
  auto& report = out.report;
  std::map<std::string, std::string> table_errors;
  std::vector<std::string> order;
  std::map<std::string, PendingSequence> pending;

  auto reject = [&](const std::string& file, int line, std::string seq, std::string reason, std::string raw) {
    if (options.strict) throw DataError(file + ":" + std::to_string(line) + ": " + reason);
    report.rejects.push_back({file, line, std::move(seq), std::move(reason), std::move(raw)});
  };
  auto table_for = [&](const std::string& file) -> std::shared_ptr<const Table> {
    if (out.split.tables.contains(file)) return out.split.tables.get(file);
    if (auto e = table_errors.find(file); e != table_errors.end()) throw DataError(e->second);
    try {
      return out.split.tables.add(load_table_csv((std::filesystem::path(tables_dir) / file).string(), file));
    } catch (const Error& e) {
      table_errors[file] = e.what();
      throw DataError(e.what());
    }
  };

  for (const auto& tsv_path : tsv_paths) {
    std::istringstream in(read_file(tsv_path));
    std::string line;
    if (!std::getline(in, line)) throw DataError(tsv_path + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_tabs(line);
    std::map<std::string, int> col;
    for (int i = 0; i < static_cast<int>(header.size()); ++i) col[header[i]] = i;
    for (const char* name : {"id", "annotator", "position", "question", "table_file", "answer_coordinates",
                             "answer_text"}) {
      if (!col.count(name)) throw DataError(tsv_path + ": header lacks column '" + name + "'");
    }
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      ++report.input_rows;
      const auto f = split_tabs(line);
      if (f.size() != header.size()) {
        reject(tsv_path, lineno, "", "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()),
               line);
        continue;
      }
      const std::string seq_id = f[col["id"]] + "_" + f[col["annotator"]];
      try {
        PendingRow row{tsv_path, lineno, line, 0, {}};
        try {
          std::size_t used = 0;
          row.position = std::stoi(f[col["position"]], &used);
          if (used != f[col["position"]].size()) throw std::invalid_argument("position");
        } catch (const std::logic_error&) {
          throw DataError("unparseable position '" + f[col["position"]] + "'");
        }
        row.turn.text = f[col["question"]];
        row.turn.gold_answers = parse_coordinates(f[col["answer_coordinates"]]);
        row.turn.gold_answer_texts = parse_answer_texts(f[col["answer_text"]]);
        const std::string& file = f[col["table_file"]];
        const auto table = table_for(file);
        for (const auto& c : row.turn.gold_answers) {
          if (!table->contains(c)) {
            throw DataError("answer coordinate (" + std::to_string(c.row) + ", " + std::to_string(c.col) +
                            ") outside table " + file);
          }
        }
        auto& seq = pending[seq_id];
        if (seq.rows.empty()) {
          order.push_back(seq_id);
          seq.table_id = file;
        } else if (seq.table_id != file) {
          throw DataError("sequence " + seq_id + " switches table to " + file);
        }
        seq.rows.push_back(std::move(row));
      } catch (const DataError& e) {
        reject(tsv_path, lineno, seq_id, e.what(), line);
      }
    }
  }

  const int first = options.zero_based_positions ? 0 : 1;
  for (const auto& seq_id : order) {
    auto& seq = pending[seq_id];
    std::stable_sort(seq.rows.begin(), seq.rows.end(),
                     [](const auto& a, const auto& b) { return a.position < b.position; });
    bool consecutive = true;
    for (std::size_t i = 0; i < seq.rows.size(); ++i) consecutive &= seq.rows[i].position == first + static_cast<int>(i);
    if (!consecutive) {
      for (const auto& r : seq.rows) reject(r.file, r.line, seq_id, "non-consecutive positions in sequence " + seq_id, r.raw);
      continue;
    }
    const auto table = out.split.tables.get(seq.table_id);
    Conversation conv{seq_id, seq.table_id, {}};
    for (auto& r : seq.rows) {
      auto& turn = r.turn;
      turn.position = r.position - first + 1;
      turn.non_rectangular = !is_rectangular(turn.gold_answers);
      turn.text_mismatch = sorted_normalized(turn.gold_answer_texts) !=
                           sorted_normalized(answer_texts(turn.gold_answers, *table, false));
      report.non_rectangular += turn.non_rectangular;
      report.text_mismatch += turn.text_mismatch;
      report.empty_answers += turn.gold_answers.empty();
      conv.turns.push_back(std::move(turn));
      ++report.accepted_rows;
    }
    out.split.conversations.push_back(std::move(conv));
  }
  std::sort(report.rejects.begin(), report.rejects.end(),
            [](const Reject& a, const Reject& b) { return std::tie(a.file, a.line) < std::tie(b.file, b.line); });
  return out;
}

void write_rejects(const std::vector<Reject>& rejects, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  for (const auto& r : rejects) {
    out << json{{"file", r.file}, {"line", r.line}, {"sequence_id", r.sequence_id}, {"reason", r.reason}, {"raw", r.raw}}.dump()
        << "\n";
  }
}

}  // namespace tgqa::io
