#include "tgqa/core/table.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "tgqa/error.hpp"

namespace tgqa {

const char* to_string(ColumnType type) {
  switch (type) {
    case ColumnType::Text: return "TEXT";
    case ColumnType::Number: return "NUMBER";
    case ColumnType::Date: return "DATE";
  }
  return "TEXT";
}

Table::Table(std::string table_id, std::vector<std::string> column_names,
             std::vector<std::vector<std::string>> cells)
    : table_id_(std::move(table_id)),
      column_names_(std::move(column_names)),
      cells_(std::move(cells)) {
  if (column_names_.empty()) {
    throw InvalidTableError("table '" + table_id_ + "' has no columns");
  }
  if (cells_.empty()) {
    throw InvalidTableError("table '" + table_id_ + "' has no rows");
  }
  for (std::size_t r = 0; r < cells_.size(); ++r) {
    if (cells_[r].size() != column_names_.size()) {
      throw InvalidTableError("table '" + table_id_ + "' row " + std::to_string(r) + " has " +
                              std::to_string(cells_[r].size()) + " cells, expected " +
                              std::to_string(column_names_.size()));
    }
  }
  column_types_.assign(column_names_.size(), ColumnType::Text);
}

std::vector<std::string> Table::column(int col) const {
  std::vector<std::string> out;
  out.reserve(cells_.size());
  for (const auto& row : cells_) out.push_back(row.at(col));
  return out;
}

void Table::set_column_types(std::vector<ColumnType> types) {
  if (types.size() != column_names_.size()) {
    throw InvalidTableError("column type count does not match column count");
  }
  column_types_ = std::move(types);
}

void validate_selection(const AnswerSelection& sel, const Table& table) {
  auto check = [](const std::vector<int>& idx, int limit, const char* what) {
    std::unordered_set<int> seen;
    for (int i : idx) {
      if (i < 0 || i >= limit) {
        throw InvalidSelectionError(std::string(what) + " index " + std::to_string(i) +
                                    " out of range [0," + std::to_string(limit) + ")");
      }
      if (!seen.insert(i).second) {
        throw InvalidSelectionError(std::string("duplicate ") + what + " index " +
                                    std::to_string(i));
      }
    }
  };
  check(sel.columns, table.num_cols(), "column");
  check(sel.rows, table.num_rows(), "row");
}

std::vector<CellCoord> selection_to_cells(const AnswerSelection& sel, const Table& table) {
  validate_selection(sel, table);
  std::vector<CellCoord> out;
  out.reserve(sel.columns.size() * sel.rows.size());
  for (int r : sel.rows) {
    for (int c : sel.columns) out.push_back({r, c});
  }
  return out;
}

std::vector<std::string> answer_texts(const std::vector<CellCoord>& cells, const Table& table,
                                      bool dedupe) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& c : cells) {
    if (!table.contains(c)) {
      throw InvalidSelectionError("cell (" + std::to_string(c.row) + "," +
                                  std::to_string(c.col) + ") outside table '" + table.id() + "'");
    }
    const std::string& text = table.cell(c);
    if (dedupe && !seen.insert(text).second) continue;
    out.push_back(text);
  }
  return out;
}

AnswerSelection selection_from_cells(const std::vector<CellCoord>& cells) {
  std::set<int> rows;
  std::set<int> cols;
  for (const auto& c : cells) {
    rows.insert(c.row);
    cols.insert(c.col);
  }
  return {{cols.begin(), cols.end()}, {rows.begin(), rows.end()}};
}

bool is_rectangular(const std::vector<CellCoord>& cells) {
  std::set<CellCoord> unique(cells.begin(), cells.end());
  const AnswerSelection sel = selection_from_cells(cells);
  return unique.size() == sel.columns.size() * sel.rows.size();
}

}  // namespace tgqa
