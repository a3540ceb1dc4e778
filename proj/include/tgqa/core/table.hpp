#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tgqa {

enum class ColumnType { Text, Number, Date };

const char* to_string(ColumnType type);

struct CellCoord {
  int row = 0;
  int col = 0;

  friend bool operator==(const CellCoord&, const CellCoord&) = default;
  friend auto operator<=>(const CellCoord&, const CellCoord&) = default;
};

/// A rectangular table of verbatim cell strings. Column types are filled in
/// by the text pipeline (`annotate_column_types`), TEXT until then.
class Table {
 public:
  Table() = default;
  /// Throws InvalidTableError unless the grid is non-empty and rectangular.
  Table(std::string table_id, std::vector<std::string> column_names,
        std::vector<std::vector<std::string>> cells);

  const std::string& id() const { return table_id_; }
  int num_rows() const { return static_cast<int>(cells_.size()); }
  int num_cols() const { return static_cast<int>(column_names_.size()); }
  int num_cells() const { return num_rows() * num_cols(); }

  const std::vector<std::string>& column_names() const { return column_names_; }
  const std::string& column_name(int col) const { return column_names_.at(col); }
  const std::string& cell(int row, int col) const { return cells_.at(row).at(col); }
  const std::string& cell(CellCoord c) const { return cell(c.row, c.col); }
  const std::vector<std::vector<std::string>>& rows() const { return cells_; }
  std::vector<std::string> column(int col) const;

  const std::vector<ColumnType>& column_types() const { return column_types_; }
  ColumnType column_type(int col) const { return column_types_.at(col); }
  void set_column_types(std::vector<ColumnType> types);

  bool contains(CellCoord c) const {
    return c.row >= 0 && c.row < num_rows() && c.col >= 0 && c.col < num_cols();
  }

 private:
  std::string table_id_;
  std::vector<std::string> column_names_;
  std::vector<std::vector<std::string>> cells_;
  std::vector<ColumnType> column_types_;
};

struct QuestionTurn {
  int position = 1;
  std::string text;
  std::vector<CellCoord> gold_answers;
  std::vector<std::string> gold_answer_texts;
  // Set when gold_answers is not the full product of its unique rows and columns.
  bool non_rectangular = false;
  // Set when gold_answer_texts disagrees with the table content at gold_answers.
  bool text_mismatch = false;
};

struct Conversation {
  std::string sequence_id;
  std::string table_id;
  std::vector<QuestionTurn> turns;
};

/// Columns and rows picked by the decoder; the answer is their cross product.
struct AnswerSelection {
  std::vector<int> columns;
  std::vector<int> rows;

  bool empty() const { return columns.empty() || rows.empty(); }
  friend bool operator==(const AnswerSelection&, const AnswerSelection&) = default;
};

struct PredictionRecord {
  std::string sequence_id;
  int position = 1;
  std::string table_id;
  AnswerSelection predicted;
  std::vector<CellCoord> predicted_cells;
  std::vector<std::string> predicted_texts;
  std::vector<std::string> gold_texts;
  bool correct = false;
  bool superlative = false;
  int table_cells = 0;
};

/// Throws InvalidSelectionError for out-of-range or duplicate indexes.
void validate_selection(const AnswerSelection& sel, const Table& table);

/// Row-major over the selected rows, then the selected columns.
std::vector<CellCoord> selection_to_cells(const AnswerSelection& sel, const Table& table);

std::vector<std::string> answer_texts(const std::vector<CellCoord>& cells, const Table& table,
                                      bool dedupe);

/// Unique gold columns and rows, each ascending. This is the decoder target.
AnswerSelection selection_from_cells(const std::vector<CellCoord>& cells);

/// True iff `cells` covers exactly the product of its unique rows and columns.
bool is_rectangular(const std::vector<CellCoord>& cells);

}  // namespace tgqa
