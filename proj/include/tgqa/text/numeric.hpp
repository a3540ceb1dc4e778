#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tgqa/core/table.hpp"

namespace tgqa::text {

enum class NumericKind { Number, Date };

struct NumericValue {
  NumericKind kind = NumericKind::Number;
  double number = 0.0;
  int year = 0;
  int month = 0;
  int day = 0;
  bool has_month = false;
  bool has_day = false;

  static NumericValue make_number(double v) { return {NumericKind::Number, v}; }
  static NumericValue make_date(int year, std::optional<int> month = std::nullopt,
                                std::optional<int> day = std::nullopt);

  friend bool operator==(const NumericValue&, const NumericValue&) = default;
};

struct NumericSpan {
  int token_start = 0;
  int token_end = 0;  // exclusive
  NumericValue value;
};

/// Three-way comparison of a against b. Values of different kinds are
/// incomparable. Dates compare as (year, month or 1, day or 1); two dates with
/// equal padded tuples but different presence patterns are incomparable.
std::optional<int> compare(const NumericValue& a, const NumericValue& b);

/// Total order used for ranking; distinguishes presence patterns for dates.
bool rank_less(const NumericValue& a, const NumericValue& b);

/// Leftmost-longest, non-overlapping numeric and date expressions in
/// normalized tokens.
std::vector<NumericSpan> parse_numeric_spans(const std::vector<std::string>& tokens);

/// A cell parses iff its normalized text is exactly one expression; a leading
/// value before a dash is accepted for ranges such as "1986-present".
std::optional<NumericValue> parse_cell_value(std::string_view text);

/// Majority type over non-empty cells, ties NUMBER > DATE > TEXT.
ColumnType infer_column_type(const std::vector<std::string>& cells);

/// Fills `table` column types from its cells.
void annotate_column_types(Table& table);

}  // namespace tgqa::text
