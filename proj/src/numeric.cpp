#include "tgqa/text/numeric.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <string>
#include <tuple>
#include <unordered_map>

#include "tgqa/text/normalize.hpp"

namespace tgqa::text {

namespace {

const std::unordered_map<std::string_view, int>& number_words() {
  static const std::unordered_map<std::string_view, int> words = {
      {"zero", 0},  {"one", 1},    {"two", 2},   {"three", 3},   {"four", 4},  {"five", 5},
      {"six", 6},   {"seven", 7},  {"eight", 8}, {"nine", 9},    {"ten", 10},  {"first", 1},
      {"second", 2}, {"third", 3},  {"fourth", 4}, {"fifth", 5},  {"sixth", 6}, {"seventh", 7},
      {"eighth", 8}, {"ninth", 9},  {"tenth", 10}};
  return words;
}

const std::unordered_map<std::string_view, int>& month_names() {
  static const std::unordered_map<std::string_view, int> months = {
      {"january", 1},  {"jan", 1},  {"february", 2}, {"feb", 2},  {"march", 3},     {"mar", 3},
      {"april", 4},    {"apr", 4},  {"may", 5},      {"june", 6}, {"jun", 6},       {"july", 7},
      {"jul", 7},      {"august", 8}, {"aug", 8},    {"september", 9}, {"sep", 9},  {"sept", 9},
      {"october", 10}, {"oct", 10}, {"november", 11}, {"nov", 11}, {"december", 12}, {"dec", 12}};
  return months;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::optional<int> to_int(std::string_view s) {
  if (!all_digits(s) || s.size() > 9) return std::nullopt;
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

std::optional<int> year_token(std::string_view s) {
  if (s.size() != 4) return std::nullopt;
  auto y = to_int(s);
  if (!y || *y < 1000 || *y > 2999) return std::nullopt;
  return y;
}

// "9", "9th", "21st"
std::optional<int> day_token(std::string_view s) {
  std::size_t digits = 0;
  while (digits < s.size() && s[digits] >= '0' && s[digits] <= '9') ++digits;
  if (digits == 0 || digits > 2) return std::nullopt;
  const std::string_view suffix = s.substr(digits);
  if (!suffix.empty() && suffix != "st" && suffix != "nd" && suffix != "rd" && suffix != "th") {
    return std::nullopt;
  }
  auto d = to_int(s.substr(0, digits));
  if (!d || *d < 1 || *d > 31) return std::nullopt;
  return d;
}

// 1,200 / 3.5 / 60 with strict thousands grouping.
std::optional<double> digit_literal(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string_view int_part = s;
  std::string_view frac_part;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    int_part = s.substr(0, dot);
    frac_part = s.substr(dot + 1);
    if (!all_digits(frac_part)) return std::nullopt;
  }
  std::string digits;
  if (int_part.find(',') != std::string_view::npos) {
    std::size_t pos = 0;
    bool first = true;
    while (pos <= int_part.size()) {
      const std::size_t comma = int_part.find(',', pos);
      const std::string_view group =
          int_part.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
      if (!all_digits(group)) return std::nullopt;
      if (first ? (group.size() > 3) : (group.size() != 3)) return std::nullopt;
      digits += group;
      first = false;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  } else {
    if (!all_digits(int_part)) return std::nullopt;
    digits = int_part;
  }
  std::string literal = digits;
  if (!frac_part.empty()) literal += "." + std::string(frac_part);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), value);
  if (ec != std::errc() || ptr != literal.data() + literal.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

// mm/dd/yyyy
std::optional<NumericValue> slash_date(std::string_view s) {
  const auto a = s.find('/');
  if (a == std::string_view::npos) return std::nullopt;
  const auto b = s.find('/', a + 1);
  if (b == std::string_view::npos || s.find('/', b + 1) != std::string_view::npos) {
    return std::nullopt;
  }
  const std::string_view mm = s.substr(0, a);
  const std::string_view dd = s.substr(a + 1, b - a - 1);
  const std::string_view yy = s.substr(b + 1);
  if (mm.size() > 2 || dd.size() > 2) return std::nullopt;
  auto m = to_int(mm);
  auto d = to_int(dd);
  auto y = year_token(yy);
  if (!m || !d || !y || *m < 1 || *m > 12 || *d < 1 || *d > 31) return std::nullopt;
  return NumericValue::make_date(*y, *m, *d);
}

std::optional<NumericValue> single_token(std::string_view tok) {
  if (auto v = slash_date(tok)) return v;
  if (auto y = year_token(tok)) return NumericValue::make_date(*y);
  if (auto n = digit_literal(tok)) return NumericValue::make_number(*n);
  const auto& words = number_words();
  if (auto it = words.find(tok); it != words.end()) return NumericValue::make_number(it->second);
  return std::nullopt;
}

std::optional<NumericValue> month_day_year(const std::vector<std::string>& tokens, std::size_t i) {
  if (i + 2 >= tokens.size()) return std::nullopt;
  const auto& months = month_names();
  auto m = months.find(tokens[i]);
  if (m == months.end()) return std::nullopt;
  auto d = day_token(tokens[i + 1]);
  auto y = year_token(tokens[i + 2]);
  if (!d || !y) return std::nullopt;
  return NumericValue::make_date(*y, m->second, *d);
}

auto padded(const NumericValue& v) {
  return std::make_tuple(v.year, v.has_month ? v.month : 1, v.has_day ? v.day : 1);
}

bool is_dash(char32_t c) {
  return c == U'-' || (c >= U'‐' && c <= U'―') || c == U'−';
}

}  // namespace

NumericValue NumericValue::make_date(int year, std::optional<int> month, std::optional<int> day) {
  NumericValue v;
  v.kind = NumericKind::Date;
  v.year = year;
  v.has_month = month.has_value();
  v.month = month.value_or(0);
  v.has_day = day.has_value();
  v.day = day.value_or(0);
  return v;
}

std::optional<int> compare(const NumericValue& a, const NumericValue& b) {
  if (a.kind != b.kind) return std::nullopt;
  if (a.kind == NumericKind::Number) {
    if (a.number < b.number) return -1;
    if (a.number > b.number) return 1;
    return 0;
  }
  const auto ta = padded(a);
  const auto tb = padded(b);
  if (ta < tb) return -1;
  if (ta > tb) return 1;
  if (a.has_month != b.has_month || a.has_day != b.has_day) return std::nullopt;
  return 0;
}

bool rank_less(const NumericValue& a, const NumericValue& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.kind == NumericKind::Number) return a.number < b.number;
  return std::make_tuple(padded(a), a.has_month, a.has_day) <
         std::make_tuple(padded(b), b.has_month, b.has_day);
}

std::vector<NumericSpan> parse_numeric_spans(const std::vector<std::string>& tokens) {
  std::vector<NumericSpan> spans;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (auto v = month_day_year(tokens, i)) {
      spans.push_back({static_cast<int>(i), static_cast<int>(i + 3), *v});
      i += 3;
      continue;
    }
    if (auto v = single_token(tokens[i])) {
      spans.push_back({static_cast<int>(i), static_cast<int>(i + 1), *v});
    }
    ++i;
  }
  return spans;
}

std::optional<NumericValue> parse_cell_value(std::string_view text) {
  auto whole = [](std::string_view s) -> std::optional<NumericValue> {
    const auto tokens = normalize_tokenize(s);
    if (tokens.empty()) return std::nullopt;
    const auto spans = parse_numeric_spans(tokens);
    if (spans.size() == 1 && spans[0].token_start == 0 &&
        spans[0].token_end == static_cast<int>(tokens.size())) {
      return spans[0].value;
    }
    return std::nullopt;
  };
  // Range cells: the value before the first dash wins, since stripping the
  // dash would glue "1986-2004" into one literal.
  const std::u32string cps = to_code_points(text);
  // Normalization drops a leading minus sign, which would merge -3 with 3.
  if (cps.size() > 1 && (cps[0] == U'-' || cps[0] == U'−') && cps[1] >= U'0' && cps[1] <= U'9') {
    auto v = whole(to_utf8(std::u32string_view(cps).substr(1)));
    if (v && v->kind == NumericKind::Number) {
      v->number = -v->number;
      return v;
    }
  }
  for (std::size_t i = 1; i < cps.size(); ++i) {
    if (!is_dash(cps[i])) continue;
    if (auto v = whole(to_utf8(std::u32string_view(cps).substr(0, i)))) return v;
    break;
  }
  return whole(text);
}

ColumnType infer_column_type(const std::vector<std::string>& cells) {
  int numbers = 0;
  int dates = 0;
  int texts = 0;
  for (const auto& cell : cells) {
    if (normalize_tokenize(cell).empty()) continue;
    auto v = parse_cell_value(cell);
    if (!v) ++texts;
    else if (v->kind == NumericKind::Number) ++numbers;
    else ++dates;
  }
  if (numbers == 0 && dates == 0) return ColumnType::Text;
  if (numbers >= dates && numbers >= texts) return ColumnType::Number;
  if (dates >= texts) return ColumnType::Date;
  return ColumnType::Text;
}

void annotate_column_types(Table& table) {
  std::vector<ColumnType> types;
  types.reserve(table.num_cols());
  for (int c = 0; c < table.num_cols(); ++c) types.push_back(infer_column_type(table.column(c)));
  table.set_column_types(std::move(types));
}

}  // namespace tgqa::text
