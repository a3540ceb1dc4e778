#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "tgqa/core/dataset.hpp"

namespace tgqa::io {

/// Parses the release's coordinate lists, e.g. "['(0, 1)', '(1, 1)']". Accepts
/// either quote style, missing quotes and arbitrary whitespace. Throws
/// DataError on anything else.
std::vector<CellCoord> parse_coordinates(std::string_view s);

/// Parses a list of string literals such as "['Australia', \"Men's\"]".
/// Backslash escapes are honoured. Throws DataError when malformed.
std::vector<std::string> parse_answer_texts(std::string_view s);

/// RFC 4180 comma-separated text: quoted fields may contain commas, doubled
/// quotes and newlines. Throws DataError on an unterminated quote.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// First CSV row is the header. Throws DataError or InvalidTableError.
Table load_table_csv(const std::string& path, const std::string& table_id);

struct Reject {
  std::string file;
  int line = 0;  // 1-based line in the TSV, header is line 1
  std::string sequence_id;
  std::string reason;
  std::string raw;
};

struct LoadOptions {
  /// Throw DataError on the first malformed row instead of collecting rejects.
  bool strict = false;
  /// The release numbers positions from 0; turns are always stored 1-based.
  bool zero_based_positions = true;
};

struct LoadReport {
  int input_rows = 0;
  int accepted_rows = 0;
  std::vector<Reject> rejects;
  int non_rectangular = 0;
  int text_mismatch = 0;
  int empty_answers = 0;
};

struct LoadedSplit {
  Split split;
  LoadReport report;
};

/// Reads an SQA TSV (header id, annotator, position, question, table_file,
/// answer_coordinates, answer_text) and every table it references, resolving
/// table_file against tables_dir. Conversations keep first-appearance order
/// and are keyed "<id>_<annotator>". A sequence with non-consecutive
/// positions is rejected as a whole.
LoadedSplit load_split(const std::string& tsv_path, const std::string& tables_dir,
                       const LoadOptions& options = {});

/// Loads and merges several TSVs sharing one tables directory.
LoadedSplit load_splits(const std::vector<std::string>& tsv_paths, const std::string& tables_dir,
                        const LoadOptions& options = {});

void write_rejects(const std::vector<Reject>& rejects, const std::string& path);

}  // namespace tgqa::io
