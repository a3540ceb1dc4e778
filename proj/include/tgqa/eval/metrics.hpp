#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tgqa/core/table.hpp"
#include "tgqa/eval/config.hpp"

namespace tgqa::eval {

/// Lowercased, punctuation-stripped, whitespace-collapsed answer text.
std::string normalize_answer(std::string_view text);

/// Unordered multiset equality of normalized answer strings.
bool texts_match(const std::vector<std::string>& predicted, const std::vector<std::string>& gold);
/// Set equality of coordinates.
bool coords_match(const std::vector<CellCoord>& predicted, const std::vector<CellCoord>& gold);

/// A superlative token ends in "est" (with a short list of common non-superlative
/// exceptions such as "west") or is "most" / "least".
bool is_superlative(std::string_view question);

enum class ErrorCategory { Match, TableUnderstanding, ComplexMatch, Gold, AnswerSet, Context, Other };

const char* to_string(ErrorCategory c);
std::optional<ErrorCategory> error_category_from_string(std::string_view s);

/// One row of the manual error-labeling file. An exported row has no
/// category until a human assigns one.
struct ErrorAnnotation {
  std::string sequence_id;
  int position = 1;
  std::optional<ErrorCategory> category;
  std::string note;
};

struct SizeBucket {
  int min_cells = 0;
  int max_cells = 0;
  int count = 0;
  double accuracy = 0.0;
};

/// Accuracy over a named subset; absent when the subset is empty.
struct SubsetAccuracy {
  int count = 0;
  std::optional<double> accuracy;
};

struct EvalReport {
  EvalConfig config;
  int num_questions = 0;
  int num_sequences = 0;
  double all_acc = 0.0;
  double seq_acc = 0.0;
  /// pos_acc[k-1] averages position-k questions; absent when none exist.
  std::vector<std::optional<double>> pos_acc;
  std::vector<int> pos_count;
  /// Ten quantile buckets over per-question table cell counts (fewer when
  /// there are fewer questions).
  std::vector<SizeBucket> size_buckets;
  /// Questions on the 10% largest tables by cell count.
  SubsetAccuracy largest_tables;
  SubsetAccuracy superlative;
  std::vector<PredictionRecord> records;

  std::optional<double> pos(int k) const {
    return k >= 1 && k <= static_cast<int>(pos_acc.size()) ? pos_acc[k - 1] : std::nullopt;
  }
};

/// Aggregates per-question records grouped by sequence. Each group must hold
/// positions 1..k exactly once; anything else throws EvaluationError.
EvalReport compute_metrics(const std::vector<std::vector<PredictionRecord>>& sequences,
                           const EvalConfig& config = {});

/// Groups flat records by sequence id (first-appearance order), sorting each
/// group by position, then aggregates.
EvalReport compute_metrics(const std::vector<PredictionRecord>& records, const EvalConfig& config = {});

/// Error-labeling rows for every incorrect question, category unset.
std::vector<ErrorAnnotation> error_annotations(const EvalReport& report);

/// Plain-text ALL / SEQ / POS1 / POS2 / POS3 table in percent.
std::string summary_table(const EvalReport& report, const std::string& label = "model");

}  // namespace tgqa::eval
