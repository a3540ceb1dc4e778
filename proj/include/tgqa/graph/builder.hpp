#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tgqa/core/table.hpp"
#include "tgqa/graph/annotated_graph.hpp"
#include "tgqa/text/numeric.hpp"
#include "tgqa/text/vocabulary.hpp"

namespace tgqa::graph {

/// Character-level Levenshtein distance over code points divided by the
/// longer length; two empty strings are at distance 0.
double normalized_edit_distance(std::string_view v, std::string_view w);

/// Edit distance over code points.
int edit_distance(std::u32string_view a, std::u32string_view b);

struct Alignment {
  int span_start = 0;
  int span_end = 0;  // exclusive
  double similarity = 0.0;
  int bin = 0;       // 1..kNumAlignmentBins
};

/// Best question n-gram for one target text, if its similarity (1 - ned)
/// exceeds 0.5. Ties prefer the leftmost, then the longest span.
std::optional<Alignment> align_target(const std::vector<std::string>& tokens,
                                      std::string_view target, int max_ngram = 6);

enum class AlignmentTargetKind { Column, Cell };

struct TableAlignment {
  AlignmentTargetKind kind;
  int column;
  std::string text;  // normalized target text (collapsed cell key)
  Alignment match;
};

/// Alignments against every column name and every distinct cell text.
std::vector<TableAlignment> align_question_to_table(const std::vector<std::string>& tokens,
                                                    const Table& table, int max_ngram = 6);

/// Dense rank with 1 = smallest (and inverse rank with 1 = largest) for the
/// cells whose value has the column's kind; others get nothing.
std::vector<std::optional<std::pair<int, int>>> rank_features(
    const std::vector<std::string>& cells, ColumnType column_type);

struct GraphOptions {
  bool numeric_relations = true;
  int max_ngram = 6;
  // Index-valued features are clamped to these capacities.
  int max_columns = 64;
  int max_rows = 512;
  int max_rank = 512;
};

/// Builds the question/table graph. `table` must carry inferred column types.
/// `previous_answers`, when present, are marked with ANSWER_* features.
AnnotatedGraph build_graph(const Table& table, const text::Vocabulary& vocab,
                           const std::vector<std::string>& question_tokens,
                           const std::vector<text::NumericSpan>& spans,
                           const std::optional<std::vector<CellCoord>>& previous_answers,
                           const GraphOptions& options = {});

/// Convenience: tokenizes and parses `question` first.
AnnotatedGraph build_graph(const Table& table, const text::Vocabulary& vocab,
                           std::string_view question,
                           const std::optional<std::vector<CellCoord>>& previous_answers,
                           const GraphOptions& options = {});

/// Adds ANSWER_ROW / ANSWER_COLUMN / ANSWER_CELL features for `answers`.
void mark_previous_answers(AnnotatedGraph& graph, const std::vector<CellCoord>& answers);

/// The QNUMBER-cell comparison edges that build_graph writes, as
/// (qnumber node, cell node, label) triples.
struct NumericEdge {
  int qnumber_node;
  int cell_node;
  EdgeLabel label;
};
std::vector<NumericEdge> numeric_edges(const AnnotatedGraph& graph, const Table& table,
                                       const std::vector<text::NumericSpan>& spans);

}  // namespace tgqa::graph
