#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tgqa::graph {

enum class NodeKind : uint8_t { Column, Row, Cell, Question, Token, QNumber };
inline constexpr int kNumNodeKinds = 6;

const char* to_string(NodeKind kind);
std::optional<NodeKind> node_kind_from_string(std::string_view s);

/// One embedding table per family; a node's input vector is the mean of the
/// embeddings of all its features.
enum class FeatureFamily : uint8_t {
  Kind,
  Word,
  ColumnIndex,
  RowIndex,
  AlignmentBin,
  Rank,
  InverseRank,
  AnswerFlag,
};
inline constexpr int kNumFeatureFamilies = 8;

const char* to_string(FeatureFamily family);
std::optional<FeatureFamily> feature_family_from_string(std::string_view s);

enum AnswerFlag : int { kAnswerRow = 0, kAnswerColumn = 1, kAnswerCell = 2 };
inline constexpr int kNumAnswerFlags = 3;
inline constexpr int kNumAlignmentBins = 5;

struct Feature {
  FeatureFamily family;
  int value;

  friend bool operator==(const Feature&, const Feature&) = default;
  friend auto operator<=>(const Feature&, const Feature&) = default;
};

/// Edge labels: 4 structural, 2 question links, 3 numeric comparisons,
/// clipped relative token positions, then SELF and NO_EDGE.
enum class EdgeLabel : uint8_t {
  ColumnToCell,
  CellToColumn,
  RowToCell,
  CellToRow,
  QuestionToTable,
  TableToQuestion,
  NumLesser,
  NumGreater,
  NumEqual,
  RelPosFirst,  // REL_POS(-clip)
};

inline constexpr int kRelPosClip = 6;
inline constexpr int kNumFixedLabels = 9;
inline constexpr int kNumRelPosLabels = 2 * kRelPosClip + 1;
inline constexpr EdgeLabel kSelf = static_cast<EdgeLabel>(kNumFixedLabels + kNumRelPosLabels);
inline constexpr EdgeLabel kNoEdge = static_cast<EdgeLabel>(kNumFixedLabels + kNumRelPosLabels + 1);
inline constexpr int kNumEdgeLabels = kNumFixedLabels + kNumRelPosLabels + 2;

/// REL_POS(clip(offset)) for token pair offset j - i.
EdgeLabel rel_pos(int offset);
std::string to_string(EdgeLabel label);
std::optional<EdgeLabel> edge_label_from_string(std::string_view s);
inline bool is_numeric(EdgeLabel l) {
  return l == EdgeLabel::NumLesser || l == EdgeLabel::NumGreater || l == EdgeLabel::NumEqual;
}

struct Node {
  NodeKind kind;
  std::vector<Feature> features;
  std::string text;      // normalized text (column name, cell, question, token)
  int column = -1;       // COLUMN / CELL
  std::vector<int> rows; // ROW: its row; CELL: every row collapsed into the node
  int token_start = -1;  // TOKEN: its index; QNUMBER: span start
  int token_end = -1;

  bool has_feature(FeatureFamily family, int value) const;
  std::vector<int> feature_values(FeatureFamily family) const;
};

/// Typed nodes plus a dense, total edge-label matrix.
class AnnotatedGraph {
 public:
  AnnotatedGraph() = default;
  explicit AnnotatedGraph(std::vector<Node> nodes);

  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int i) const { return nodes_.at(i); }
  Node& mutable_node(int i) { return nodes_.at(i); }

  EdgeLabel label(int i, int j) const { return labels_[static_cast<std::size_t>(i) * size() + j]; }
  void set_label(int i, int j, EdgeLabel l) { labels_[static_cast<std::size_t>(i) * size() + j] = l; }
  const std::vector<EdgeLabel>& labels() const { return labels_; }

  /// Column nodes in column order followed by row nodes in row order.
  std::vector<int> pointable() const;
  int column_node(int col) const { return column_nodes_.at(col); }
  int row_node(int row) const { return row_nodes_.at(row); }
  int num_columns() const { return static_cast<int>(column_nodes_.size()); }
  int num_rows() const { return static_cast<int>(row_nodes_.size()); }
  int question_node() const { return question_node_; }

  /// Node permutation: node i of the result is node perm[i] of this graph.
  AnnotatedGraph permuted(const std::vector<int>& perm) const;

 private:
  void index_nodes();

  std::vector<Node> nodes_;
  std::vector<EdgeLabel> labels_;
  std::vector<int> column_nodes_;
  std::vector<int> row_nodes_;
  int question_node_ = -1;
};

}  // namespace tgqa::graph
