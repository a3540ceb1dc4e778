#include "tgqa/graph/annotated_graph.hpp"

#include <algorithm>
#include <array>

#include "tgqa/error.hpp"

namespace tgqa::graph {

namespace {

constexpr std::array<const char*, kNumNodeKinds> kKindNames = {"COLUMN",   "ROW",   "CELL",
                                                               "QUESTION", "TOKEN", "QNUMBER"};
constexpr std::array<const char*, kNumFeatureFamilies> kFamilyNames = {
    "KIND", "WORD", "COLUMN_INDEX", "ROW_INDEX", "ALIGNMENT_BIN", "RANK", "INVERSE_RANK",
    "ANSWER_FLAG"};
constexpr std::array<const char*, kNumFixedLabels> kFixedLabelNames = {
    "COLUMN_TO_CELL",    "CELL_TO_COLUMN",    "ROW_TO_CELL", "CELL_TO_ROW", "QUESTION_TO_TABLE",
    "TABLE_TO_QUESTION", "NUM_LESSER", "NUM_GREATER", "NUM_EQUAL"};

}  // namespace

const char* to_string(NodeKind kind) { return kKindNames[static_cast<int>(kind)]; }

std::optional<NodeKind> node_kind_from_string(std::string_view s) {
  for (int i = 0; i < kNumNodeKinds; ++i) {
    if (s == kKindNames[i]) return static_cast<NodeKind>(i);
  }
  return std::nullopt;
}

const char* to_string(FeatureFamily family) { return kFamilyNames[static_cast<int>(family)]; }

std::optional<FeatureFamily> feature_family_from_string(std::string_view s) {
  for (int i = 0; i < kNumFeatureFamilies; ++i) {
    if (s == kFamilyNames[i]) return static_cast<FeatureFamily>(i);
  }
  return std::nullopt;
}

EdgeLabel rel_pos(int offset) {
  const int clipped = std::clamp(offset, -kRelPosClip, kRelPosClip);
  return static_cast<EdgeLabel>(static_cast<int>(EdgeLabel::RelPosFirst) + clipped + kRelPosClip);
}

std::string to_string(EdgeLabel label) {
  const int v = static_cast<int>(label);
  if (v < kNumFixedLabels) return kFixedLabelNames[v];
  if (label == kSelf) return "SELF";
  if (label == kNoEdge) return "NO_EDGE";
  return "REL_POS(" + std::to_string(v - static_cast<int>(EdgeLabel::RelPosFirst) - kRelPosClip) +
         ")";
}

std::optional<EdgeLabel> edge_label_from_string(std::string_view s) {
  for (int i = 0; i < kNumEdgeLabels; ++i) {
    if (to_string(static_cast<EdgeLabel>(i)) == s) return static_cast<EdgeLabel>(i);
  }
  return std::nullopt;
}

bool Node::has_feature(FeatureFamily family, int value) const {
  return std::find(features.begin(), features.end(), Feature{family, value}) != features.end();
}

std::vector<int> Node::feature_values(FeatureFamily family) const {
  std::vector<int> out;
  for (const auto& f : features) {
    if (f.family == family) out.push_back(f.value);
  }
  return out;
}

AnnotatedGraph::AnnotatedGraph(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  labels_.assign(nodes_.size() * nodes_.size(), kNoEdge);
  for (int i = 0; i < size(); ++i) set_label(i, i, kSelf);
  index_nodes();
}

void AnnotatedGraph::index_nodes() {
  column_nodes_.clear();
  row_nodes_.clear();
  question_node_ = -1;
  int max_col = -1;
  int max_row = -1;
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::Column) {
      if (n.column < 0) throw Error("column node without a column index");
      max_col = std::max(max_col, n.column);
    }
    if (n.kind == NodeKind::Row) {
      if (n.rows.size() != 1 || n.rows[0] < 0) throw Error("row node must name exactly one row");
      max_row = std::max(max_row, n.rows[0]);
    }
  }
  column_nodes_.assign(max_col + 1, -1);
  row_nodes_.assign(max_row + 1, -1);
  for (int i = 0; i < size(); ++i) {
    const auto& n = nodes_[i];
    if (n.kind == NodeKind::Question && question_node_ >= 0) throw Error("duplicate question node");
    if (n.kind == NodeKind::Column) {
      if (column_nodes_[n.column] >= 0) throw Error("duplicate column node");
      column_nodes_[n.column] = i;
    }
    if (n.kind == NodeKind::Row) {
      if (row_nodes_[n.rows[0]] >= 0) throw Error("duplicate row node");
      row_nodes_[n.rows[0]] = i;
    }
    if (n.kind == NodeKind::Question) question_node_ = i;
  }
  if (std::find(column_nodes_.begin(), column_nodes_.end(), -1) != column_nodes_.end() ||
      std::find(row_nodes_.begin(), row_nodes_.end(), -1) != row_nodes_.end()) {
    throw Error("column and row indexes must be contiguous");
  }
}

std::vector<int> AnnotatedGraph::pointable() const {
  std::vector<int> out = column_nodes_;
  out.insert(out.end(), row_nodes_.begin(), row_nodes_.end());
  return out;
}

AnnotatedGraph AnnotatedGraph::permuted(const std::vector<int>& perm) const {
  if (perm.size() != nodes_.size()) throw Error("permutation size does not match graph size");
  std::vector<Node> nodes;
  nodes.reserve(perm.size());
  for (int p : perm) nodes.push_back(nodes_.at(p));
  AnnotatedGraph out(std::move(nodes));
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) out.set_label(i, j, label(perm[i], perm[j]));
  }
  return out;
}

}  // namespace tgqa::graph
