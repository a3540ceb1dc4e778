#include "tgqa/graph/builder.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "tgqa/error.hpp"
#include "tgqa/text/normalize.hpp"

namespace tgqa::graph {

namespace {

Node make_node(NodeKind kind) {
  Node n;
  n.kind = kind;
  n.features.push_back({FeatureFamily::Kind, static_cast<int>(kind)});
  return n;
}

// Exact similarity (len - ed) / len in integers.
struct Score {
  int num = 0;
  int den = 1;

  bool links() const { return 2 * num > den; }
  // 5 bins of width 0.1 over (0.5, 1.0]: ceil(10 * num / den) - 5.
  int bin() const { return (10 * num + den - 1) / den - 5; }
  bool operator>(const Score& o) const {
    return static_cast<int64_t>(num) * o.den > static_cast<int64_t>(o.num) * den;
  }
  bool operator==(const Score& o) const {
    return static_cast<int64_t>(num) * o.den == static_cast<int64_t>(o.num) * den;
  }
};

std::string join(const std::vector<std::string>& tokens, int start, int end) {
  std::string out;
  for (int i = start; i < end; ++i) {
    if (i > start) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::vector<int> word_ids(const text::Vocabulary& vocab, const std::vector<std::string>& tokens) {
  std::set<int> ids;
  for (const auto& t : tokens) ids.insert(vocab.id(t));
  return {ids.begin(), ids.end()};
}

void add_words(Node& node, const std::vector<int>& ids) {
  for (int id : ids) node.features.push_back({FeatureFamily::Word, id});
}

void link(AnnotatedGraph& g, int a, int b, EdgeLabel ab, EdgeLabel ba) {
  g.set_label(a, b, ab);
  g.set_label(b, a, ba);
}

text::NumericKind kind_for(ColumnType t) {
  return t == ColumnType::Date ? text::NumericKind::Date : text::NumericKind::Number;
}

}  // namespace

int edit_distance(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<int> row(b.size() + 1);
  std::iota(row.begin(), row.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    int diag = row[0];
    row[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double normalized_edit_distance(std::string_view v, std::string_view w) {
  const auto a = text::to_code_points(v);
  const auto b = text::to_code_points(w);
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 0.0;
  return static_cast<double>(edit_distance(a, b)) / static_cast<double>(longest);
}

std::optional<Alignment> align_target(const std::vector<std::string>& tokens,
                                      std::string_view target, int max_ngram) {
  const auto target_cps = text::to_code_points(target);
  if (target_cps.empty()) return std::nullopt;
  const int n = static_cast<int>(tokens.size());
  std::optional<Alignment> best;
  Score best_score;
  for (int start = 0; start < n; ++start) {
    for (int end = start + 1; end <= std::min(n, start + max_ngram); ++end) {
      const auto span = text::to_code_points(join(tokens, start, end));
      const int longest = static_cast<int>(std::max(span.size(), target_cps.size()));
      const int length_gap =
          std::abs(static_cast<int>(span.size()) - static_cast<int>(target_cps.size()));
      if (2 * length_gap >= longest) continue;  // ed >= gap, cannot exceed 0.5
      const Score score{longest - edit_distance(span, target_cps), longest};
      if (!score.links()) continue;
      // Strictly better wins; on ties the earlier (leftmost) start was seen
      // first, and for the same start a longer span replaces a shorter one.
      const bool better = !best || score > best_score ||
                          (score == best_score && start == best->span_start && end > best->span_end);
      if (better) {
        best_score = score;
        best = Alignment{start, end, static_cast<double>(score.num) / score.den, score.bin()};
      }
    }
  }
  return best;
}

std::vector<TableAlignment> align_question_to_table(const std::vector<std::string>& tokens,
                                                    const Table& table, int max_ngram) {
  std::vector<TableAlignment> out;
  for (int c = 0; c < table.num_cols(); ++c) {
    const std::string name = text::normalize(table.column_name(c));
    if (auto m = align_target(tokens, name, max_ngram)) {
      out.push_back({AlignmentTargetKind::Column, c, name, *m});
    }
  }
  for (int c = 0; c < table.num_cols(); ++c) {
    std::set<std::string> seen;
    for (int r = 0; r < table.num_rows(); ++r) {
      std::string t = text::normalize(table.cell(r, c));
      if (!seen.insert(t).second) continue;
      if (auto m = align_target(tokens, t, max_ngram)) {
        out.push_back({AlignmentTargetKind::Cell, c, std::move(t), *m});
      }
    }
  }
  return out;
}

std::vector<std::optional<std::pair<int, int>>> rank_features(
    const std::vector<std::string>& cells, ColumnType column_type) {
  std::vector<std::optional<std::pair<int, int>>> out(cells.size());
  if (column_type == ColumnType::Text) return out;
  const auto kind = kind_for(column_type);
  std::vector<std::optional<text::NumericValue>> values(cells.size());
  std::vector<text::NumericValue> distinct;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto v = text::parse_cell_value(cells[i]);
    if (v && v->kind == kind) {
      values[i] = v;
      distinct.push_back(*v);
    }
  }
  std::sort(distinct.begin(), distinct.end(), text::rank_less);
  distinct.erase(std::unique(distinct.begin(), distinct.end(),
                             [](const auto& a, const auto& b) {
                               return !text::rank_less(a, b) && !text::rank_less(b, a);
                             }),
                 distinct.end());
  const int count = static_cast<int>(distinct.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!values[i]) continue;
    const auto it = std::lower_bound(distinct.begin(), distinct.end(), *values[i], text::rank_less);
    const int rank = static_cast<int>(it - distinct.begin()) + 1;
    out[i] = std::make_pair(rank, count + 1 - rank);
  }
  return out;
}

AnnotatedGraph build_graph(const Table& table, const text::Vocabulary& vocab,
                           const std::vector<std::string>& question_tokens,
                           const std::vector<text::NumericSpan>& spans,
                           const std::optional<std::vector<CellCoord>>& previous_answers,
                           const GraphOptions& options) {
  if (table.num_rows() < 1 || table.num_cols() < 1) {
    throw InvalidTableError("cannot build a graph for an empty table");
  }
  const int n_cols = table.num_cols();
  const int n_rows = table.num_rows();
  const int n_tokens = static_cast<int>(question_tokens.size());
  auto clamp_to = [](int v, int cap) { return std::min(v, cap - 1); };

  std::vector<Node> nodes;
  for (int c = 0; c < n_cols; ++c) {
    Node n = make_node(NodeKind::Column);
    n.text = text::normalize(table.column_name(c));
    add_words(n, word_ids(vocab, text::normalize_tokenize(table.column_name(c))));
    n.features.push_back({FeatureFamily::ColumnIndex, clamp_to(c, options.max_columns)});
    n.column = c;
    nodes.push_back(std::move(n));
  }
  for (int r = 0; r < n_rows; ++r) {
    Node n = make_node(NodeKind::Row);
    n.features.push_back({FeatureFamily::RowIndex, clamp_to(r, options.max_rows)});
    n.rows = {r};
    nodes.push_back(std::move(n));
  }

  // Cells collapse per column on identical normalized text.
  std::vector<std::vector<int>> cell_node_of(n_rows, std::vector<int>(n_cols, -1));
  std::vector<std::map<std::string, int>> cell_index(n_cols);
  for (int c = 0; c < n_cols; ++c) {
    const auto ranks = options.numeric_relations
                           ? rank_features(table.column(c), table.column_type(c))
                           : std::vector<std::optional<std::pair<int, int>>>(n_rows);
    for (int r = 0; r < n_rows; ++r) {
      const auto tokens = text::normalize_tokenize(table.cell(r, c));
      std::string key = text::normalize(table.cell(r, c));
      auto [it, inserted] = cell_index[c].emplace(key, static_cast<int>(nodes.size()));
      if (inserted) {
        Node n = make_node(NodeKind::Cell);
        n.text = key;
        add_words(n, word_ids(vocab, tokens));
        n.features.push_back({FeatureFamily::ColumnIndex, clamp_to(c, options.max_columns)});
        n.column = c;
        if (ranks[r]) {
          n.features.push_back({FeatureFamily::Rank, clamp_to(ranks[r]->first, options.max_rank)});
          n.features.push_back(
              {FeatureFamily::InverseRank, clamp_to(ranks[r]->second, options.max_rank)});
        }
        nodes.push_back(std::move(n));
      }
      Node& cell = nodes[it->second];
      cell.rows.push_back(r);
      cell.features.push_back({FeatureFamily::RowIndex, clamp_to(r, options.max_rows)});
      cell_node_of[r][c] = it->second;
    }
  }

  const int question = static_cast<int>(nodes.size());
  {
    Node n = make_node(NodeKind::Question);
    n.text = join(question_tokens, 0, n_tokens);
    n.features.push_back({FeatureFamily::Word, text::kQuestionNodeId});
    add_words(n, word_ids(vocab, question_tokens));
    nodes.push_back(std::move(n));
  }
  const int first_token = static_cast<int>(nodes.size());
  for (int t = 0; t < n_tokens; ++t) {
    Node n = make_node(NodeKind::Token);
    n.text = question_tokens[t];
    n.features.push_back({FeatureFamily::Word, vocab.id(question_tokens[t])});
    n.token_start = t;
    n.token_end = t + 1;
    nodes.push_back(std::move(n));
  }
  const int first_qnumber = static_cast<int>(nodes.size());
  if (options.numeric_relations) {
    for (const auto& span : spans) {
      if (span.token_start < 0 || span.token_end > n_tokens || span.token_start >= span.token_end) {
        throw InvalidExampleError("numeric span outside the question tokens");
      }
      Node n = make_node(NodeKind::QNumber);
      n.text = join(question_tokens, span.token_start, span.token_end);
      n.token_start = span.token_start;
      n.token_end = span.token_end;
      nodes.push_back(std::move(n));
    }
  }

  // Alignment bins are node features, so resolve them before freezing nodes.
  const auto alignments = align_question_to_table(question_tokens, table, options.max_ngram);
  for (const auto& a : alignments) {
    const int target = a.kind == AlignmentTargetKind::Column ? a.column
                                                              : cell_index[a.column].at(a.text);
    nodes[target].features.push_back({FeatureFamily::AlignmentBin, a.match.bin});
  }

  AnnotatedGraph g(std::move(nodes));

  for (int r = 0; r < n_rows; ++r) {
    for (int c = 0; c < n_cols; ++c) {
      const int cell = cell_node_of[r][c];
      link(g, c, cell, EdgeLabel::ColumnToCell, EdgeLabel::CellToColumn);
      link(g, n_cols + r, cell, EdgeLabel::RowToCell, EdgeLabel::CellToRow);
    }
  }

  for (int i = 0; i < g.size(); ++i) {
    const NodeKind k = g.node(i).kind;
    if (k == NodeKind::Token || k == NodeKind::Column || k == NodeKind::Cell) {
      link(g, question, i, EdgeLabel::QuestionToTable, EdgeLabel::TableToQuestion);
    }
  }
  for (int q = first_qnumber; q < g.size(); ++q) {
    for (int t = g.node(q).token_start; t < g.node(q).token_end; ++t) {
      link(g, q, first_token + t, EdgeLabel::QuestionToTable, EdgeLabel::TableToQuestion);
    }
  }
  for (const auto& a : alignments) {
    const int target = a.kind == AlignmentTargetKind::Column ? a.column
                                                              : cell_index[a.column].at(a.text);
    for (int t = a.match.span_start; t < a.match.span_end; ++t) {
      link(g, first_token + t, target, EdgeLabel::QuestionToTable, EdgeLabel::TableToQuestion);
    }
  }
  if (options.numeric_relations) {
    for (const auto& e : numeric_edges(g, table, spans)) {
      link(g, e.qnumber_node, e.cell_node, e.label, e.label);
    }
  }
  for (int i = 0; i < n_tokens; ++i) {
    for (int j = 0; j < n_tokens; ++j) {
      if (i != j) g.set_label(first_token + i, first_token + j, rel_pos(j - i));
    }
  }

  if (previous_answers) mark_previous_answers(g, *previous_answers);
  return g;
}

AnnotatedGraph build_graph(const Table& table, const text::Vocabulary& vocab,
                           std::string_view question,
                           const std::optional<std::vector<CellCoord>>& previous_answers,
                           const GraphOptions& options) {
  const auto tokens = text::normalize_tokenize(question);
  const auto spans = text::parse_numeric_spans(tokens);
  return build_graph(table, vocab, tokens, spans, previous_answers, options);
}

std::vector<NumericEdge> numeric_edges(const AnnotatedGraph& graph, const Table& table,
                                       const std::vector<text::NumericSpan>& spans) {
  std::vector<int> qnumbers;
  for (int i = 0; i < graph.size(); ++i) {
    if (graph.node(i).kind == NodeKind::QNumber) qnumbers.push_back(i);
  }
  std::vector<NumericEdge> out;
  if (qnumbers.size() != spans.size()) return out;
  for (int i = 0; i < graph.size(); ++i) {
    const Node& cell = graph.node(i);
    if (cell.kind != NodeKind::Cell) continue;
    const ColumnType type = table.column_type(cell.column);
    if (type == ColumnType::Text) continue;
    const auto value = text::parse_cell_value(table.cell(cell.rows.at(0), cell.column));
    if (!value || value->kind != kind_for(type)) continue;
    for (std::size_t s = 0; s < spans.size(); ++s) {
      const auto cmp = text::compare(*value, spans[s].value);
      if (!cmp) continue;
      const EdgeLabel label = *cmp > 0   ? EdgeLabel::NumGreater
                              : *cmp < 0 ? EdgeLabel::NumLesser
                                         : EdgeLabel::NumEqual;
      out.push_back({qnumbers[s], i, label});
    }
  }
  return out;
}

void mark_previous_answers(AnnotatedGraph& graph, const std::vector<CellCoord>& answers) {
  std::set<int> rows;
  std::set<int> cols;
  std::set<CellCoord> cells(answers.begin(), answers.end());
  for (const auto& a : answers) {
    rows.insert(a.row);
    cols.insert(a.col);
  }
  auto flag = [](Node& n, int f) {
    if (!n.has_feature(FeatureFamily::AnswerFlag, f)) n.features.push_back({FeatureFamily::AnswerFlag, f});
  };
  for (int i = 0; i < graph.size(); ++i) {
    Node& n = graph.mutable_node(i);
    switch (n.kind) {
      case NodeKind::Row:
        if (rows.contains(n.rows.at(0))) flag(n, kAnswerRow);
        break;
      case NodeKind::Column:
        if (cols.contains(n.column)) flag(n, kAnswerColumn);
        break;
      case NodeKind::Cell:
        for (int r : n.rows) {
          if (cells.contains({r, n.column})) {
            flag(n, kAnswerCell);
            break;
          }
        }
        break;
      default:
        break;
    }
  }
}

}  // namespace tgqa::graph
