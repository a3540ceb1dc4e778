#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "tgqa/core/dataset.hpp"
#include "tgqa/graph/annotated_graph.hpp"
#include "tgqa/graph/builder.hpp"
#include "tgqa/text/vocabulary.hpp"

namespace tgqa::io {

/// One graph as a JSON object: nodes (index, kind, text, column, rows,
/// features) and sparse [i, j, label] triples in row-major order, leaving out
/// SELF and NO_EDGE.
nlohmann::json graph_to_json(const graph::AnnotatedGraph& g);

/// The parsed form of a dump line.
struct DumpedGraph {
  std::string example_id;
  std::vector<graph::NodeKind> kinds;
  std::vector<std::vector<graph::Feature>> features;
  std::vector<std::tuple<int, int, graph::EdgeLabel>> edges;
};

/// Throws FormatError for unknown kinds, families or labels.
DumpedGraph parse_graph_dump(const nlohmann::json& j);

/// One line per question turn with "<sequence_id>#<position>" ids. Context
/// flags come from the gold previous answers. Returns the number of lines.
int dump_graphs(const Split& split, const text::Vocabulary& vocab, const std::string& out_path,
                const graph::GraphOptions& options = {});

}  // namespace tgqa::io
