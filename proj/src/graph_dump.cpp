#include "tgqa/io/graph_dump.hpp"

#include <fstream>

#include "tgqa/error.hpp"

namespace tgqa::io {

using nlohmann::json;

json graph_to_json(const graph::AnnotatedGraph& g) {
  json nodes = json::array();
  for (int i = 0; i < g.size(); ++i) {
    const auto& n = g.node(i);
    json features = json::array();
    for (const auto& f : n.features) features.push_back({graph::to_string(f.family), f.value});
    json node = {{"index", i}, {"kind", graph::to_string(n.kind)}, {"text", n.text}, {"features", features}};
    if (n.column >= 0) node["column"] = n.column;
    if (!n.rows.empty()) node["rows"] = n.rows;
    if (n.token_start >= 0) node["tokens"] = {n.token_start, n.token_end};
    nodes.push_back(std::move(node));
  }
  json edges = json::array();
  for (int i = 0; i < g.size(); ++i) {
    for (int j = 0; j < g.size(); ++j) {
      const auto l = g.label(i, j);
      if (l == graph::kSelf || l == graph::kNoEdge) continue;
      edges.push_back({i, j, graph::to_string(l)});
    }
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

DumpedGraph parse_graph_dump(const json& j) {
  DumpedGraph d;
  try {
    d.example_id = j.value("example_id", "");
    for (const auto& n : j.at("nodes")) {
      const auto kind = graph::node_kind_from_string(n.at("kind").get<std::string>());
      if (!kind) throw FormatError("unknown node kind " + n.at("kind").dump());
      d.kinds.push_back(*kind);
      std::vector<graph::Feature> fs;
      for (const auto& f : n.at("features")) {
        const auto fam = graph::feature_family_from_string(f.at(0).get<std::string>());
        if (!fam) throw FormatError("unknown feature family " + f.at(0).dump());
        fs.push_back({*fam, f.at(1).get<int>()});
      }
      d.features.push_back(std::move(fs));
    }
    const int n = static_cast<int>(d.kinds.size());
    for (const auto& e : j.at("edges")) {
      const int a = e.at(0).get<int>();
      const int b = e.at(1).get<int>();
      const auto label = graph::edge_label_from_string(e.at(2).get<std::string>());
      if (!label) throw FormatError("unknown edge label " + e.at(2).dump());
      if (a < 0 || a >= n || b < 0 || b >= n) throw FormatError("edge endpoint out of range");
      d.edges.emplace_back(a, b, *label);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed graph dump: ") + e.what());
  }
  return d;
}

int dump_graphs(const Split& split, const text::Vocabulary& vocab, const std::string& out_path,
                const graph::GraphOptions& options) {
  std::ofstream out(out_path);
  if (!out) throw Error("cannot open " + out_path + " for writing");
  int lines = 0;
  for (const auto& conv : split.conversations) {
    const auto table = split.tables.get(conv.table_id);
    std::optional<std::vector<CellCoord>> previous;
    for (const auto& turn : conv.turns) {
      const auto g = graph::build_graph(*table, vocab, turn.text, previous, options);
      json j = graph_to_json(g);
      j["example_id"] = conv.sequence_id + "#" + std::to_string(turn.position);
      j["sequence_id"] = conv.sequence_id;
      j["position"] = turn.position;
      j["table_id"] = conv.table_id;
      j["question"] = turn.text;
      out << j.dump() << "\n";
      ++lines;
      previous = turn.gold_answers;
    }
  }
  if (!out) throw Error("failed writing " + out_path);
  return lines;
}

}  // namespace tgqa::io
