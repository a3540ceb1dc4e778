#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "graph_oracle.hpp"
#include "fixtures.hpp"
#include "tgqa/error.hpp"
#include "tgqa/io/config.hpp"
#include "tgqa/io/graph_dump.hpp"
#include "tgqa/io/sqa.hpp"
#include "tgqa/text/normalize.hpp"
#include "tgqa/text/numeric.hpp"

using namespace tgqa;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kFixtureDir = std::string(TGQA_TEST_DATA) + "/sqa_fixture";

/// Fresh scratch directory per test case.
fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tgqa_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream(path) << content;
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  std::vector<json> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(json::parse(line));
  return out;
}

const char* kHeader = "id\tannotator\tposition\tquestion\ttable_file\tanswer_coordinates\tanswer_text\n";

}  // namespace

TEST_CASE("parse_coordinates accepts the release notation and its variants") {
  using C = std::vector<CellCoord>;
  CHECK(io::parse_coordinates("['(0, 1)', '(1, 1)']") == C{{0, 1}, {1, 1}});
  CHECK(io::parse_coordinates("[\"(2,0)\",\"(3,4)\" ]") == C{{2, 0}, {3, 4}});
  CHECK(io::parse_coordinates("[(10, 2)]") == C{{10, 2}});
  CHECK(io::parse_coordinates("  [ ]  ").empty());
  for (const char* bad : {"", "(0, 1)", "['(0, 1)'", "['(a, 1)']", "['(0 1)']", "['(0, 1)'] x", "['(-1, 0)']",
                          "['(0, 1) (2, 3)']"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(io::parse_coordinates(bad), DataError);
  }
}

TEST_CASE("parse_answer_texts handles both quote styles and escapes") {
  using S = std::vector<std::string>;
  CHECK(io::parse_answer_texts("['Australia', \"Men's 100m\"]") == S{"Australia", "Men's 100m"});
  CHECK(io::parse_answer_texts("['it\\'s', 'a, b']") == S{"it's", "a, b"});
  CHECK(io::parse_answer_texts("[]").empty());
  CHECK_THROWS_AS(io::parse_answer_texts("['open]"), DataError);
  CHECK_THROWS_AS(io::parse_answer_texts("[Australia]"), DataError);
}

TEST_CASE("parse_csv follows quoting rules") {
  const auto rows = io::parse_csv("a,b,c\r\n\"x, y\",\"say \"\"hi\"\"\",\n\"multi\nline\",2,3");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"a", "b", "c"});
  CHECK(rows[1] == std::vector<std::string>{"x, y", "say \"hi\"", ""});
  CHECK(rows[2] == std::vector<std::string>{"multi\nline", "2", "3"});
  CHECK_THROWS_AS(io::parse_csv("a,\"b"), DataError);
}

TEST_CASE("load_split on a single row gives one one-turn conversation") {
  const auto dir = scratch("single");
  write(dir / "t" / "m.csv", "Nation,Gold\nAustralia,2\nItaly,1\n");
  write(dir / "one.tsv", std::string(kHeader) + "nt-1\t0\t0\twhich won two?\tt/m.csv\t['(0, 0)']\t['Australia']\n");
  const auto loaded = io::load_split((dir / "one.tsv").string(), dir.string());
  REQUIRE(loaded.split.conversations.size() == 1);
  const auto& conv = loaded.split.conversations[0];
  CHECK(conv.sequence_id == "nt-1_0");
  CHECK(conv.table_id == "t/m.csv");
  REQUIRE(conv.turns.size() == 1);
  CHECK(conv.turns[0].position == 1);
  CHECK(conv.turns[0].gold_answers == std::vector<CellCoord>{{0, 0}});
  CHECK_FALSE(conv.turns[0].text_mismatch);
  CHECK(loaded.report.input_rows == 1);
  CHECK(loaded.report.accepted_rows == 1);
  CHECK(loaded.report.rejects.empty());
  // Column types are inferred on load.
  CHECK(loaded.split.tables.get("t/m.csv")->column_type(1) == ColumnType::Number);
}

TEST_CASE("bundled fixture matches its manifest") {
  std::ifstream in(kFixtureDir + "/manifest.json");
  REQUIRE(in);
  const json manifest = json::parse(in);
  const auto loaded = io::load_split(kFixtureDir + "/fixture.tsv", kFixtureDir);
  const auto& r = loaded.report;
  CHECK(r.input_rows == manifest["input_rows"].get<int>());
  CHECK(r.accepted_rows == manifest["accepted_rows"].get<int>());
  CHECK(static_cast<int>(r.rejects.size()) == manifest["rejected_rows"].get<int>());
  CHECK(r.accepted_rows + static_cast<int>(r.rejects.size()) == r.input_rows);
  CHECK(static_cast<int>(loaded.split.conversations.size()) == manifest["sequences"].get<int>());
  CHECK(static_cast<int>(loaded.split.num_questions()) == manifest["questions"].get<int>());
  CHECK(r.non_rectangular == manifest["non_rectangular"].get<int>());
  CHECK(r.text_mismatch == manifest["text_mismatch"].get<int>());
  CHECK(r.empty_answers == manifest["empty_answers"].get<int>());

  // Rejects are ordered by line and carry the raw row.
  for (std::size_t i = 1; i < r.rejects.size(); ++i) CHECK(r.rejects[i - 1].line < r.rejects[i].line);
  std::set<std::string> rejected_sequences;
  for (const auto& rej : r.rejects) {
    CHECK_FALSE(rej.raw.empty());
    CHECK_FALSE(rej.reason.empty());
    if (rej.reason.find("non-consecutive") != std::string::npos) rejected_sequences.insert(rej.sequence_id);
  }
  CHECK(static_cast<int>(rejected_sequences.size()) == manifest["rejected_sequences"].get<int>());

  // The out-of-order sequence is stored in position order.
  bool saw_reordered = false;
  for (const auto& conv : loaded.split.conversations) {
    for (std::size_t i = 0; i < conv.turns.size(); ++i) CHECK(conv.turns[i].position == static_cast<int>(i) + 1);
    if (conv.sequence_id == "nt-207_1") {
      saw_reordered = true;
      CHECK(conv.turns[0].text == "list every building");
    }
  }
  CHECK(saw_reordered);

  // Quoted CSV fields survive.
  const auto buildings = loaded.split.tables.get("table_csv/buildings.csv");
  CHECK(buildings->cell(4, 0) == "Bow, The");

  const auto out = scratch("fixture_rejects") / "rejects.jsonl";
  io::write_rejects(r.rejects, out.string());
  const auto lines = read_jsonl(out);
  REQUIRE(lines.size() == r.rejects.size());
  CHECK(lines[0]["line"].get<int>() == r.rejects[0].line);
}

TEST_CASE("strict loading stops at the first malformed row") {
  io::LoadOptions strict;
  strict.strict = true;
  CHECK_THROWS_AS(io::load_split(kFixtureDir + "/fixture.tsv", kFixtureDir, strict), DataError);
}

TEST_CASE("tables are loaded once and shared between sequences") {
  const auto dir = scratch("cache");
  write(dir / "m.csv", "Nation,Gold\nAustralia,2\nItaly,1\n");
  write(dir / "s.tsv", std::string(kHeader) + "a\t0\t0\tq\tm.csv\t['(0, 0)']\t['Australia']\n" +
                           "b\t0\t0\tq\tm.csv\t['(1, 0)']\t['Italy']\n" +
                           "c\t0\t0\tq\tnope.csv\t['(1, 0)']\t['Italy']\n" +
                           "d\t0\t0\tq\tnope.csv\t['(1, 0)']\t['Italy']\n");
  const auto loaded = io::load_split((dir / "s.tsv").string(), dir.string());
  REQUIRE(loaded.split.conversations.size() == 2);
  CHECK(loaded.split.tables.size() == 1);
  CHECK(loaded.split.tables.get(loaded.split.conversations[0].table_id).get() ==
        loaded.split.tables.get(loaded.split.conversations[1].table_id).get());
  REQUIRE(loaded.report.rejects.size() == 2);
  CHECK(loaded.report.rejects[0].reason == loaded.report.rejects[1].reason);
}

TEST_CASE("sequence-level rejections") {
  const auto dir = scratch("sequences");
  write(dir / "m.csv", "Nation,Gold\nAustralia,2\nItaly,1\n");
  write(dir / "n.csv", "City\nToronto\n");
  write(dir / "s.tsv", std::string(kHeader) +
                           "gap\t0\t0\tq1\tm.csv\t['(0, 0)']\t['Australia']\n"
                           "gap\t0\t2\tq3\tm.csv\t['(1, 0)']\t['Italy']\n"
                           "switch\t0\t0\tq1\tm.csv\t['(0, 0)']\t['Australia']\n"
                           "switch\t0\t1\tq2\tn.csv\t['(0, 0)']\t['Toronto']\n"
                           "pos\t0\tx\tq1\tm.csv\t['(0, 0)']\t['Australia']\n"
                           "ok\t0\t0\tq1\tm.csv\t['(0, 0)']\t['Australia']\n"
                           "ok\t1\t0\tq1\tm.csv\t['(1, 0)']\t['Italy']\n");
  const auto loaded = io::load_split((dir / "s.tsv").string(), dir.string());
  const auto& r = loaded.report;
  CHECK(r.input_rows == 7);
  CHECK(r.accepted_rows + static_cast<int>(r.rejects.size()) == 7);
  std::map<std::string, int> rejects_by_seq;
  for (const auto& rej : r.rejects) ++rejects_by_seq[rej.sequence_id];
  CHECK(rejects_by_seq["gap_0"] == 2);
  // The table switch rejects the offending row; the first turn stays valid.
  CHECK(rejects_by_seq["switch_0"] == 1);
  CHECK(rejects_by_seq["pos_0"] == 1);
  std::vector<std::string> ids;
  for (const auto& c : loaded.split.conversations) ids.push_back(c.sequence_id);
  CHECK(ids == std::vector<std::string>{"switch_0", "ok_0", "ok_1"});
}

TEST_CASE("one-based positions are accepted when configured") {
  const auto dir = scratch("onebased");
  write(dir / "m.csv", "Nation,Gold\nAustralia,2\nItaly,1\n");
  write(dir / "s.tsv", std::string(kHeader) + "a\t0\t1\tq1\tm.csv\t['(0, 0)']\t['Australia']\n" +
                           "a\t0\t2\tq2\tm.csv\t['(1, 0)']\t['Italy']\n");
  io::LoadOptions opts;
  opts.zero_based_positions = false;
  const auto loaded = io::load_split((dir / "s.tsv").string(), dir.string(), opts);
  REQUIRE(loaded.split.conversations.size() == 1);
  CHECK(loaded.split.conversations[0].turns[1].position == 2);
  // Read as zero-based, 1 and 2 do not start at 0 and the sequence is rejected.
  CHECK(io::load_split((dir / "s.tsv").string(), dir.string()).report.rejects.size() == 2);
}

TEST_CASE("missing header columns are a hard error") {
  const auto dir = scratch("header");
  write(dir / "s.tsv", "id\tposition\tquestion\n1\t0\tq\n");
  CHECK_THROWS_AS(io::load_split((dir / "s.tsv").string(), dir.string()), DataError);
  CHECK_THROWS_AS(io::load_split((dir / "absent.tsv").string(), dir.string()), DataError);
}

TEST_CASE("config files: domain checks, defaults and strictness") {
  const auto model = [](const json& j) { return io::configs_from_json(j).model; };
  CHECK(model({{"dropout", 0.4}}).dropout == doctest::Approx(0.4));
  try {
    io::configs_from_json({{"heads", 5}});
    FAIL("heads=5 accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("{4, 8, 16}") != std::string::npos);
  }
  CHECK_THROWS_AS(io::configs_from_json({{"dropout", 0.3}}), ConfigError);
  CHECK_THROWS_AS(io::configs_from_json({{"num_layers", 2}}), ConfigError);
  CHECK_THROWS_AS(io::configs_from_json({{"batch_size", 16}}), ConfigError);
  CHECK_THROWS_AS(io::configs_from_json({{"warmup_steps", 2001}}), ConfigError);
  // Outside the search space is fine when the domain check is off.
  CHECK(io::configs_from_json({{"num_layers", 2}, {"d_model", 32}, {"heads", 2}}, false).model.num_layers == 2);

  const auto defaults = io::configs_from_json(json::object());
  CHECK(defaults.train.total_steps == 100000);
  CHECK(defaults.train.warmup_steps == 2000);
  CHECK(defaults.model.d_model == 128);

  CHECK_THROWS_AS(io::configs_from_json({{"learning_rate", 0.1}}), ConfigError);
  CHECK_THROWS_AS(io::configs_from_json({{"num_layers", "three"}}), ConfigError);
  CHECK_THROWS_AS(io::configs_from_json({{"dropout", true}}), ConfigError);
  CHECK_THROWS_AS(io::configs_from_json({{"context_mode", "oracle"}}), ConfigError);
  CHECK_THROWS_AS(io::configs_from_json(json::array()), ConfigError);

  const auto both = io::configs_from_json({{"numeric_relations", false}, {"context_mode", "reference"},
                                           {"match_mode", "coords"}, {"grid", {{"dropout", {0.2, 0.4}}}}});
  CHECK_FALSE(both.train.numeric_relations);
  CHECK_FALSE(both.eval.numeric_relations);
  CHECK(both.eval.context_mode == eval::ContextMode::Reference);
  CHECK(both.eval.match_mode == eval::MatchMode::Coords);
  REQUIRE(both.train.grid.size() == 1);
  CHECK(both.train.grid[0].second.size() == 2);
  CHECK_THROWS_AS(io::configs_from_json({{"grid", {{"seed", {1, 2}}}}}), ConfigError);

  const auto dir = scratch("config");
  write(dir / "c.json", io::to_json(both).dump(2));
  const auto reloaded = io::load_config((dir / "c.json").string());
  CHECK(reloaded.model == both.model);
  CHECK(reloaded.train == both.train);
  CHECK(reloaded.eval == both.eval);
  write(dir / "bad.json", "{\"dropout\": ");
  CHECK_THROWS_AS(io::load_config((dir / "bad.json").string()), ConfigError);
  CHECK_THROWS_AS(io::load_config((dir / "absent.json").string()), Error);
}

TEST_CASE("dump_graphs writes one line per turn with context flags") {
  const auto split = fixture::medals_split();
  const text::Vocabulary vocab = text::Vocabulary::build(training::vocabulary_corpus(split));
  const auto out = scratch("dump") / "graphs.jsonl";
  CHECK(io::dump_graphs(split, vocab, out.string()) == 3);
  const auto lines = read_jsonl(out);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0]["example_id"] == "medals#1");
  CHECK(lines[1]["example_id"] == "medals#2");

  auto has_flag = [](const json& line) {
    for (const auto& n : line["nodes"]) {
      for (const auto& f : n["features"]) {
        if (f[0] == graph::to_string(graph::FeatureFamily::AnswerFlag)) return true;
      }
    }
    return false;
  };
  CHECK_FALSE(has_flag(lines[0]));
  CHECK(has_flag(lines[1]));

  // Turn 2: the token "gold" aligns with the Gold column in both directions.
  const auto& turn2 = lines[1];
  int gold_token = -1, gold_column = -1;
  for (const auto& n : turn2["nodes"]) {
    if (n["text"] != "gold") continue;
    if (n["kind"] == graph::to_string(graph::NodeKind::Token)) gold_token = n["index"];
    if (n["kind"] == graph::to_string(graph::NodeKind::Column)) gold_column = n["index"];
  }
  REQUIRE(gold_token >= 0);
  REQUIRE(gold_column >= 0);
  std::set<std::tuple<int, int, std::string>> edges;
  for (const auto& e : turn2["edges"]) edges.insert({e[0].get<int>(), e[1].get<int>(), e[2].get<std::string>()});
  CHECK(edges.count({gold_token, gold_column, graph::to_string(graph::EdgeLabel::QuestionToTable)}) == 1);
  CHECK(edges.count({gold_column, gold_token, graph::to_string(graph::EdgeLabel::TableToQuestion)}) == 1);

  // Re-parsed graphs agree with the in-memory ones.
  const auto table = split.tables.get("medals");
  std::optional<std::vector<CellCoord>> previous;
  for (std::size_t t = 0; t < 3; ++t) {
    const auto& turn = split.conversations[0].turns[t];
    const auto g = graph::build_graph(*table, vocab, turn.text, previous);
    const auto parsed = io::parse_graph_dump(lines[t]);
    REQUIRE(static_cast<int>(parsed.kinds.size()) == g.size());
    std::map<graph::EdgeLabel, int> in_memory, dumped;
    for (int i = 0; i < g.size(); ++i) {
      CHECK(parsed.kinds[i] == g.node(i).kind);
      CHECK(parsed.features[i] == g.node(i).features);
      for (int j = 0; j < g.size(); ++j) {
        const auto l = g.label(i, j);
        if (l != graph::kSelf && l != graph::kNoEdge) ++in_memory[l];
      }
    }
    for (const auto& [i, j, l] : parsed.edges) {
      ++dumped[l];
      CHECK(g.label(i, j) == l);
    }
    CHECK(dumped == in_memory);
    previous = turn.gold_answers;
  }
}

TEST_CASE("dump of a 1x1 table matches the brute-force edge set") {
  Conversation conv{"tiny", "tiny", {}};
  QuestionTurn turn;
  turn.position = 1;
  turn.text = "what is 5";
  turn.gold_answers = {{0, 0}};
  conv.turns.push_back(turn);
  const auto split = make_split({Table("tiny", {"Value"}, {{"7"}})}, {conv});
  const auto out = scratch("tiny") / "g.jsonl";
  REQUIRE(io::dump_graphs(split, text::Vocabulary(), out.string()) == 1);
  const auto parsed = io::parse_graph_dump(read_jsonl(out).at(0));

  const auto table = split.tables.get("tiny");
  const auto tokens = text::normalize_tokenize(turn.text);
  const auto labels = oracle::oracle_labels(*table, tokens, text::parse_numeric_spans(tokens));
  const int n = static_cast<int>(parsed.kinds.size());
  REQUIRE(labels.size() == static_cast<std::size_t>(n) * n);
  std::set<std::tuple<int, int, graph::EdgeLabel>> expected, got(parsed.edges.begin(), parsed.edges.end());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto l = labels[static_cast<std::size_t>(i) * n + j];
      if (l != graph::kSelf && l != graph::kNoEdge) expected.insert({i, j, l});
    }
  }
  CHECK(got == expected);
  CHECK(got.size() == parsed.edges.size());
}

TEST_CASE("malformed graph dumps are rejected") {
  CHECK_THROWS_AS(io::parse_graph_dump(json::object()), FormatError);
  CHECK_THROWS_AS(io::parse_graph_dump({{"nodes", {{{"kind", "GALAXY"}, {"features", json::array()}}}},
                                        {"edges", json::array()}}),
                  FormatError);
  const json one_node = {{"kind", graph::to_string(graph::NodeKind::Question)}, {"features", json::array()}};
  CHECK_THROWS_AS(io::parse_graph_dump({{"nodes", {one_node}}, {"edges", {{0, 3, "SELF"}}}}), FormatError);
  CHECK_THROWS_AS(io::parse_graph_dump({{"nodes", {one_node}}, {"edges", {{0, 0, "NOT_A_LABEL"}}}}), FormatError);
}
