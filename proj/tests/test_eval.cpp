#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "fixtures.hpp"
#include "tgqa/error.hpp"
#include "tgqa/eval/report_io.hpp"
#include "tgqa/graph/builder.hpp"
#include "tgqa/rng.hpp"

using namespace tgqa;
using namespace tgqa::eval;

namespace {

std::vector<std::vector<PredictionRecord>> correctness_fixture(const std::vector<std::vector<int>>& m) {
  std::vector<std::vector<PredictionRecord>> out;
  for (std::size_t s = 0; s < m.size(); ++s) {
    std::vector<PredictionRecord> seq;
    for (std::size_t k = 0; k < m[s].size(); ++k) {
      PredictionRecord r;
      r.sequence_id = "s" + std::to_string(s);
      r.position = static_cast<int>(k) + 1;
      r.correct = m[s][k] != 0;
      r.table_cells = static_cast<int>(s + 1);
      seq.push_back(r);
    }
    out.push_back(std::move(seq));
  }
  return out;
}

/// Answers every turn correctly except turn 1 of the listed sequences, and
/// answers later turns correctly only when the context it is handed is the
/// gold answer of the previous turn.
class ScriptedPredictor : public Predictor {
 public:
  ScriptedPredictor(const Split& split, std::vector<std::string> wrong_first)
      : split_(split), wrong_(std::move(wrong_first)) {}

  AnswerSelection predict(const PredictRequest& req) const override {
    ++calls;
    const Conversation* conv = nullptr;
    for (const auto& c : split_.conversations) {
      if (c.sequence_id == req.sequence_id) conv = &c;
    }
    const auto& turn = conv->turns[req.position - 1];
    const AnswerSelection gold = selection_from_cells(turn.gold_answers);
    const AnswerSelection wrong{{(gold.columns[0] + 1) % req.table.num_cols()}, gold.rows};
    if (req.position == 1) {
      if (req.previous_answers) throw Error("turn 1 must not carry context");
      return std::count(wrong_.begin(), wrong_.end(), req.sequence_id) ? wrong : gold;
    }
    if (!req.previous_answers) return wrong;
    const auto& prev = conv->turns[req.position - 2].gold_answers;
    return coords_match(*req.previous_answers, prev) ? gold : wrong;
  }
  mutable int calls = 0;

 private:
  const Split& split_;
  std::vector<std::string> wrong_;
};

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("tgqa_" + name)).string();
}

}  // namespace

TEST_CASE("answer matching examples") {
  CHECK(texts_match({"australia"}, {"australia"}));
  CHECK(texts_match({"Australia"}, {"australia "}));
  CHECK_FALSE(texts_match({"carl fogarty", "carl fogarty"}, {"carl fogarty"}));
  CHECK(texts_match({}, {}));
  CHECK(texts_match({"b", "a", "a"}, {"a", "b", "a"}));
  CHECK_FALSE(texts_match({"a", "a", "b"}, {"a", "b", "b"}));
  CHECK(coords_match({}, {}));
  CHECK(coords_match({{1, 0}, {0, 0}}, {{0, 0}, {1, 0}}));
  CHECK_FALSE(coords_match({{1, 0}}, {{0, 0}}));
}

TEST_CASE("answer matching is symmetric and reflexive") {
  SplitMix64 rng(17);
  const std::vector<std::string> pool = {"a", "b", "c", "A", "b "};
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> x, y;
    for (uint64_t i = rng.below(4); i > 0; --i) x.push_back(pool[rng.below(pool.size())]);
    for (uint64_t i = rng.below(4); i > 0; --i) y.push_back(pool[rng.below(pool.size())]);
    CHECK(texts_match(x, x));
    CHECK(texts_match(x, y) == texts_match(y, x));
    std::vector<CellCoord> a, b;
    for (uint64_t i = rng.below(4); i > 0; --i) a.push_back({int(rng.below(3)), int(rng.below(2))});
    for (uint64_t i = rng.below(4); i > 0; --i) b.push_back({int(rng.below(3)), int(rng.below(2))});
    CHECK(coords_match(a, a));
    CHECK(coords_match(a, b) == coords_match(b, a));
  }
}

TEST_CASE("metric fixture") {
  const auto rep = compute_metrics(correctness_fixture({{1, 1, 0}, {1, 0, 0}}));
  CHECK(rep.all_acc == 0.5);
  CHECK(rep.seq_acc == 0.0);
  CHECK(rep.pos(1) == 1.0);
  CHECK(rep.pos(2) == 0.5);
  CHECK(rep.pos(3) == 0.0);
  CHECK_FALSE(rep.pos(4).has_value());
  CHECK(rep.num_questions == 6);
  CHECK(rep.num_sequences == 2);

  const auto perfect = compute_metrics(correctness_fixture({{1, 1}, {1, 1, 1}}));
  CHECK(perfect.all_acc == 1.0);
  CHECK(perfect.seq_acc == 1.0);
  for (int k = 1; k <= 3; ++k) CHECK(perfect.pos(k) == 1.0);

  const auto single = compute_metrics(correctness_fixture({{1}}));
  CHECK(single.all_acc == 1.0);
  CHECK(single.seq_acc == 1.0);
  CHECK(single.pos(1) == 1.0);
  CHECK_FALSE(single.pos(2).has_value());
  CHECK_FALSE(single.pos(3).has_value());
}

TEST_CASE("missing or duplicated records are an incomplete evaluation") {
  auto seqs = correctness_fixture({{1, 1, 0}});
  seqs[0].erase(seqs[0].begin() + 1);
  CHECK_THROWS_AS(compute_metrics(seqs), EvaluationError);
  seqs = correctness_fixture({{1, 1}});
  seqs[0][1].position = 1;
  CHECK_THROWS_AS(compute_metrics(seqs), EvaluationError);
  seqs = correctness_fixture({{1}});
  seqs[0].clear();
  CHECK_THROWS_AS(compute_metrics(seqs), EvaluationError);
}

TEST_CASE("metric invariants on random correctness matrices") {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    const bool fixed = trial % 2 == 0;
    const int len = 1 + static_cast<int>(rng.below(5));
    std::vector<std::vector<int>> m(1 + rng.below(12));
    int total = 0, ok = 0, seq_ok = 0;
    std::map<int, std::pair<int, int>> pos;
    for (auto& row : m) {
      row.resize(fixed ? len : 1 + rng.below(5));
      bool all = true;
      for (std::size_t k = 0; k < row.size(); ++k) {
        row[k] = rng.uniform() < 0.6;
        ++total;
        ok += row[k];
        all = all && row[k];
        pos[int(k) + 1].first += row[k];
        ++pos[int(k) + 1].second;
      }
      seq_ok += all;
    }
    const auto rep = compute_metrics(correctness_fixture(m));
    CHECK(rep.all_acc == doctest::Approx(double(ok) / total).epsilon(1e-15));
    CHECK(rep.seq_acc == doctest::Approx(double(seq_ok) / m.size()).epsilon(1e-15));
    for (const auto& [k, c] : pos) CHECK(*rep.pos(k) == doctest::Approx(double(c.first) / c.second));
    if (fixed) {
      // For equal-length sequences ALL is the mean of the POSk, each >= SEQ.
      CHECK(rep.seq_acc <= rep.all_acc);
      for (int k = 1; k <= len; ++k) CHECK(rep.seq_acc <= *rep.pos(k));
    }
    int bucketed = 0;
    for (const auto& b : rep.size_buckets) {
      bucketed += b.count;
      CHECK(b.min_cells <= b.max_cells);
    }
    CHECK(bucketed == total);
    CHECK(rep.largest_tables.count == (total + 9) / 10);
  }
}

TEST_CASE("SEQ can exceed ALL when sequence lengths differ") {
  // A short correct sequence outweighs a long wrong one in SEQ but not in ALL.
  const auto rep = compute_metrics(correctness_fixture({{1}, {0, 0, 0, 0}}));
  CHECK(rep.all_acc == doctest::Approx(0.2));
  CHECK(rep.seq_acc == 0.5);
}

TEST_CASE("superlative detection") {
  CHECK(is_superlative("which is the tallest building?"));
  CHECK(is_superlative("what is the most expensive car"));
  CHECK(is_superlative("who scored the least?"));
  CHECK(is_superlative("which team is the best"));
  CHECK_FALSE(is_superlative("what are all the nations?"));
  CHECK_FALSE(is_superlative("which cities are in the west"));
  CHECK_FALSE(is_superlative("which of those had interest"));
}

TEST_CASE("reference context beats predicted context after injected first-turn errors") {
  const auto split = fixture::to_split(synthetic::overfit_dataset(2, 3, 4));
  const ScriptedPredictor p(split, {split.conversations[0].sequence_id, split.conversations[3].sequence_id});
  EvalConfig pred;
  EvalConfig ref;
  ref.context_mode = ContextMode::Reference;
  EvalConfig none;
  none.context_mode = ContextMode::None;
  const auto rp = evaluate(p, split, pred);
  const auto rr = evaluate(p, split, ref);
  const auto rn = evaluate(p, split, none);
  CHECK(p.calls == 3 * static_cast<int>(split.num_questions()));
  CHECK(rp.pos(1) == rr.pos(1));
  CHECK(*rp.pos(1) == doctest::Approx(4.0 / 6.0));
  CHECK(rr.all_acc > rp.all_acc);
  // Reference mode only loses the two injected questions.
  CHECK(rr.all_acc == doctest::Approx(16.0 / 18.0));
  // Predicted mode propagates each injected error through the rest of its sequence.
  CHECK(rp.all_acc == doctest::Approx(12.0 / 18.0));
  CHECK(rn.all_acc == doctest::Approx(4.0 / 18.0));
}

TEST_CASE("predicted context is the previous prediction's cells") {
  const auto split = fixture::medals_split();
  struct Recorder : Predictor {
    mutable std::vector<std::optional<std::vector<CellCoord>>> seen;
    AnswerSelection predict(const PredictRequest& r) const override {
      seen.push_back(r.previous_answers);
      return {{0, 2}, {static_cast<int>(seen.size()) - 1}};
    }
  } rec;
  const auto rep = evaluate(rec, split, {});
  REQUIRE(rec.seen.size() == 3);
  CHECK_FALSE(rec.seen[0].has_value());
  CHECK(rec.seen[1] == std::vector<CellCoord>{{0, 0}, {0, 2}});
  CHECK(rec.seen[2] == std::vector<CellCoord>{{1, 0}, {1, 2}});
  CHECK(rep.records[1].predicted_texts == std::vector<std::string>{"2", "1"});
  CHECK(rep.records[0].table_cells == 48);
}

TEST_CASE("match modes differ on duplicate texts in other rows") {
  // Great Britain and France both have Total "1" in rows 6 and 7.
  Split split = fixture::medals_split();
  auto& turn = split.conversations[0].turns[0];
  turn.gold_answers = {{7, 5}};
  turn.gold_answer_texts = {"1"};
  split.conversations[0].turns.resize(1);
  struct Fixed : Predictor {
    AnswerSelection predict(const PredictRequest&) const override { return {{5}, {6}}; }
  } p;
  EvalConfig coords;
  coords.match_mode = MatchMode::Coords;
  CHECK(evaluate(p, split, {}).records[0].correct);
  CHECK_FALSE(evaluate(p, split, coords).records[0].correct);
}

TEST_CASE("numeric ablation removes every numeric trace from the graphs") {
  const auto split = fixture::to_split(synthetic::overfit_dataset(3, 2, 8));
  const text::Vocabulary vocab;
  const auto cfg = fixture::small_model();
  int numeric_with = 0;
  for (const auto& conv : split.conversations) {
    const auto table = split.tables.get(conv.table_id);
    for (const auto& turn : conv.turns) {
      for (bool numeric : {true, false}) {
        const auto g = graph::build_graph(*table, vocab, turn.text, std::nullopt, cfg.graph_options(numeric));
        int count = 0;
        for (auto l : g.labels()) count += graph::is_numeric(l);
        for (const auto& n : g.nodes()) {
          count += n.kind == graph::NodeKind::QNumber;
          count += !n.feature_values(graph::FeatureFamily::Rank).empty();
          count += !n.feature_values(graph::FeatureFamily::InverseRank).empty();
        }
        if (numeric) {
          numeric_with += count;
        } else {
          CHECK(count == 0);
        }
      }
    }
  }
  CHECK(numeric_with > 0);
}

TEST_CASE("unknown table references fail evaluation") {
  Split split = fixture::medals_split();
  split.conversations[0].table_id = "missing";
  struct Never : Predictor {
    AnswerSelection predict(const PredictRequest&) const override { return {{0}, {0}}; }
  } p;
  CHECK_THROWS_AS(evaluate(p, split, {}), DataError);
}

TEST_CASE("report JSON round trip and summary table") {
  auto seqs = correctness_fixture({{1, 1, 0}, {1, 0, 0}, {1}});
  seqs[0][0].superlative = true;
  seqs[0][0].predicted = {{1}, {0, 2}};
  seqs[0][0].predicted_cells = {{0, 1}, {2, 1}};
  seqs[0][0].predicted_texts = {"x", "y"};
  EvalConfig cfg;
  cfg.context_mode = ContextMode::Reference;
  const auto rep = compute_metrics(seqs, cfg);
  const std::string path = temp_path("report.json");
  write_report(rep, path);
  const auto back = read_report(path);
  CHECK(back.config == rep.config);
  CHECK(back.all_acc == rep.all_acc);
  CHECK(back.seq_acc == rep.seq_acc);
  CHECK(back.pos_acc == rep.pos_acc);
  CHECK(back.superlative.count == 1);
  REQUIRE(back.records.size() == rep.records.size());
  CHECK(back.records[0].predicted == rep.records[0].predicted);
  CHECK(back.records[0].predicted_cells == rep.records[0].predicted_cells);

  auto j = report_to_json(rep);
  j["all"] = 0.9;
  CHECK_THROWS_AS(report_from_json(j), FormatError);
  j = report_to_json(rep);
  j["records"].erase(1);
  CHECK_THROWS_AS(report_from_json(j), FormatError);

  const auto table = summary_table(rep, "toy");
  CHECK(table.find("ALL") != std::string::npos);
  CHECK(table.find("POS3") != std::string::npos);
  CHECK(table.find("57.1") != std::string::npos);  // 4 of 7 questions
  const auto one = summary_table(compute_metrics(correctness_fixture({{1}})));
  CHECK(one.find("-") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("error annotation export and ingest") {
  const auto rep = compute_metrics(correctness_fixture({{1, 0, 0}}));
  const auto rows = error_annotations(rep);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].position == 2);
  CHECK_FALSE(rows[0].category.has_value());
  const std::string path = temp_path("errors.jsonl");
  auto labeled = rows;
  labeled[1].category = ErrorCategory::AnswerSet;
  write_annotations(labeled, path);
  const auto back = read_annotations(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].sequence_id == "s0");
  CHECK_FALSE(back[0].category.has_value());
  CHECK(back[1].category == ErrorCategory::AnswerSet);
  CHECK(back[1].note == labeled[1].note);
  for (auto c : {ErrorCategory::Match, ErrorCategory::TableUnderstanding, ErrorCategory::ComplexMatch,
                 ErrorCategory::Gold, ErrorCategory::AnswerSet, ErrorCategory::Context, ErrorCategory::Other}) {
    CHECK(error_category_from_string(to_string(c)) == c);
  }
  {
    std::ofstream out(path);
    out << R"({"sequence_id": "s0", "position": 2, "category": "TYPO", "note": ""})" << "\n";
  }
  CHECK_THROWS_AS(read_annotations(path), FormatError);
  std::filesystem::remove(path);
}
