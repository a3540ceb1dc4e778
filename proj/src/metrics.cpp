#include "tgqa/eval/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "tgqa/error.hpp"
#include "tgqa/text/normalize.hpp"

namespace tgqa::eval {

namespace {

const std::set<std::string>& not_superlative() {
  static const std::set<std::string> words = {
      "west",   "rest",    "test",    "nest",    "chest",   "guest",  "quest",
      "forest", "interest", "request", "contest", "protest", "honest", "modest", "digest",
      "suggest", "harvest", "arrest",  "manifest", "everest", "budapest", "bucharest", "midwest"};
  return words;
}

SubsetAccuracy subset(const std::vector<const PredictionRecord*>& rs) {
  SubsetAccuracy s;
  s.count = static_cast<int>(rs.size());
  if (s.count == 0) return s;
  int ok = 0;
  for (const auto* r : rs) ok += r->correct;
  s.accuracy = static_cast<double>(ok) / s.count;
  return s;
}

}  // namespace

std::string normalize_answer(std::string_view text) { return text::normalize(text); }

bool texts_match(const std::vector<std::string>& predicted, const std::vector<std::string>& gold) {
  if (predicted.size() != gold.size()) return false;
  std::vector<std::string> a, b;
  for (const auto& s : predicted) a.push_back(normalize_answer(s));
  for (const auto& s : gold) b.push_back(normalize_answer(s));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

bool coords_match(const std::vector<CellCoord>& predicted, const std::vector<CellCoord>& gold) {
  return std::set<CellCoord>(predicted.begin(), predicted.end()) ==
         std::set<CellCoord>(gold.begin(), gold.end());
}

bool is_superlative(std::string_view question) {
  for (const auto& tok : text::normalize_tokenize(question)) {
    if (tok == "most" || tok == "least" || tok == "best") return true;
    if (tok.size() >= 5 && tok.compare(tok.size() - 3, 3, "est") == 0 && !not_superlative().count(tok)) {
      return true;
    }
  }
  return false;
}

const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Match: return "MATCH";
    case ErrorCategory::TableUnderstanding: return "TABLE_UNDERSTANDING";
    case ErrorCategory::ComplexMatch: return "COMPLEX_MATCH";
    case ErrorCategory::Gold: return "GOLD";
    case ErrorCategory::AnswerSet: return "ANSWER_SET";
    case ErrorCategory::Context: return "CONTEXT";
    case ErrorCategory::Other: return "OTHER";
  }
  return "?";
}

std::optional<ErrorCategory> error_category_from_string(std::string_view s) {
  for (auto c : {ErrorCategory::Match, ErrorCategory::TableUnderstanding, ErrorCategory::ComplexMatch,
                 ErrorCategory::Gold, ErrorCategory::AnswerSet, ErrorCategory::Context, ErrorCategory::Other}) {
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

EvalReport compute_metrics(const std::vector<std::vector<PredictionRecord>>& sequences,
                           const EvalConfig& config) {
  EvalReport rep;
  rep.config = config;
  int correct = 0;
  int seq_correct = 0;
  std::vector<int> pos_ok;
  for (const auto& seq : sequences) {
    if (seq.empty()) throw EvaluationError("sequence without records");
    bool all_ok = true;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const auto& r = seq[i];
      if (r.sequence_id != seq[0].sequence_id) {
        throw EvaluationError("sequence group mixes ids " + seq[0].sequence_id + " and " + r.sequence_id);
      }
      if (r.position != static_cast<int>(i) + 1) {
        throw EvaluationError("sequence " + r.sequence_id + " is missing a record for position " +
                              std::to_string(i + 1));
      }
      if (rep.pos_count.size() <= i) {
        rep.pos_count.push_back(0);
        pos_ok.push_back(0);
      }
      ++rep.pos_count[i];
      pos_ok[i] += r.correct;
      correct += r.correct;
      all_ok = all_ok && r.correct;
      rep.records.push_back(r);
    }
    seq_correct += all_ok;
  }
  rep.num_sequences = static_cast<int>(sequences.size());
  rep.num_questions = static_cast<int>(rep.records.size());
  if (rep.num_questions == 0) return rep;
  rep.all_acc = static_cast<double>(correct) / rep.num_questions;
  rep.seq_acc = static_cast<double>(seq_correct) / rep.num_sequences;
  for (std::size_t k = 0; k < rep.pos_count.size(); ++k) {
    rep.pos_acc.push_back(static_cast<double>(pos_ok[k]) / rep.pos_count[k]);
  }

  std::vector<const PredictionRecord*> by_size;
  std::vector<const PredictionRecord*> superlatives;
  for (const auto& r : rep.records) {
    by_size.push_back(&r);
    if (r.superlative) superlatives.push_back(&r);
  }
  std::stable_sort(by_size.begin(), by_size.end(),
                   [](const auto* a, const auto* b) { return a->table_cells < b->table_cells; });
  const int n = rep.num_questions;
  const int groups = std::min(10, n);
  for (int gi = 0; gi < groups; ++gi) {
    const int lo = gi * n / groups;
    const int hi = (gi + 1) * n / groups;
    SizeBucket b;
    b.min_cells = by_size[lo]->table_cells;
    b.max_cells = by_size[hi - 1]->table_cells;
    b.count = hi - lo;
    int ok = 0;
    for (int i = lo; i < hi; ++i) ok += by_size[i]->correct;
    b.accuracy = static_cast<double>(ok) / b.count;
    rep.size_buckets.push_back(b);
  }
  const int top = (n + 9) / 10;
  rep.largest_tables = subset({by_size.end() - top, by_size.end()});
  rep.superlative = subset(superlatives);
  return rep;
}

EvalReport compute_metrics(const std::vector<PredictionRecord>& records, const EvalConfig& config) {
  std::vector<std::vector<PredictionRecord>> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& r : records) {
    auto [it, fresh] = index.emplace(r.sequence_id, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(r);
  }
  for (auto& g : groups) {
    std::stable_sort(g.begin(), g.end(), [](const auto& a, const auto& b) { return a.position < b.position; });
  }
  return compute_metrics(groups, config);
}

std::vector<ErrorAnnotation> error_annotations(const EvalReport& report) {
  std::vector<ErrorAnnotation> out;
  auto join = [](const std::vector<std::string>& xs) {
    std::string s;
    for (const auto& x : xs) s += (s.empty() ? "" : " | ") + x;
    return s;
  };
  for (const auto& r : report.records) {
    if (r.correct) continue;
    out.push_back({r.sequence_id, r.position, std::nullopt,
                   "predicted [" + join(r.predicted_texts) + "] gold [" + join(r.gold_texts) + "]"});
  }
  return out;
}

std::string summary_table(const EvalReport& report, const std::string& label) {
  auto cell = [](std::optional<double> v) {
    char buf[16];
    if (!v) return std::string("     -");
    std::snprintf(buf, sizeof buf, "%6.1f", 100.0 * *v);
    return std::string(buf);
  };
  std::string width(std::max<std::size_t>(label.size(), 5), ' ');
  std::string out = width + "    ALL    SEQ   POS1   POS2   POS3\n";
  std::string name = label;
  name.resize(width.size(), ' ');
  out += name + " " + cell(report.all_acc) + " " + cell(report.seq_acc);
  for (int k = 1; k <= 3; ++k) out += " " + cell(report.pos(k));
  out += "\n";
  return out;
}

}  // namespace tgqa::eval
