#include "tgqa/eval/evaluate.hpp"

#include "tgqa/graph/builder.hpp"
#include "tgqa/model/model.hpp"

namespace tgqa::eval {

ModelPredictor::ModelPredictor(model::ModelParameters<float> params, text::Vocabulary vocab)
    : params_(std::move(params)), vocab_(std::move(vocab)) {}

AnswerSelection ModelPredictor::predict(const PredictRequest& request) const {
  const auto g = graph::build_graph(request.table, vocab_, request.question, request.previous_answers,
                                    params_.config.graph_options(request.numeric_relations));
  return model::predict(params_, g);
}

PredictionRecord make_record(const Conversation& conv, const QuestionTurn& turn, const Table& table,
                             const AnswerSelection& predicted, MatchMode mode) {
  PredictionRecord r;
  r.sequence_id = conv.sequence_id;
  r.position = turn.position;
  r.table_id = table.id();
  r.predicted = predicted;
  r.predicted_cells = selection_to_cells(predicted, table);
  r.predicted_texts = answer_texts(r.predicted_cells, table, false);
  r.gold_texts = turn.gold_answer_texts.empty() ? answer_texts(turn.gold_answers, table, false)
                                                : turn.gold_answer_texts;
  r.correct = mode == MatchMode::Coords ? coords_match(r.predicted_cells, turn.gold_answers)
                                        : texts_match(r.predicted_texts, r.gold_texts);
  r.superlative = is_superlative(turn.text);
  r.table_cells = table.num_cells();
  return r;
}

EvalReport evaluate(const Predictor& predictor, const Split& split, const EvalConfig& config) {
  std::vector<std::vector<PredictionRecord>> sequences;
  for (const auto& conv : split.conversations) {
    const auto table = split.tables.get(conv.table_id);
    std::vector<PredictionRecord> records;
    std::optional<std::vector<CellCoord>> context;
    for (const auto& turn : conv.turns) {
      const PredictRequest req{*table, turn.text, context, config.numeric_relations, conv.sequence_id,
                               turn.position};
      records.push_back(make_record(conv, turn, *table, predictor.predict(req), config.match_mode));
      switch (config.context_mode) {
        case ContextMode::Predicted: context = records.back().predicted_cells; break;
        case ContextMode::Reference: context = turn.gold_answers; break;
        case ContextMode::None: break;
      }
    }
    sequences.push_back(std::move(records));
  }
  return compute_metrics(sequences, config);
}

}  // namespace tgqa::eval
