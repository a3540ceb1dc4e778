#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tgqa/core/dataset.hpp"
#include "tgqa/eval/metrics.hpp"
#include "tgqa/text/vocabulary.hpp"
#include "tgqa/training/checkpoint.hpp"

namespace tgqa::eval {

struct PredictRequest {
  const Table& table;
  const std::string& question;
  const std::optional<std::vector<CellCoord>>& previous_answers;
  bool numeric_relations = true;
  std::string sequence_id;
  int position = 1;
};

/// Anything that maps a question turn to a selection.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual AnswerSelection predict(const PredictRequest& request) const = 0;
};

/// Greedy decoding with a trained model. Thread-safe: parameters are read-only.
class ModelPredictor : public Predictor {
 public:
  ModelPredictor(model::ModelParameters<float> params, text::Vocabulary vocab);
  explicit ModelPredictor(const training::Checkpoint& ckpt) : ModelPredictor(ckpt.params, ckpt.vocab) {}

  AnswerSelection predict(const PredictRequest& request) const override;
  const model::ModelParameters<float>& params() const { return params_; }
  const text::Vocabulary& vocab() const { return vocab_; }

 private:
  model::ModelParameters<float> params_;
  text::Vocabulary vocab_;
};

/// Runs every turn of every conversation. PREDICTED feeds each turn the
/// model's own previous answer, REFERENCE the gold previous answer, NONE no
/// context. Throws DataError for an unknown table.
EvalReport evaluate(const Predictor& predictor, const Split& split, const EvalConfig& config);

/// Builds one record, filling cells, texts and correctness from `predicted`.
PredictionRecord make_record(const Conversation& conv, const QuestionTurn& turn, const Table& table,
                             const AnswerSelection& predicted, MatchMode mode);

}  // namespace tgqa::eval
