#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tgqa/core/dataset.hpp"
#include "tgqa/graph/annotated_graph.hpp"
#include "tgqa/model/parameters.hpp"
#include "tgqa/text/vocabulary.hpp"

namespace tgqa::training {

struct TrainConfig {
  double base_lr = 1.0;
  int warmup_steps = 2000;
  int total_steps = 100000;
  int batch_size = 32;
  uint64_t seed = 1;
  int eval_every = 1000;
  /// Global-norm clipping threshold; 0 disables clipping.
  double clip_norm = 1.0;
  /// Worker threads per batch. Results are deterministic for a fixed value.
  int threads = 1;
  bool numeric_relations = true;
  /// Mark gold previous answers in training graphs. Off trains the
  /// no-context ablation.
  bool context_marking = true;
  /// Sweep axes: field name and the values to try.
  std::vector<std::pair<std::string, std::vector<double>>> grid;

  void validate() const;
  /// The published search space: warmup <= 2000, batch size 32 or 64.
  void validate_domain() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Word corpus for the vocabulary: question tokens, column names and cell
/// texts of the tables the conversations reference.
std::vector<std::string> vocabulary_corpus(const Split& split);

/// One question turn with gold previous-turn context.
struct TrainingExample {
  std::shared_ptr<const Table> table;
  std::string question;
  std::optional<std::vector<CellCoord>> previous_answers;
  AnswerSelection target;
  std::string sequence_id;
  int position = 1;
};

/// Turns with an empty gold answer cannot be a decoder target and are skipped.
std::vector<TrainingExample> training_examples(const Split& split, int* skipped = nullptr,
                                               bool context_marking = true);

struct TrainProgress {
  int step = 0;
  double loss = 0.0;  // mean over the steps since the previous report
  double lr = 0.0;
  double grad_norm = 0.0;
};

struct TrainResult {
  model::ModelParameters<float> params;
  text::Vocabulary vocab;
  std::vector<TrainProgress> log;
  int steps_run = 0;
  double initial_loss = 0.0;  // mean loss of the first batch before any update
};

/// Called every eval_every steps with the current parameters. Returning true
/// stops training after this step.
using EvalHook = std::function<bool(const TrainProgress&, const model::ModelParameters<float>&,
                                    const text::Vocabulary&)>;

TrainResult train(const Split& split, const model::ModelConfig& model_config,
                  const TrainConfig& train_config, const EvalHook& hook = {});

/// Mean training loss of `examples` under `params` in eval mode.
double mean_loss(const model::ModelParameters<float>& params, const text::Vocabulary& vocab,
                 const std::vector<TrainingExample>& examples, bool numeric_relations = true);

}  // namespace tgqa::training
