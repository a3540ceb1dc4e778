#pragma once

// Datasets, configs and small trained models shared by the slower tests.

#include "tgqa/core/dataset.hpp"
#include "tgqa/eval/evaluate.hpp"
#include "tgqa/synthetic.hpp"
#include "tgqa/training/checkpoint.hpp"
#include "tgqa/training/trainer.hpp"

namespace fixture {

inline tgqa::Split to_split(tgqa::synthetic::Dataset d) {
  return tgqa::make_split(std::move(d.tables), std::move(d.conversations));
}

inline tgqa::Split medals_split() {
  return tgqa::make_split({tgqa::synthetic::medals_table()}, {tgqa::synthetic::medals_conversation()});
}

/// Small enough for unit tests, outside the published search space.
inline tgqa::model::ModelConfig small_model(int layers = 1, int d = 32, int heads = 2) {
  tgqa::model::ModelConfig c;
  c.num_layers = layers;
  c.d_model = d;
  c.heads = heads;
  c.indicator_dim = 8;
  c.dropout = 0.1;
  c.max_columns = 16;
  c.max_rows = 16;
  c.max_rank = 16;
  return c;
}

inline tgqa::training::TrainConfig short_run(int steps, int batch, uint64_t seed = 1) {
  tgqa::training::TrainConfig c;
  c.total_steps = steps;
  c.batch_size = batch;
  c.warmup_steps = std::max(1, steps / 5);
  c.eval_every = std::max(1, steps / 4);
  c.seed = seed;
  return c;
}

inline tgqa::training::Checkpoint to_checkpoint(tgqa::training::TrainResult r,
                                                const tgqa::training::TrainConfig& tc) {
  return {std::move(r.params), std::move(r.vocab), tc};
}

/// A model that has memorised the medals conversation.
inline tgqa::training::Checkpoint medals_model(int steps = 300) {
  const auto tc = short_run(steps, 6, 3);
  return to_checkpoint(tgqa::training::train(medals_split(), small_model(2, 32, 2), tc), tc);
}

}  // namespace fixture
