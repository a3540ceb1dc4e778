#include "tgqa/training/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "tgqa/error.hpp"
#include "tgqa/graph/builder.hpp"
#include "tgqa/model/model.hpp"
#include "tgqa/rng.hpp"
#include "tgqa/text/normalize.hpp"
#include "tgqa/training/optimizer.hpp"

namespace tgqa::training {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

const std::set<std::string>& grid_fields() {
  static const std::set<std::string> fields = {"base_lr", "warmup_steps", "batch_size", "num_layers",
                                               "d_model", "heads", "dropout"};
  return fields;
}

graph::AnnotatedGraph example_graph(const TrainingExample& ex, const text::Vocabulary& vocab,
                                    const model::ModelConfig& cfg, bool numeric) {
  return graph::build_graph(*ex.table, vocab, ex.question, ex.previous_answers, cfg.graph_options(numeric));
}

void zero(std::vector<ad::Tensor<float>>& ts) {
  for (auto& t : ts) std::fill(t.data.begin(), t.data.end(), 0.0f);
}

}  // namespace

void TrainConfig::validate() const {
  require(base_lr > 0.0, "base_lr must be positive");
  require(warmup_steps >= 1, "warmup_steps must be at least 1");
  require(total_steps >= 1, "total_steps must be at least 1");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(eval_every >= 1, "eval_every must be at least 1");
  require(clip_norm >= 0.0, "clip_norm must be non-negative");
  require(threads >= 1, "threads must be at least 1");
  for (const auto& [field, values] : grid) {
    require(grid_fields().count(field) > 0, "grid field '" + field + "' cannot be swept");
    require(!values.empty(), "grid field '" + field + "' has no values");
  }
}

void TrainConfig::validate_domain() const {
  require(warmup_steps <= 2000, "warmup_steps must be at most 2000, got " + std::to_string(warmup_steps));
  require(batch_size == 32 || batch_size == 64,
          "batch_size must be one of {32, 64}, got " + std::to_string(batch_size));
  validate();
}

std::vector<std::string> vocabulary_corpus(const Split& split) {
  std::vector<std::string> corpus;
  std::set<std::string> seen_tables;
  auto add = [&](std::string_view s) {
    for (auto& tok : text::normalize_tokenize(s)) corpus.push_back(std::move(tok));
  };
  for (const auto& conv : split.conversations) {
    for (const auto& turn : conv.turns) add(turn.text);
    if (!seen_tables.insert(conv.table_id).second) continue;
    const auto table = split.tables.get(conv.table_id);
    for (const auto& name : table->column_names()) add(name);
    for (int r = 0; r < table->num_rows(); ++r) {
      for (int c = 0; c < table->num_cols(); ++c) add(table->cell(r, c));
    }
  }
  return corpus;
}

std::vector<TrainingExample> training_examples(const Split& split, int* skipped, bool context_marking) {
  std::vector<TrainingExample> out;
  int skip = 0;
  for (const auto& conv : split.conversations) {
    const auto table = split.tables.get(conv.table_id);
    std::optional<std::vector<CellCoord>> previous;
    for (const auto& turn : conv.turns) {
      const AnswerSelection target = selection_from_cells(turn.gold_answers);
      if (target.empty()) {
        ++skip;
      } else {
        out.push_back({table, turn.text, previous, target, conv.sequence_id, turn.position});
      }
      if (context_marking) previous = turn.gold_answers;
    }
  }
  if (skipped != nullptr) *skipped = skip;
  return out;
}

TrainResult train(const Split& split, const model::ModelConfig& model_config,
                  const TrainConfig& train_config, const EvalHook& hook) {
  model_config.validate();
  train_config.validate();
  int skipped = 0;
  const auto examples = training_examples(split, &skipped, train_config.context_marking);
  if (examples.empty()) throw DataError("empty training set");
  if (skipped > 0) spdlog::info("skipped {} turns with empty gold answers", skipped);

  TrainResult result;
  result.vocab = text::Vocabulary::build(vocabulary_corpus(split));
  result.params = model::ModelParameters<float>::init(model_config, train_config.seed);
  auto& params = result.params;
  AdamState adam = AdamState::for_params(params);

  const int B = train_config.batch_size;
  const int shards = std::min(train_config.threads, B);
  std::vector<std::vector<ad::Tensor<float>>> grads(shards);
  for (auto& g : grads) {
    for (const auto& t : params.tensors) g.emplace_back(t.shape);
  }
  std::vector<std::optional<graph::AnnotatedGraph>> cache(examples.size());

  // Epoch-wise shuffled order.
  SplitMix64 order_rng(SplitMix64::mix(train_config.seed, 0x5eed));
  std::vector<int> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  double loss_since_report = 0.0;
  int steps_since_report = 0;
  for (int step = 1; step <= train_config.total_steps; ++step) {
    std::vector<int> batch(B);
    for (int& b : batch) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), order_rng);
        cursor = 0;
      }
      b = order[cursor++];
    }
    for (int b : batch) {
      if (!cache[b]) cache[b] = example_graph(examples[b], result.vocab, model_config, train_config.numeric_relations);
    }
    for (auto& g : grads) zero(g);
    std::vector<double> shard_loss(shards, 0.0);
    auto run_shard = [&](int s) {
      for (int slot = s * B / shards; slot < (s + 1) * B / shards; ++slot) {
        const auto seed = SplitMix64::mix(train_config.seed, static_cast<uint64_t>(step) * B + slot);
        ad::Graph<float> tape(true, seed);
        model::ParamBinder<float> binder(tape, params, &grads[s]);
        const auto& ex = examples[batch[slot]];
        const auto loss = model::example_loss(binder, *cache[batch[slot]], ex.target);
        shard_loss[s] += loss.value().data[0];
        tape.backward(loss);
      }
    };
    if (shards == 1) {
      run_shard(0);
    } else {
      std::vector<std::thread> workers;
      for (int s = 0; s < shards; ++s) workers.emplace_back(run_shard, s);
      for (auto& w : workers) w.join();
    }
    // Fixed reduction order keeps the sum independent of thread timing.
    auto& total = grads[0];
    for (int s = 1; s < shards; ++s) {
      for (std::size_t k = 0; k < total.size(); ++k) {
        for (std::size_t i = 0; i < total[k].size(); ++i) total[k].data[i] += grads[s][k].data[i];
      }
    }
    const float inv_b = 1.0f / static_cast<float>(B);
    for (auto& t : total) {
      for (float& g : t.data) g *= inv_b;
    }
    double batch_loss = 0.0;
    for (double l : shard_loss) batch_loss += l;
    batch_loss /= B;
    if (step == 1) result.initial_loss = batch_loss;

    TrainProgress progress;
    progress.step = step;
    progress.grad_norm = clip_global_norm(total, train_config.clip_norm);
    progress.lr = lr_at_step(train_config.base_lr, model_config.d_model, train_config.warmup_steps, step);
    adam_update(params, total, adam, progress.lr);
    result.steps_run = step;

    loss_since_report += batch_loss;
    ++steps_since_report;
    if (step % train_config.eval_every == 0 || step == train_config.total_steps) {
      progress.loss = loss_since_report / steps_since_report;
      loss_since_report = 0.0;
      steps_since_report = 0;
      result.log.push_back(progress);
      spdlog::debug("step {} loss {:.5f} lr {:.3g} |g| {:.3g}", step, progress.loss, progress.lr, progress.grad_norm);
      if (hook && hook(progress, params, result.vocab)) break;
    }
  }
  return result;
}

double mean_loss(const model::ModelParameters<float>& params, const text::Vocabulary& vocab,
                 const std::vector<TrainingExample>& examples, bool numeric_relations) {
  if (examples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : examples) {
    ad::Graph<float> tape(false);
    tape.set_grad_enabled(false);
    model::ParamBinder<float> binder(tape, params);
    const auto g = example_graph(ex, vocab, params.config, numeric_relations);
    total += model::example_loss(binder, g, ex.target).value().data[0];
  }
  return total / static_cast<double>(examples.size());
}

}  // namespace tgqa::training
