#pragma once

#include <string>

#include "json.hpp"

#include "tgqa/eval/config.hpp"
#include "tgqa/model/config.hpp"
#include "tgqa/training/trainer.hpp"

namespace tgqa::io {

struct Configs {
  model::ModelConfig model;
  training::TrainConfig train;
  eval::EvalConfig eval;
};

nlohmann::json to_json(const model::ModelConfig& c);
nlohmann::json to_json(const training::TrainConfig& c);
nlohmann::json to_json(const eval::EvalConfig& c);
nlohmann::json to_json(const Configs& c);

/// Strict readers: unknown keys and type mismatches throw ConfigError;
/// absent keys keep their defaults.
model::ModelConfig model_config_from_json(const nlohmann::json& j);
training::TrainConfig train_config_from_json(const nlohmann::json& j);
eval::EvalConfig eval_config_from_json(const nlohmann::json& j);

/// Flat JSON object holding any of the model, training and evaluation
/// fields. Values are checked against the published search space.
Configs configs_from_json(const nlohmann::json& j, bool check_domain = true);
Configs load_config(const std::string& path, bool check_domain = true);

}  // namespace tgqa::io
