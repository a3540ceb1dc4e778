#include "tgqa/io/config.hpp"

#include <fstream>
#include <functional>
#include <map>

#include "tgqa/error.hpp"

namespace tgqa::io {

using nlohmann::json;

namespace {

using Setter = std::function<void(const json&)>;

void set_int(int& dst, const std::string& key, const json& v) {
  if (!v.is_number_integer()) throw ConfigError("config field '" + key + "' must be an integer");
  dst = v.get<int>();
}

void set_double(double& dst, const std::string& key, const json& v) {
  if (!v.is_number()) throw ConfigError("config field '" + key + "' must be a number");
  dst = v.get<double>();
}

void set_bool(bool& dst, const std::string& key, const json& v) {
  if (!v.is_boolean()) throw ConfigError("config field '" + key + "' must be a boolean");
  dst = v.get<bool>();
}

std::map<std::string, Setter> model_fields(model::ModelConfig& c) {
  return {
      {"num_layers", [&](const json& v) { set_int(c.num_layers, "num_layers", v); }},
      {"d_model", [&](const json& v) { set_int(c.d_model, "d_model", v); }},
      {"heads", [&](const json& v) { set_int(c.heads, "heads", v); }},
      {"dropout", [&](const json& v) { set_double(c.dropout, "dropout", v); }},
      {"rel_pos_clip", [&](const json& v) { set_int(c.rel_pos_clip, "rel_pos_clip", v); }},
      {"indicator_dim", [&](const json& v) { set_int(c.indicator_dim, "indicator_dim", v); }},
      {"max_decode_len", [&](const json& v) { set_int(c.max_decode_len, "max_decode_len", v); }},
      {"max_columns", [&](const json& v) { set_int(c.max_columns, "max_columns", v); }},
      {"max_rows", [&](const json& v) { set_int(c.max_rows, "max_rows", v); }},
      {"max_rank", [&](const json& v) { set_int(c.max_rank, "max_rank", v); }},
  };
}

std::map<std::string, Setter> train_fields(training::TrainConfig& c) {
  return {
      {"base_lr", [&](const json& v) { set_double(c.base_lr, "base_lr", v); }},
      {"warmup_steps", [&](const json& v) { set_int(c.warmup_steps, "warmup_steps", v); }},
      {"total_steps", [&](const json& v) { set_int(c.total_steps, "total_steps", v); }},
      {"batch_size", [&](const json& v) { set_int(c.batch_size, "batch_size", v); }},
      {"seed", [&](const json& v) {
         if (!v.is_number_unsigned()) throw ConfigError("config field 'seed' must be a non-negative integer");
         c.seed = v.get<uint64_t>();
       }},
      {"eval_every", [&](const json& v) { set_int(c.eval_every, "eval_every", v); }},
      {"clip_norm", [&](const json& v) { set_double(c.clip_norm, "clip_norm", v); }},
      {"threads", [&](const json& v) { set_int(c.threads, "threads", v); }},
      {"numeric_relations", [&](const json& v) { set_bool(c.numeric_relations, "numeric_relations", v); }},
      {"context_marking", [&](const json& v) { set_bool(c.context_marking, "context_marking", v); }},
      {"grid", [&](const json& v) {
         if (!v.is_object()) throw ConfigError("config field 'grid' must be an object of value lists");
         c.grid.clear();
         for (const auto& [key, values] : v.items()) {
           if (!values.is_array()) throw ConfigError("grid field '" + key + "' must be a list");
           std::vector<double> xs;
           for (const auto& x : values) {
             if (!x.is_number()) throw ConfigError("grid field '" + key + "' must list numbers");
             xs.push_back(x.get<double>());
           }
           c.grid.emplace_back(key, std::move(xs));
         }
       }},
  };
}

std::map<std::string, Setter> eval_fields(eval::EvalConfig& c) {
  return {
      {"context_mode", [&](const json& v) {
         const auto m = v.is_string() ? eval::context_mode_from_string(v.get<std::string>()) : std::nullopt;
         if (!m) throw ConfigError("context_mode must be one of {predicted, reference, none}");
         c.context_mode = *m;
       }},
      {"match_mode", [&](const json& v) {
         const auto m = v.is_string() ? eval::match_mode_from_string(v.get<std::string>()) : std::nullopt;
         if (!m) throw ConfigError("match_mode must be one of {text, coords}");
         c.match_mode = *m;
       }},
      {"numeric_relations", [&](const json& v) { set_bool(c.numeric_relations, "numeric_relations", v); }},
  };
}

void apply_fields(const json& j, const std::map<std::string, Setter>& fields) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(value);
  }
}

}  // namespace

json to_json(const model::ModelConfig& c) {
  return {{"num_layers", c.num_layers},   {"d_model", c.d_model},
          {"heads", c.heads},             {"dropout", c.dropout},
          {"rel_pos_clip", c.rel_pos_clip}, {"indicator_dim", c.indicator_dim},
          {"max_decode_len", c.max_decode_len}, {"max_columns", c.max_columns},
          {"max_rows", c.max_rows},       {"max_rank", c.max_rank}};
}

json to_json(const training::TrainConfig& c) {
  json grid = json::object();
  for (const auto& [k, v] : c.grid) grid[k] = v;
  return {{"base_lr", c.base_lr},       {"warmup_steps", c.warmup_steps},
          {"total_steps", c.total_steps}, {"batch_size", c.batch_size},
          {"seed", c.seed},             {"eval_every", c.eval_every},
          {"clip_norm", c.clip_norm},   {"threads", c.threads},
          {"numeric_relations", c.numeric_relations}, {"context_marking", c.context_marking},
          {"grid", grid}};
}

json to_json(const eval::EvalConfig& c) {
  return {{"context_mode", eval::to_string(c.context_mode)},
          {"match_mode", eval::to_string(c.match_mode)},
          {"numeric_relations", c.numeric_relations}};
}

json to_json(const Configs& c) {
  json j = to_json(c.model);
  j.update(to_json(c.train));
  j.update(to_json(c.eval));
  return j;
}

model::ModelConfig model_config_from_json(const json& j) {
  model::ModelConfig c;
  apply_fields(j, model_fields(c));
  return c;
}

training::TrainConfig train_config_from_json(const json& j) {
  training::TrainConfig c;
  apply_fields(j, train_fields(c));
  return c;
}

eval::EvalConfig eval_config_from_json(const json& j) {
  eval::EvalConfig c;
  apply_fields(j, eval_fields(c));
  return c;
}

Configs configs_from_json(const json& j, bool check_domain) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  Configs out;
  auto m = model_fields(out.model);
  auto t = train_fields(out.train);
  auto e = eval_fields(out.eval);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto* fields : {&m, &t, &e}) {
      const auto it = fields->find(key);
      if (it != fields->end()) {
        it->second(value);
        known = true;
      }
    }
    if (!known) throw ConfigError("unknown config key '" + key + "'");
  }
  if (check_domain) {
    out.model.validate_domain();
    out.train.validate_domain();
  } else {
    out.model.validate();
    out.train.validate();
  }
  return out;
}

Configs load_config(const std::string& path, bool check_domain) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return configs_from_json(j, check_domain);
}

}  // namespace tgqa::io
