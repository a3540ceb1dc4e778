// Command-line entry point: train, eval, serve, dump-graph.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "tgqa/error.hpp"
#include "tgqa/eval/evaluate.hpp"
#include "tgqa/eval/metrics.hpp"
#include "tgqa/eval/report_io.hpp"
#include "tgqa/io/config.hpp"
#include "tgqa/io/graph_dump.hpp"
#include "tgqa/io/sqa.hpp"
#include "tgqa/server/http.hpp"
#include "tgqa/synthetic.hpp"
#include "tgqa/training/checkpoint.hpp"
#include "tgqa/training/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tgqa;

namespace {

/// Release file names tried for each split, in order.
std::vector<std::string> split_candidates(const std::string& split) {
  if (split == "dev") return {"dev.tsv", "random-split-1-dev.tsv"};
  if (split == "train") return {"train.tsv", "random-split-1-train.tsv"};
  return {split + ".tsv"};
}

std::optional<std::string> find_split(const std::string& data_dir, const std::string& split) {
  for (const auto& name : split_candidates(split)) {
    const auto p = fs::path(data_dir) / name;
    if (fs::exists(p)) return p.string();
  }
  return std::nullopt;
}

io::LoadedSplit load_named_split(const std::string& data_dir, const std::string& split) {
  const auto path = find_split(data_dir, split);
  if (!path) {
    std::string tried;
    for (const auto& n : split_candidates(split)) tried += (tried.empty() ? "" : ", ") + n;
    throw DataError("no " + split + " split in " + data_dir + " (tried " + tried + ")");
  }
  auto loaded = io::load_split(*path, data_dir);
  const auto& r = loaded.report;
  spdlog::info("{}: {} rows, {} accepted, {} rejected, {} sequences", *path, r.input_rows, r.accepted_rows,
               r.rejects.size(), loaded.split.conversations.size());
  if (r.non_rectangular + r.text_mismatch + r.empty_answers > 0) {
    spdlog::info("{}: {} non-rectangular, {} text mismatches, {} empty answers", *path, r.non_rectangular,
                 r.text_mismatch, r.empty_answers);
  }
  return loaded;
}

/// The first `n` conversations with the tables they use.
Split head(const Split& split, std::size_t n) {
  Split out;
  for (std::size_t i = 0; i < std::min(n, split.conversations.size()); ++i) {
    const auto& conv = split.conversations[i];
    if (!out.tables.contains(conv.table_id)) out.tables.add(*split.tables.get(conv.table_id));
    out.conversations.push_back(conv);
  }
  return out;
}

void apply_grid_value(io::Configs& c, const std::string& field, double v) {
  const int i = static_cast<int>(v);
  if (field == "base_lr") c.train.base_lr = v;
  else if (field == "warmup_steps") c.train.warmup_steps = i;
  else if (field == "batch_size") c.train.batch_size = i;
  else if (field == "num_layers") c.model.num_layers = i;
  else if (field == "d_model") c.model.d_model = i;
  else if (field == "heads") c.model.heads = i;
  else if (field == "dropout") c.model.dropout = v;
  else throw ConfigError("grid field '" + field + "' cannot be swept");
}

/// Cartesian product of the sweep axes; a config without a grid yields itself.
std::vector<io::Configs> expand_grid(const io::Configs& base) {
  std::vector<io::Configs> out = {base};
  for (const auto& [field, values] : base.train.grid) {
    std::vector<io::Configs> next;
    for (const auto& c : out) {
      for (double v : values) {
        auto copy = c;
        apply_grid_value(copy, field, v);
        next.push_back(std::move(copy));
      }
    }
    out = std::move(next);
  }
  for (auto& c : out) c.train.grid.clear();
  return out;
}

struct TrainArgs {
  std::string config, data_dir, out, log;
  std::optional<uint64_t> seed;
  std::optional<double> base_lr, clip_norm;
  std::optional<int> warmup_steps, total_steps, batch_size, eval_every, threads;
  bool no_numeric = false;
  bool no_context_marking = false;
  bool no_domain_check = false;
  std::size_t monitor_conversations = 64;
};

double subset_accuracy(const training::Checkpoint& ckpt, const Split& subset, bool numeric) {
  eval::EvalConfig cfg;
  cfg.numeric_relations = numeric;
  return eval::evaluate(eval::ModelPredictor(ckpt), subset, cfg).all_acc;
}

int run_train(const TrainArgs& a) {
  const bool domain = !a.no_domain_check;
  io::Configs base = io::load_config(a.config, domain);
  // Flags override file values field by field.
  if (a.seed) base.train.seed = *a.seed;
  if (a.base_lr) base.train.base_lr = *a.base_lr;
  if (a.clip_norm) base.train.clip_norm = *a.clip_norm;
  if (a.warmup_steps) base.train.warmup_steps = *a.warmup_steps;
  if (a.total_steps) base.train.total_steps = *a.total_steps;
  if (a.batch_size) base.train.batch_size = *a.batch_size;
  if (a.eval_every) base.train.eval_every = *a.eval_every;
  if (a.threads) base.train.threads = *a.threads;
  if (a.no_numeric) base.train.numeric_relations = base.eval.numeric_relations = false;
  if (a.no_context_marking) base.train.context_marking = false;

  const auto runs = expand_grid(base);
  for (const auto& c : runs) {
    if (domain) {
      c.model.validate_domain();
      c.train.validate_domain();
    } else {
      c.model.validate();
      c.train.validate();
    }
  }

  const auto train_data = load_named_split(a.data_dir, "train");
  if (!train_data.report.rejects.empty()) {
    const std::string rejects = a.out + ".rejects.jsonl";
    io::write_rejects(train_data.report.rejects, rejects);
    spdlog::info("wrote {} rejects to {}", train_data.report.rejects.size(), rejects);
  }
  std::optional<io::LoadedSplit> dev;
  if (runs.size() > 1 && find_split(a.data_dir, "dev")) dev = load_named_split(a.data_dir, "dev");
  const Split monitor = head(train_data.split, a.monitor_conversations);

  std::ofstream log(a.log.empty() ? a.out + ".log.jsonl" : a.log);
  if (!log) throw Error("cannot open training log for writing");

  std::optional<training::Checkpoint> best;
  double best_score = -1.0;
  json sweep = json::array();
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& c = runs[k];
    spdlog::info("run {}/{}: {}", k + 1, runs.size(), io::to_json(c).dump());
    auto hook = [&](const training::TrainProgress& p, const model::ModelParameters<float>& params,
                    const text::Vocabulary& vocab) {
      const training::Checkpoint snapshot{params, vocab, c.train};
      const double acc = subset_accuracy(snapshot, monitor, c.train.numeric_relations);
      log << json{{"run", k}, {"step", p.step}, {"loss", p.loss}, {"lr", p.lr}, {"grad_norm", p.grad_norm},
                  {"train_subset_all", acc}}
                 .dump()
          << "\n"
          << std::flush;
      spdlog::info("step {} loss {:.4f} lr {:.3g} train-subset ALL {:.3f}", p.step, p.loss, p.lr, acc);
      return false;
    };
    auto result = training::train(train_data.split, c.model, c.train, hook);
    // The final checkpoint is the run's result; no early stopping.
    training::Checkpoint ckpt{std::move(result.params), std::move(result.vocab), c.train};
    double score = 0.0;
    if (runs.size() > 1) {
      score = subset_accuracy(ckpt, dev ? dev->split : monitor, c.eval.numeric_relations);
      const std::string path = a.out + ".run" + std::to_string(k);
      training::save_checkpoint(ckpt, path);
      sweep.push_back({{"run", k}, {"config", io::to_json(c)}, {"checkpoint", path},
                       {dev ? "dev_all" : "train_subset_all", score}});
    }
    if (!best || score > best_score) {
      best = std::move(ckpt);
      best_score = score;
    }
  }
  training::save_checkpoint(*best, a.out);
  if (runs.size() > 1) std::ofstream(a.out + ".sweep.json") << sweep.dump(2) << "\n";
  spdlog::info("wrote {}", a.out);
  return 0;
}

struct EvalArgs {
  std::string model, data_dir, split = "test", context = "predicted", match = "text", report, errors;
  bool no_numeric = false;
  std::optional<uint64_t> seed;
};

int run_eval(const EvalArgs& a) {
  const auto ckpt = training::load_checkpoint(a.model);
  eval::EvalConfig cfg;
  cfg.context_mode = *eval::context_mode_from_string(a.context);
  cfg.match_mode = *eval::match_mode_from_string(a.match);
  // A model trained without numeric edges is evaluated without them.
  cfg.numeric_relations = !a.no_numeric && ckpt.train.numeric_relations;
  const auto data = load_named_split(a.data_dir, a.split);
  const auto report = eval::evaluate(eval::ModelPredictor(ckpt), data.split, cfg);
  eval::write_report(report, a.report);
  if (!a.errors.empty()) eval::write_annotations(eval::error_annotations(report), a.errors);
  std::cout << eval::summary_table(report, a.split + "/" + a.context);
  return 0;
}

struct ServeArgs {
  std::string model, host = "127.0.0.1", static_dir, data_dir;
  int port = 8080;
  std::optional<uint64_t> seed;
};

int run_serve(const ServeArgs& a) {
  std::shared_ptr<const eval::ModelPredictor> predictor;
  if (!a.model.empty()) {
    predictor = std::make_shared<const eval::ModelPredictor>(training::load_checkpoint(a.model));
  } else {
    spdlog::warn("no --model given; asks will answer 503");
  }
  TableStore tables;
  tables.add(synthetic::medals_table());
  if (!a.data_dir.empty()) {
    const fs::path dir = fs::path(a.data_dir) / "table_csv";
    if (!fs::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".csv") continue;
      const std::string id = "table_csv/" + entry.path().filename().string();
      try {
        tables.add(io::load_table_csv(entry.path().string(), id));
      } catch (const Error& e) {
        spdlog::warn("skipping {}: {}", id, e.what());
      }
    }
  }
  server::HttpOptions opts;
  opts.host = a.host;
  opts.port = a.port;
  opts.static_dir = a.static_dir;
  server::HttpServer http(std::make_shared<server::SessionManager>(predictor, std::move(tables)), opts);
  const int port = http.bind();
  // Scripts read the bound port from this line.
  std::cout << "listening on http://" << a.host << ":" << port << std::endl;
  http.listen();
  return 0;
}

struct DumpArgs {
  std::string data_dir, out, split = "train", model;
  bool no_numeric = false;
  std::optional<uint64_t> seed;
};

int run_dump(const DumpArgs& a) {
  const auto data = load_named_split(a.data_dir, a.split);
  text::Vocabulary vocab;
  model::ModelConfig config;
  if (!a.model.empty()) {
    auto ckpt = training::load_checkpoint(a.model);
    vocab = std::move(ckpt.vocab);
    config = ckpt.params.config;
  } else {
    vocab = text::Vocabulary::build(training::vocabulary_corpus(data.split));
  }
  const int n = io::dump_graphs(data.split, vocab, a.out, config.graph_options(!a.no_numeric));
  spdlog::info("wrote {} graphs to {}", n, a.out);
  return 0;
}

void configure_logging() {
  spdlog::set_default_logger(spdlog::stderr_color_mt("tgqa"));
  spdlog::set_pattern("[%H:%M:%S] %^%l%$ %v");
  const char* env = std::getenv("TGQA_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") spdlog::set_level(spdlog::level::err);
  else if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else spdlog::set_level(spdlog::level::info);
  if (level != "error" && level != "info" && level != "debug") {
    spdlog::warn("TGQA_LOG='{}' is not one of error, info, debug; using info", level);
  }
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Table-graph conversational question answering"};
  app.require_subcommand(1, 1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model on the train split");
  train_cmd->add_option("--config", train.config, "Flat JSON config")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--data-dir", train.data_dir, "SQA release directory")->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--out", train.out, "Checkpoint path")->required();
  train_cmd->add_option("--seed", train.seed);
  train_cmd->add_option("--base-lr", train.base_lr);
  train_cmd->add_option("--warmup-steps", train.warmup_steps);
  train_cmd->add_option("--total-steps", train.total_steps);
  train_cmd->add_option("--batch-size", train.batch_size);
  train_cmd->add_option("--eval-every", train.eval_every);
  train_cmd->add_option("--clip-norm", train.clip_norm, "0 disables clipping");
  train_cmd->add_option("--threads", train.threads);
  train_cmd->add_flag("--no-numeric", train.no_numeric, "Drop numeric comparison edges");
  train_cmd->add_flag("--no-context-marking", train.no_context_marking, "Train without previous-answer flags");
  train_cmd->add_flag("--no-domain-check", train.no_domain_check, "Allow values outside the search space");
  train_cmd->add_option("--log", train.log, "Training log (default <out>.log.jsonl)");
  train_cmd->add_option("--monitor-conversations", train.monitor_conversations,
                        "Conversations in the logged train-subset accuracy");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
  eval_cmd->add_option("--model", ev.model)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--data-dir", ev.data_dir)->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--split", ev.split)->check(CLI::IsMember({"train", "test", "dev"}));
  eval_cmd->add_option("--context", ev.context, "Context flags at test time")
      ->check(CLI::IsMember({"predicted", "reference", "none"}));
  eval_cmd->add_option("--match", ev.match)->check(CLI::IsMember({"text", "coords"}));
  eval_cmd->add_flag("--no-numeric", ev.no_numeric, "Drop numeric comparison edges");
  eval_cmd->add_option("--report", ev.report, "Report JSON path")->required();
  eval_cmd->add_option("--errors", ev.errors, "Error-annotation JSONL path");
  eval_cmd->add_option("--seed", ev.seed, "Accepted for uniformity; decoding is deterministic");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
  serve_cmd->add_option("--model", serve.model)->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", serve.port, "0 picks a free port")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", serve.host);
  serve_cmd->add_option("--static", serve.static_dir, "UI bundle directory")->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--data-dir", serve.data_dir, "Offer the tables under <dir>/table_csv");
  serve_cmd->add_option("--seed", serve.seed, "Accepted for uniformity; decoding is deterministic");

  DumpArgs dump;
  auto* dump_cmd = app.add_subcommand("dump-graph", "Write one graph per question turn as JSONL");
  dump_cmd->add_option("--data-dir", dump.data_dir)->required()->check(CLI::ExistingDirectory);
  dump_cmd->add_option("--out", dump.out)->required();
  dump_cmd->add_option("--split", dump.split)->check(CLI::IsMember({"train", "test", "dev"}));
  dump_cmd->add_option("--model", dump.model, "Use this checkpoint's vocabulary")->check(CLI::ExistingFile);
  dump_cmd->add_flag("--no-numeric", dump.no_numeric, "Drop numeric comparison edges");
  dump_cmd->add_option("--seed", dump.seed, "Accepted for uniformity; the dump is deterministic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "tgqa: " << one_line(e.what()) << "\n\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return 2;
  }

  configure_logging();
  try {
    if (*train_cmd) return run_train(train);
    if (*eval_cmd) return run_eval(ev);
    if (*serve_cmd) return run_serve(serve);
    if (*dump_cmd) return run_dump(dump);
  } catch (const std::exception& e) {
    std::cerr << "tgqa: error: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 1;
}
