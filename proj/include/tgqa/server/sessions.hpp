#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "tgqa/core/dataset.hpp"
#include "tgqa/error.hpp"
#include "tgqa/eval/evaluate.hpp"
#include "tgqa/graph/annotated_graph.hpp"

namespace tgqa::server {

/// Thrown for requests that name a session or table that does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Thrown when a request needs a model and none is loaded.
class ModelUnavailableError : public Error {
 public:
  using Error::Error;
};

struct TurnResult {
  int turn = 0;  // 1-based
  std::string question;
  AnswerSelection selection;
  std::vector<CellCoord> cells;
  std::vector<std::string> texts;
};

nlohmann::json to_json(const TurnResult& t);

/// Conversational state over a shared, read-only model. The session map is
/// guarded by a reader-writer lock and each session's history by its own
/// mutex, so asks on different sessions run concurrently.
class SessionManager {
 public:
  /// `model` may be null; asks then fail with ModelUnavailableError.
  SessionManager(std::shared_ptr<const eval::ModelPredictor> model, TableStore tables);

  const TableStore& tables() const { return tables_; }
  bool has_model() const { return model_ != nullptr; }

  /// NotFoundError for an unknown table id.
  std::string create_session(const std::string& table_id);
  /// Annotates column types; InvalidTableError for an invalid grid.
  std::string create_session(Table inline_table);

  /// Context flags come from this session's previous predicted answer.
  /// InvalidExampleError for an empty question.
  TurnResult ask(const std::string& session_id, const std::string& question);
  /// Clears history, keeps the table. Idempotent.
  void reset(const std::string& session_id);
  void remove(const std::string& session_id);

  std::vector<TurnResult> history(const std::string& session_id) const;
  std::shared_ptr<const Table> session_table(const std::string& session_id) const;
  /// The graph of the session's most recent turn, absent before the first ask.
  std::optional<graph::AnnotatedGraph> last_graph(const std::string& session_id) const;
  std::size_t num_sessions() const;

 private:
  struct Session {
    std::string id;
    std::shared_ptr<const Table> table;
    std::vector<TurnResult> history;
    std::optional<graph::AnnotatedGraph> last_graph;
    std::chrono::system_clock::time_point created, last_used;
    mutable std::mutex mu;
  };

  std::string register_session(std::shared_ptr<const Table> table);
  std::shared_ptr<Session> find(const std::string& id) const;

  std::shared_ptr<const eval::ModelPredictor> model_;
  TableStore tables_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  uint64_t next_ = 0;
  uint64_t salt_;
};

/// Parses {"columns": [...], "rows": [[...], ...]} into a table. Non-string
/// entries or a ragged grid throw InvalidTableError.
Table table_from_json(const nlohmann::json& j, const std::string& table_id);
nlohmann::json table_to_json(const Table& t);

}  // namespace tgqa::server
