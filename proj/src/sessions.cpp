#include "tgqa/server/sessions.hpp"

#include <cstdio>
#include <random>

#include "tgqa/graph/builder.hpp"
#include "tgqa/model/model.hpp"
#include "tgqa/rng.hpp"
#include "tgqa/text/normalize.hpp"
#include "tgqa/text/numeric.hpp"

namespace tgqa::server {

using nlohmann::json;

json to_json(const TurnResult& t) {
  json cells = json::array();
  for (std::size_t i = 0; i < t.cells.size(); ++i) {
    cells.push_back({{"row", t.cells[i].row}, {"col", t.cells[i].col}, {"text", t.texts[i]}});
  }
  return {{"turn", t.turn},
          {"question", t.question},
          {"columns", t.selection.columns},
          {"rows", t.selection.rows},
          {"cells", cells}};
}

Table table_from_json(const json& j, const std::string& table_id) {
  if (!j.is_object() || !j.contains("columns") || !j.contains("rows")) {
    throw InvalidTableError("inline table needs 'columns' and 'rows'");
  }
  const auto& cols = j.at("columns");
  const auto& rows = j.at("rows");
  if (!cols.is_array() || !rows.is_array()) throw InvalidTableError("'columns' and 'rows' must be arrays");
  std::vector<std::string> names;
  for (const auto& c : cols) {
    if (!c.is_string()) throw InvalidTableError("column names must be strings");
    names.push_back(c.get<std::string>());
  }
  std::vector<std::vector<std::string>> grid;
  for (const auto& r : rows) {
    if (!r.is_array()) throw InvalidTableError("each row must be an array of strings");
    std::vector<std::string> cells;
    for (const auto& c : r) {
      if (!c.is_string()) throw InvalidTableError("cells must be strings");
      cells.push_back(c.get<std::string>());
    }
    grid.push_back(std::move(cells));
  }
  return Table(table_id, std::move(names), std::move(grid));
}

json table_to_json(const Table& t) {
  json types = json::array();
  for (auto ty : t.column_types()) types.push_back(tgqa::to_string(ty));
  return {{"id", t.id()}, {"columns", t.column_names()}, {"rows", t.rows()}, {"column_types", types}};
}

SessionManager::SessionManager(std::shared_ptr<const eval::ModelPredictor> model, TableStore tables)
    : model_(std::move(model)), tables_(std::move(tables)), salt_(std::random_device{}()) {
  salt_ = (salt_ << 32) ^ std::random_device{}();
}

std::string SessionManager::register_session(std::shared_ptr<const Table> table) {
  auto s = std::make_shared<Session>();
  s->table = std::move(table);
  s->created = s->last_used = std::chrono::system_clock::now();
  std::unique_lock lock(mu_);
  char buf[20];
  // The counter makes ids unique; the salt makes them hard to guess across restarts.
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(SplitMix64::mix(salt_, next_++)));
  s->id = buf;
  sessions_[s->id] = s;
  return s->id;
}

std::string SessionManager::create_session(const std::string& table_id) {
  if (!tables_.contains(table_id)) throw NotFoundError("unknown table '" + table_id + "'");
  return register_session(tables_.get(table_id));
}

std::string SessionManager::create_session(Table inline_table) {
  text::annotate_column_types(inline_table);
  return register_session(std::make_shared<const Table>(std::move(inline_table)));
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::shared_lock lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
  return it->second;
}

TurnResult SessionManager::ask(const std::string& session_id, const std::string& question) {
  const auto s = find(session_id);
  if (text::normalize_tokenize(question).empty()) throw InvalidExampleError("question is empty");
  if (!model_) throw ModelUnavailableError("no model is loaded");
  std::lock_guard lock(s->mu);
  std::optional<std::vector<CellCoord>> context;
  if (!s->history.empty()) context = s->history.back().cells;
  const auto& params = model_->params();
  auto g = graph::build_graph(*s->table, model_->vocab(), question, context, params.config.graph_options(true));
  TurnResult t;
  t.turn = static_cast<int>(s->history.size()) + 1;
  t.question = question;
  t.selection = model::predict(params, g);
  t.cells = selection_to_cells(t.selection, *s->table);
  t.texts = answer_texts(t.cells, *s->table, false);
  s->history.push_back(t);
  s->last_graph = std::move(g);
  s->last_used = std::chrono::system_clock::now();
  return t;
}

void SessionManager::reset(const std::string& session_id) {
  const auto s = find(session_id);
  std::lock_guard lock(s->mu);
  s->history.clear();
  s->last_graph.reset();
  s->last_used = std::chrono::system_clock::now();
}

void SessionManager::remove(const std::string& session_id) {
  std::unique_lock lock(mu_);
  if (sessions_.erase(session_id) == 0) throw NotFoundError("unknown session '" + session_id + "'");
}

std::vector<TurnResult> SessionManager::history(const std::string& session_id) const {
  const auto s = find(session_id);
  std::lock_guard lock(s->mu);
  return s->history;
}

std::shared_ptr<const Table> SessionManager::session_table(const std::string& session_id) const {
  return find(session_id)->table;
}

std::optional<graph::AnnotatedGraph> SessionManager::last_graph(const std::string& session_id) const {
  const auto s = find(session_id);
  std::lock_guard lock(s->mu);
  return s->last_graph;
}

std::size_t SessionManager::num_sessions() const {
  std::shared_lock lock(mu_);
  return sessions_.size();
}

}  // namespace tgqa::server
