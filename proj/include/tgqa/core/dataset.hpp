#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tgqa/core/table.hpp"

namespace tgqa {

/// Tables by id. Stored tables carry inferred column types and are shared,
/// so repeated lookups return the same object.
class TableStore {
 public:
  /// Annotates column types; replaces an existing table with the same id.
  std::shared_ptr<const Table> add(Table table);
  /// Throws DataError for an unknown id.
  std::shared_ptr<const Table> get(const std::string& id) const;
  bool contains(const std::string& id) const { return tables_.count(id) > 0; }
  std::vector<std::string> ids() const;
  std::size_t size() const { return tables_.size(); }

 private:
  std::map<std::string, std::shared_ptr<const Table>> tables_;
};

struct Split {
  std::vector<Conversation> conversations;
  TableStore tables;

  std::size_t num_questions() const;
};

/// Registers `tables` (annotating column types) alongside `conversations`.
Split make_split(std::vector<Table> tables, std::vector<Conversation> conversations);

}  // namespace tgqa
