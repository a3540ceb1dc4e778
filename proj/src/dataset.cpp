#include "tgqa/core/dataset.hpp"

#include "tgqa/error.hpp"
#include "tgqa/text/numeric.hpp"

namespace tgqa {

std::shared_ptr<const Table> TableStore::add(Table table) {
  text::annotate_column_types(table);
  auto ptr = std::make_shared<const Table>(std::move(table));
  tables_[ptr->id()] = ptr;
  return ptr;
}

std::shared_ptr<const Table> TableStore::get(const std::string& id) const {
  const auto it = tables_.find(id);
  if (it == tables_.end()) throw DataError("unknown table '" + id + "'");
  return it->second;
}

std::vector<std::string> TableStore::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, t] : tables_) out.push_back(id);
  return out;
}

std::size_t Split::num_questions() const {
  std::size_t n = 0;
  for (const auto& c : conversations) n += c.turns.size();
  return n;
}

Split make_split(std::vector<Table> tables, std::vector<Conversation> conversations) {
  Split split;
  for (auto& t : tables) split.tables.add(std::move(t));
  split.conversations = std::move(conversations);
  return split;
}

}  // namespace tgqa
