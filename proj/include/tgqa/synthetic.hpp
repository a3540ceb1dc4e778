#pragma once

#include <cstdint>
#include <vector>

#include "tgqa/core/table.hpp"

// Small hand-built and generated datasets used by the overfit checks, the
// server fixtures and the demo model.
namespace tgqa::synthetic {

/// The Olympic medals table: Rank, Nation, Gold, Silver, Bronze, Total.
Table medals_table();

/// "what are all the nations?" / "which won gold medals?" / "which won more than one?"
Conversation medals_conversation();

struct Dataset {
  std::vector<Table> tables;
  std::vector<Conversation> conversations;
};

/// Toy tables with 3-turn conversations: list a column, filter by a numeric
/// comparison, then filter the previous answer by a group value.
Dataset overfit_dataset(int num_tables, int conversations_per_table, uint64_t seed);

/// Tables whose rows look identical apart from a code column. Turn 1 marks one
/// row at random; turn 2 asks for the code of "that one", which is answerable
/// only from the previous-answer flags.
Dataset context_dataset(int num_conversations, uint64_t seed);

}  // namespace tgqa::synthetic
