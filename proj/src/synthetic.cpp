#include "tgqa/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "tgqa/rng.hpp"

namespace tgqa::synthetic {

namespace {

QuestionTurn make_turn(const Table& table, int position, std::string text, int col,
                       const std::vector<int>& rows) {
  QuestionTurn turn;
  turn.position = position;
  turn.text = std::move(text);
  for (int r : rows) {
    turn.gold_answers.push_back({r, col});
    turn.gold_answer_texts.push_back(table.cell(r, col));
  }
  return turn;
}

template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t k, SplitMix64& rng) {
  for (std::size_t i = 0; i < k && i < pool.size(); ++i) {
    std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  }
  pool.resize(std::min(k, pool.size()));
  return pool;
}

const std::vector<std::string> kNameHeaders = {"nation", "player", "city",   "team",
                                               "driver", "school", "artist", "club"};
const std::vector<std::string> kNumberHeaders = {"points", "floors", "wins",   "goals",
                                                 "titles", "medals", "votes",  "laps",
                                                 "seats",  "games",  "stars",  "years"};
const std::vector<std::string> kGroupHeaders = {"region", "league", "color",    "division",
                                                "zone",   "status", "category", "type"};
const std::vector<std::string> kNames = {
    "australia", "italy",   "germany", "brazil",  "boston",  "denver",  "toronto", "madrid",
    "lyon",      "oslo",    "kenya",   "peru",    "chile",   "norway",  "austin",  "dallas",
    "hawks",     "eagles",  "tigers",  "lions",   "falcons", "bears",   "wolves",  "sharks",
    "smith",     "jones",   "garcia",  "miller",  "davis",   "lopez",   "wilson",  "taylor",
    "harvard",   "yale",    "oxford",  "cornell", "monaco",  "sydney",  "quebec",  "vienna"};
const std::vector<std::string> kGroups = {"north", "south", "east",   "west",  "red",
                                          "blue",  "green", "active", "retired", "senior",
                                          "junior", "major", "minor", "upper", "lower", "home"};

const char* kNumberWords[] = {"zero", "one", "two", "three", "four", "five",
                              "six",  "seven", "eight", "nine", "ten"};

}  // namespace

Table medals_table() {
  return Table("medals", {"Rank", "Nation", "Gold", "Silver", "Bronze", "Total"},
               {{"1", "Australia", "2", "1", "0", "3"},
                {"2", "Italy", "1", "1", "1", "3"},
                {"3", "Germany", "1", "0", "1", "2"},
                {"4", "Soviet Union", "1", "0", "0", "1"},
                {"5", "Switzerland", "0", "2", "1", "3"},
                {"6", "United States", "0", "1", "0", "1"},
                {"7", "Great Britain", "0", "0", "1", "1"},
                {"7", "France", "0", "0", "1", "1"}});
}

Conversation medals_conversation() {
  const Table t = medals_table();
  Conversation conv;
  conv.sequence_id = "medals";
  conv.table_id = t.id();
  conv.turns.push_back(make_turn(t, 1, "What are all the nations?", 1, {0, 1, 2, 3, 4, 5, 6, 7}));
  conv.turns.push_back(make_turn(t, 2, "Which won gold medals?", 1, {0, 1, 2, 3}));
  conv.turns.push_back(make_turn(t, 3, "Which won more than one?", 1, {0}));
  return conv;
}

Dataset overfit_dataset(int num_tables, int conversations_per_table, uint64_t seed) {
  SplitMix64 rng(seed);
  Dataset data;
  constexpr int kRows = 5;
  for (int t = 0; t < num_tables; ++t) {
    const std::string name_header = kNameHeaders[t % kNameHeaders.size()];
    const auto num_headers = sample_without_replacement(kNumberHeaders, 2, rng);
    const std::string group_header = kGroupHeaders[t % kGroupHeaders.size()];
    const auto names = sample_without_replacement(kNames, kRows, rng);
    const auto groups = sample_without_replacement(kGroups, 2, rng);

    std::vector<std::vector<std::string>> cells;
    std::vector<std::vector<int>> numbers(2, std::vector<int>(kRows));
    std::vector<int> group_of(kRows);
    for (int r = 0; r < kRows; ++r) {
      numbers[0][r] = static_cast<int>(rng.below(10));
      numbers[1][r] = static_cast<int>(rng.below(10));
      group_of[r] = r < 2 ? r : static_cast<int>(rng.below(2));
      cells.push_back({names[r], std::to_string(numbers[0][r]), std::to_string(numbers[1][r]),
                       groups[group_of[r]]});
    }
    Table table("toy" + std::to_string(t),
                {name_header, num_headers[0], num_headers[1], group_header}, cells);

    for (int k = 0; k < conversations_per_table; ++k) {
      Conversation conv;
      conv.sequence_id = table.id() + "-" + std::to_string(k);
      conv.table_id = table.id();
      std::vector<int> all(kRows);
      std::iota(all.begin(), all.end(), 0);
      const std::string t1 = (k % 2 == 0) ? "what are all the " + name_header + "s?"
                                          : "list every " + name_header;
      conv.turns.push_back(make_turn(table, 1, t1, 0, all));

      // A threshold that keeps between 1 and kRows-1 rows, retried over columns/directions.
      std::vector<int> filtered;
      std::string t2;
      for (int attempt = 0; attempt < 64 && filtered.empty(); ++attempt) {
        const int numeric = static_cast<int>(rng.below(2));
        const bool greater = rng.below(2) == 0;
        const int threshold = static_cast<int>(rng.below(9));
        std::vector<int> rows;
        for (int r = 0; r < kRows; ++r) {
          const int v = numbers[numeric][r];
          if (greater ? v > threshold : v < threshold) rows.push_back(r);
        }
        if (rows.empty() || rows.size() == static_cast<std::size_t>(kRows)) continue;
        const std::string number = (rng.below(3) == 0) ? kNumberWords[threshold]
                                                       : std::to_string(threshold);
        t2 = std::string("which have ") + (greater ? "more" : "less") + " than " + number + " " +
             num_headers[numeric] + "?";
        filtered = rows;
      }
      if (filtered.empty()) {
        filtered = {0};
        t2 = "which have more than nine " + num_headers[0] + "?";
      }
      conv.turns.push_back(make_turn(table, 2, t2, 0, filtered));

      // Prefer a group value that also occurs outside the previous answer.
      int chosen = -1;
      bool chosen_needs_context = false;
      for (int g : {static_cast<int>(rng.below(2)), 0, 1}) {
        bool inside = false;
        bool outside = false;
        for (int r = 0; r < kRows; ++r) {
          if (group_of[r] != g) continue;
          const bool in_prev = std::find(filtered.begin(), filtered.end(), r) != filtered.end();
          (in_prev ? inside : outside) = true;
        }
        if (!inside) continue;
        if (chosen < 0 || (outside && !chosen_needs_context)) {
          chosen = g;
          chosen_needs_context = outside;
        }
      }
      std::vector<int> final_rows;
      for (int r : filtered) {
        if (group_of[r] == chosen) final_rows.push_back(r);
      }
      conv.turns.push_back(
          make_turn(table, 3, "which of those are " + groups[chosen] + "?", 0, final_rows));
      data.conversations.push_back(std::move(conv));
    }
    data.tables.push_back(std::move(table));
  }
  return data;
}

Dataset context_dataset(int num_conversations, uint64_t seed) {
  SplitMix64 rng(seed);
  const std::vector<std::string> items = {"widget", "bolt", "lamp", "chair", "valve", "cable"};
  const std::vector<std::string> colors = {"red", "blue", "green", "black", "white"};
  Dataset data;
  for (int i = 0; i < num_conversations; ++i) {
    const int rows = 3 + static_cast<int>(rng.below(3));
    const std::string item = items[rng.below(items.size())];
    const std::string color = colors[rng.below(colors.size())];
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> codes;
    while (static_cast<int>(codes.size()) < rows) {
      std::string code = std::string(1, static_cast<char>('a' + rng.below(26))) +
                         std::to_string(10 + rng.below(90));
      if (std::find(codes.begin(), codes.end(), code) == codes.end()) codes.push_back(code);
    }
    for (int r = 0; r < rows; ++r) cells.push_back({codes[r], item, color});
    Table table("ctx" + std::to_string(i), {"code", "item", "color"}, cells);

    const int picked = static_cast<int>(rng.below(rows));
    Conversation conv;
    conv.sequence_id = table.id();
    conv.table_id = table.id();
    conv.turns.push_back(
        make_turn(table, 1, "which " + item + " has code " + codes[picked] + "?", 1, {picked}));
    conv.turns.push_back(make_turn(table, 2, "what is the code of that one?", 0, {picked}));
    data.conversations.push_back(std::move(conv));
    data.tables.push_back(std::move(table));
  }
  return data;
}

}  // namespace tgqa::synthetic
