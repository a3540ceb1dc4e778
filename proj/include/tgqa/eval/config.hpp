#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace tgqa::eval {

/// Where previous-turn context flags come from at test time. NONE disables
/// marking entirely and is used to measure what the flags contribute.
enum class ContextMode { Predicted, Reference, None };
enum class MatchMode { TextMultiset, Coords };

struct EvalConfig {
  ContextMode context_mode = ContextMode::Predicted;
  MatchMode match_mode = MatchMode::TextMultiset;
  bool numeric_relations = true;

  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

const char* to_string(ContextMode m);
const char* to_string(MatchMode m);
std::optional<ContextMode> context_mode_from_string(std::string_view s);
std::optional<MatchMode> match_mode_from_string(std::string_view s);

}  // namespace tgqa::eval
