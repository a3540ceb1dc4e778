#include "tgqa/eval/config.hpp"

namespace tgqa::eval {

const char* to_string(ContextMode m) {
  switch (m) {
    case ContextMode::Predicted: return "predicted";
    case ContextMode::Reference: return "reference";
    case ContextMode::None: return "none";
  }
  return "?";
}

const char* to_string(MatchMode m) { return m == MatchMode::TextMultiset ? "text" : "coords"; }

std::optional<ContextMode> context_mode_from_string(std::string_view s) {
  for (auto m : {ContextMode::Predicted, ContextMode::Reference, ContextMode::None}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

std::optional<MatchMode> match_mode_from_string(std::string_view s) {
  for (auto m : {MatchMode::TextMultiset, MatchMode::Coords}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

}  // namespace tgqa::eval
