#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "som/game/types.hpp"

namespace som::agents {

struct ParsedAction {
  std::optional<game::Action> action;
  bool clamped = false;
  std::string problem;  // set when parsing failed or the value was clamped
};

/// Reads an action for `phase` out of free text. Numbers prefer the last
/// "choice:", "bid:" or "vote:" label, then the last integer in the text;
/// clues prefer the last "clue:" label, then the last non-empty line.
/// Numeric results are clamped into [lo, hi]. Never throws.
ParsedAction parse_action(game::Phase phase, std::string_view text, std::int64_t lo, std::int64_t hi);

/// Legal numeric range for `phase` given the observer's view.
std::pair<std::int64_t, std::int64_t> action_range(const game::GameSpec& spec, game::Phase phase,
                                                   const game::Observation& obs);

}  // namespace som::agents
