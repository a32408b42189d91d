#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "som/backend/reasoning.hpp"
#include "som/game/types.hpp"

namespace som::agents {

/// Display name, rules text and answer format for prompts.
backend::PromptContext prompt_context(const game::GameSpec& spec, game::Phase phase, std::string opponent = {});

/// Observation fields as "key = value" lines, without the history digest.
std::string observation_text(const game::Observation& obs);

std::string history_of(const game::Observation& obs);

std::string_view display_name(game::GameKind kind);

}  // namespace som::agents
