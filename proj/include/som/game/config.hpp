#pragma once

#include <filesystem>
#include <string>

#include "som/game/types.hpp"

namespace YAML {
class Node;
}

namespace som::game {

/// Reads a `game:` block: kind, players, horizon, discount, seed and a
/// `params:` sub-block. Missing keys take the per-game defaults.
GameSpec parse_game_spec(const YAML::Node& node);
GameSpec load_game_spec(const std::filesystem::path& path);

}  // namespace som::game
