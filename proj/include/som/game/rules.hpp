#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <variant>

#include "som/common/rng.hpp"
#include "som/game/types.hpp"

namespace som::game {

/// One round of the beauty contest. The target is target_factor times the
/// arithmetic mean (unrounded); everyone at minimal distance shares reward 1.
/// Throws InvalidAction for an out-of-range choice.
RoundOutcome g08a_step(std::span<const std::int64_t> choices, const G08AParams& params);

/// One sealed-bid first-price round. `bids[p]` must be set exactly for the
/// alive players. Mutates hp, budget and elimination state; ties on the
/// highest bid are broken by a uniform draw from `rng`.
RoundOutcome sag_step(std::span<const std::optional<std::int64_t>> bids, GameState& state,
                      const SagParams& params, int horizon, Rng& rng);

struct CluePhase {
  std::map<PlayerId, std::string> clues;
};
struct VotePhase {
  std::map<PlayerId, PlayerId> votes;
};
using UndercoverInput = std::variant<CluePhase, VotePhase>;

/// Clue phase appends to the round transcript; vote phase eliminates the
/// plurality target (ties drawn from `rng`) and checks the win condition.
RoundOutcome undercover_step(const UndercoverInput& input, GameState& state,
                             const UndercoverParams& params, int horizon, Rng& rng);

}  // namespace som::game
