#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "som/game/types.hpp"

namespace som::agents {

/// Level-k iterate for G0.8A: x0 = anchor, then each level best-responds to
/// every other player choosing the previous level's value. Levels stay
/// real-valued and clamped; the result is rounded half away from zero.
std::int64_t k_level_choice(int k, int n, std::int64_t anchor, double factor = 0.8, std::int64_t lo = 1,
                            std::int64_t hi = 100);

/// Legal integer closest to the fixed point x = factor * (x + S) / n, where
/// S sums the predicted choices of the other players.
std::int64_t g08a_best_response(double predicted_others_sum, int n, double factor = 0.8, std::int64_t lo = 1,
                                std::int64_t hi = 100);

/// Outbid the strongest predicted rival once hp is inside the urgency
/// window (hp <= 2 * round loss); otherwise bid nothing.
std::int64_t sag_best_response(double predicted_max_rival_bid, int own_hp, std::int64_t budget, int round_hp_loss);

/// Baseline kinds a mixed opponent draws from.
inline const std::vector<std::string>& mixed_pool() {
  static const std::vector<std::string> kinds{"cot", "tot", "k-r", "reflexion"};
  return kinds;
}

/// Uniform seeded draw over mixed_pool(), fixed for a whole episode.
std::string mixed_opponent(std::uint64_t seed, int episode);

}  // namespace som::agents
