#include "som/agents/strategies.hpp"

#include <algorithm>

#include "som/common/rng.hpp"
#include "som/common/text.hpp"

namespace som::agents {

std::int64_t k_level_choice(int k, int n, std::int64_t anchor, double factor, std::int64_t lo, std::int64_t hi) {
  // Levels reason over real values; only the played level is rounded.
  // Rounding every level would stall at 2, where 0.75 * 2 rounds back up.
  double x = static_cast<double>(anchor);
  for (int level = 0; level < k; ++level) {
    x = std::clamp(factor * (n - 1) * x / (n - factor), static_cast<double>(lo), static_cast<double>(hi));
  }
  return std::clamp(round_half_away(x), lo, hi);
}

std::int64_t g08a_best_response(double predicted_others_sum, int n, double factor, std::int64_t lo, std::int64_t hi) {
  const double x = factor * predicted_others_sum / (n - factor);
  return std::clamp(round_half_away(x), lo, hi);
}

std::int64_t sag_best_response(double predicted_max_rival_bid, int own_hp, std::int64_t budget, int round_hp_loss) {
  if (own_hp > 2 * round_hp_loss) return 0;
  const std::int64_t want = std::max<std::int64_t>(0, round_half_away(predicted_max_rival_bid)) + 1;
  return std::clamp<std::int64_t>(want, 0, std::max<std::int64_t>(budget, 0));
}

std::string mixed_opponent(std::uint64_t seed, int episode) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(episode)));
  return rng.pick(mixed_pool());
}

}  // namespace som::agents
