#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "som/agents/agent.hpp"
#include "som/tournament/report.hpp"

namespace som::tournament {

struct EpisodeResult {
  EpisodeRecord record;
  std::vector<nlohmann::json> round_log;                // one record per round
  std::vector<std::vector<nlohmann::json>> agent_events;  // per seat
  std::vector<std::string> history;                     // public round digests
  bool backend_failure = false;  // aborted by a backend error
};

/// Plays one episode to its end. An exception from an agent aborts the
/// episode and marks it invalid; the logs up to that point are kept.
/// `episode_index` is what agents see in their seating.
EpisodeResult run_episode(const game::GameSpec& spec, const std::vector<agents::Agent*>& seats,
                          const std::vector<std::string>& roster, std::uint64_t seed, int episode_index);

}  // namespace som::tournament
