#pragma once

#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "som/game/game.hpp"

namespace som::game {

nlohmann::json to_json(const PublicRecord& record);
nlohmann::json to_json(const RoundOutcome& outcome);
nlohmann::json to_json(const Action& action);

/// One line-delimited record per completed round. Private fields (sealed
/// bids, votes, clues) appear here but never in observations.
struct RoundLogRecord {
  int round_index = 0;
  std::map<std::string, std::map<PlayerId, Action>> joint_action;  // phase -> actions
  RoundOutcome outcome;
  std::vector<Violation> violations;
  std::map<PlayerId, std::string> observation_digests;

  nlohmann::json to_json() const;
};

void append_record(std::ostream& out, const nlohmann::json& record);

}  // namespace som::game
