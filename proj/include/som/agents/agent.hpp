#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "som/game/game.hpp"
#include "som/game/types.hpp"

namespace som::agents {

using game::Action;
using game::PlayerId;

/// Who sits where in one episode. Ids are stable across episodes so
/// opponent-specific state can persist.
struct Seating {
  game::GameSpec spec;
  PlayerId self = 0;
  std::vector<std::string> roster;  // agent id per seat
  std::uint64_t seed = 0;
  int episode = 0;

  const std::string& id_of(PlayerId p) const { return roster.at(static_cast<std::size_t>(p)); }
};

/// What an agent learns when a round completes.
struct RoundEnd {
  int round_index = 0;
  game::PublicRecord record;
  /// Actions made public by the round: every choice in G0.8A, the winning
  /// price in SAG, every clue and vote in Undercover.
  std::map<PlayerId, std::vector<Action>> revealed;
  std::vector<Action> own_actions;  // one per phase
  double reward = 0.0;
  bool terminal = false;
  game::Observation after;  // observation once the round resolved
};

std::map<PlayerId, std::vector<Action>> revealed_actions(game::GameKind kind, const game::PublicRecord& record);

/// Line-delimited structured event log; one per agent per episode.
class EventLog {
 public:
  void add(nlohmann::json event) { events_.push_back(std::move(event)); }
  const std::vector<nlohmann::json>& events() const { return events_; }
  std::vector<nlohmann::json> take() { return std::exchange(events_, {}); }

 private:
  std::vector<nlohmann::json> events_;
};

class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string kind() const = 0;
  /// Independent copy carrying all learned state.
  virtual std::unique_ptr<Agent> clone() const = 0;

  virtual void begin_episode(const Seating& seating) { seating_ = seating; }
  /// Called once per phase in which this agent is active.
  virtual Action act(const game::Observation& obs) = 0;
  virtual void end_round(const RoundEnd&) {}
  virtual void end_episode(const game::EpisodeSummary&) {}

  /// Predicted opponent actions made during the current round, keyed by
  /// seat. Empty for agents that do not predict.
  virtual std::map<PlayerId, std::string> predictions() const { return {}; }

  /// Stops all learning; acting continues.
  virtual void set_frozen(bool frozen) { frozen_ = frozen; }
  bool frozen() const { return frozen_; }

  /// Digest of earlier episodes that prompt-based agents add to history.
  void set_context(std::string digest) { context_ = std::move(digest); }
  const std::string& context() const { return context_; }

  EventLog& events() { return events_; }

 protected:
  Seating seating_;
  EventLog events_;
  bool frozen_ = false;
  std::string context_;
};

}  // namespace som::agents
