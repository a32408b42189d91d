#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "som/common/rng.hpp"
#include "som/game/types.hpp"

namespace som::game {

struct Violation {
  PlayerId player = 0;
  std::string reason;
  Action submitted;
  Action substituted;
};

struct StepReport {
  Phase phase = Phase::choose;
  int round_index = 0;  // round the step belonged to (1-based)
  bool round_completed = false;
  std::optional<RoundOutcome> outcome;  // set when the round completed
  std::map<PlayerId, Action> applied;   // after clamping/substitution
  std::vector<Violation> violations;
};

struct EpisodeSummary {
  int rounds_played = 0;
  std::vector<double> win_share;
  std::vector<int> survival_rounds;
  std::vector<double> total_reward;
};

/// Seeded game engine. Single writer: one episode advances on one thread.
class Game {
 public:
  explicit Game(GameSpec spec);
  Game(GameSpec spec, std::uint64_t seed);

  const GameSpec& spec() const { return spec_; }
  const GameState& state() const { return state_; }
  bool terminal() const { return state_.terminal; }
  Phase phase() const { return state_.phase; }
  int num_players() const { return spec_.num_players; }

  /// Players expected to act in the current phase.
  std::vector<PlayerId> active_players() const;

  /// Public record plus the observer's private fields. Deterministic in
  /// (observer, state). Throws UnknownPlayer.
  Observation observation_for(PlayerId observer) const;

  /// Applies one phase of joint action. Invalid actions are clamped or
  /// substituted and reported, never fatal. Throws TerminalStateError once
  /// the episode is over, or GameError when an active player is missing.
  StepReport step(const std::map<PlayerId, Action>& actions);

  EpisodeSummary summary() const;

 private:
  void setup();
  StepReport step_g08a(const std::map<PlayerId, Action>& actions);
  StepReport step_sag(const std::map<PlayerId, Action>& actions);
  StepReport step_undercover(const std::map<PlayerId, Action>& actions);
  void finish_round(const RoundOutcome& outcome);

  GameSpec spec_;
  GameState state_;
  Rng rng_;
};

/// Text digest of all completed public rounds, one line per round.
std::string history_text(const GameState& state, GameKind kind);

}  // namespace som::game
