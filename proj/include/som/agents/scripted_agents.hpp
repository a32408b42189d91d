#pragma once

#include <string>
#include <string_view>

#include "som/agents/agent.hpp"

namespace som::agents {

/// Deterministic rule library for oracle tests:
///   g08a-follow-target  round(0.8 x last target), 50 in the first round
///   g08a-constant-<c>   always c
///   sag-half-budget     floor(budget / 2)
///   sag-urgent          whole budget once hp <= round loss, else 0
///   undercover-length   clue states the word length; votes for the first
///                       living player whose clue differs from its own
/// Throws std::invalid_argument for an unknown rule or a rule of another game.
Action scripted_opponent(std::string_view rule, const game::Observation& obs);

bool is_known_rule(std::string_view rule);

class ScriptedAgent : public Agent {
 public:
  explicit ScriptedAgent(std::string rule);

  std::string kind() const override { return "scripted"; }
  std::unique_ptr<Agent> clone() const override;
  Action act(const game::Observation& obs) override;
  const std::string& rule() const { return rule_; }

 private:
  std::string rule_;
};

}  // namespace som::agents
