#pragma once

#include <memory>
#include <string>
#include <vector>

#include "som/agents/scripted_agents.hpp"
#include "som/agents/som_agent.hpp"
#include "som/backend/scripted.hpp"
#include "som/game/game.hpp"
#include "som/tournament/episode.hpp"

namespace som::testing {

inline std::string fixture_path(const std::string& file) { return std::string(SOM_FIXTURE_DIR) + "/" + file; }

inline std::shared_ptr<const backend::Reasoner> fixture_backend(const std::string& file, const std::string& name) {
  return std::make_shared<backend::ScriptedReasoner>(backend::ScriptedRuleSet::load(fixture_path(file)), name);
}

inline game::GameSpec g08a_spec(int players = 2, int horizon = 10) {
  game::GameSpec s;
  s.kind = game::GameKind::g08a;
  s.num_players = players;
  s.horizon = horizon;
  s.params = game::G08AParams{};
  return s;
}

/// Trains a SOM agent against the follow-target opponent for `episodes`
/// episodes and returns its model.
inline agents::OpponentModel train_against_follower(std::shared_ptr<const backend::Reasoner> backend,
                                                    agents::SomParams params, int episodes, std::uint64_t seed) {
  agents::SomAgent som(std::move(backend), params);
  agents::ScriptedAgent follower("g08a-follow-target");
  const auto spec = g08a_spec();
  for (int e = 0; e < episodes; ++e) {
    tournament::run_episode(spec, {&som, &follower}, {"som", "follower"}, seed + static_cast<std::uint64_t>(e), e);
  }
  return som.model();
}

/// Observations of seat 0 along a fixed G0.8A trajectory.
inline std::vector<game::Observation> fixed_observations() {
  const auto spec = g08a_spec(2, 10);
  game::Game g(spec, 99);
  std::vector<game::Observation> out;
  const std::int64_t mine[] = {50, 40, 33, 20, 71, 5, 64, 12, 90};
  const std::int64_t theirs[] = {60, 36, 30, 21, 14, 40, 2, 55, 100};
  out.push_back(g.observation_for(0));
  for (int r = 0; r < 9; ++r) {
    g.step({{0, game::Action{mine[r]}}, {1, game::Action{theirs[r]}}});
    out.push_back(g.observation_for(0));
  }
  return out;
}

/// Predictions of an agent holding `model` for seat 1 along
/// fixed_observations().
inline std::vector<std::string> predictions_with(const agents::OpponentModel& model,
                                                 std::shared_ptr<const backend::Reasoner> backend,
                                                 agents::SomParams params) {
  agents::SomAgent som(std::move(backend), params, model);
  som.set_frozen(true);
  agents::Seating s;
  s.spec = g08a_spec();
  s.self = 0;
  s.roster = {"som", "follower"};
  som.begin_episode(s);
  std::vector<std::string> out;
  for (const auto& obs : fixed_observations()) out.push_back(som.predict(obs, 1));
  return out;
}

}  // namespace som::testing
