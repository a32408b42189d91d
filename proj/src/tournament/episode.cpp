#include "som/tournament/episode.hpp"

#include "som/backend/reasoner.hpp"
#include "som/common/rng.hpp"
#include "som/common/text.hpp"
#include "som/game/round_log.hpp"

namespace som::tournament {

namespace {

game::Phase prediction_phase(game::GameKind kind) {
  switch (kind) {
    case game::GameKind::g08a: return game::Phase::choose;
    case game::GameKind::sag: return game::Phase::bid;
    case game::GameKind::undercover: return game::Phase::vote;
  }
  return game::Phase::choose;
}

}  // namespace

EpisodeResult run_episode(const game::GameSpec& spec, const std::vector<agents::Agent*>& seats,
                          const std::vector<std::string>& roster, std::uint64_t seed, int episode_index) {
  EpisodeResult result;
  auto& rec = result.record;
  rec.episode = episode_index;
  rec.seed = seed;
  result.agent_events.resize(seats.size());

  auto drain_events = [&] {
    for (std::size_t i = 0; i < seats.size(); ++i) {
      for (auto& e : seats[i]->events().take()) result.agent_events[i].push_back(std::move(e));
    }
  };

  try {
    if (static_cast<int>(seats.size()) != spec.num_players || roster.size() != seats.size()) {
      throw game::ConfigError("seat count does not match the game");
    }
    game::Game g(spec, seed);
    for (std::size_t i = 0; i < seats.size(); ++i) {
      agents::Seating s{spec, static_cast<game::PlayerId>(i), roster,
                        derive_seed(seed, 0x5ea7ULL + i), episode_index};
      seats[i]->begin_episode(s);
    }

    while (!g.terminal()) {
      game::RoundLogRecord log;
      std::map<game::PlayerId, std::vector<agents::Action>> own;
      std::optional<game::RoundOutcome> outcome;
      while (!outcome) {
        const auto phase = g.phase();
        std::map<game::PlayerId, agents::Action> actions;
        for (game::PlayerId p : g.active_players()) {
          const auto obs = g.observation_for(p);
          log.observation_digests.emplace(p, hex_digest(obs.serialize()));
          actions[p] = seats[static_cast<std::size_t>(p)]->act(obs);
        }
        auto report = g.step(actions);
        log.round_index = report.round_index;
        log.joint_action[std::string(game::to_string(phase))] = report.applied;
        for (auto& v : report.violations) log.violations.push_back(std::move(v));
        for (const auto& [p, a] : report.applied) own[p].push_back(a);
        if (phase == prediction_phase(spec.kind)) {
          for (const auto& [p, a] : report.applied) {
            for (const auto& [target, predicted] : seats[static_cast<std::size_t>(p)]->predictions()) {
              auto it = report.applied.find(target);
              if (it == report.applied.end()) continue;
              rec.predictions.push_back({report.round_index, p, target, predicted, game::action_to_string(it->second)});
            }
          }
        }
        if (report.round_completed) outcome = report.outcome;
      }
      log.outcome = *outcome;
      result.round_log.push_back(log.to_json());
      const auto revealed = agents::revealed_actions(spec.kind, outcome->reveal);
      for (std::size_t i = 0; i < seats.size(); ++i) {
        agents::RoundEnd info;
        info.round_index = log.round_index;
        info.record = outcome->reveal;
        info.revealed = revealed;
        info.own_actions = own[static_cast<game::PlayerId>(i)];
        info.reward = outcome->rewards.at(i);
        info.terminal = outcome->terminal;
        info.after = g.observation_for(static_cast<game::PlayerId>(i));
        seats[i]->end_round(info);
      }
      drain_events();
    }

    const auto summary = g.summary();
    for (auto* a : seats) a->end_episode(summary);
    drain_events();
    rec.rounds_played = summary.rounds_played;
    rec.win_share = summary.win_share;
    rec.survival_rounds = summary.survival_rounds;
    rec.total_reward = summary.total_reward;
    result.history = split_lines(game::history_text(g.state(), spec.kind));
  } catch (const backend::BackendError& e) {
    drain_events();
    rec.valid = false;
    rec.invalid_reason = std::string("backend: ") + e.what();
    result.backend_failure = true;
  } catch (const std::exception& e) {
    drain_events();
    rec.valid = false;
    rec.invalid_reason = e.what();
  }
  return result;
}

}  // namespace som::tournament
