#include "som/game/game.hpp"

#include <algorithm>
#include <cmath>

#include "som/common/text.hpp"
#include "som/game/rules.hpp"

namespace som::game {
namespace {

std::string id_list(const std::vector<PlayerId>& ids) {
  std::vector<std::string> parts;
  for (auto id : ids) parts.push_back(std::to_string(id));
  return parts.empty() ? "-" : join(parts, ",");
}

std::optional<std::int64_t> as_integer(const Action& a) {
  if (const auto* v = std::get_if<std::int64_t>(&a)) return *v;
  auto n = parse_number(std::get<std::string>(a));
  if (!n || *n != std::floor(*n)) return std::nullopt;
  return static_cast<std::int64_t>(*n);
}

}  // namespace

std::string history_text(const GameState& state, GameKind kind) {
  std::vector<std::string> lines;
  int round = 0;
  for (const auto& rec : state.history) {
    ++round;
    std::string line = "round " + std::to_string(round) + ": ";
    if (kind == GameKind::g08a) {
      const auto& r = std::get<G08ARecord>(rec);
      std::vector<std::string> cs;
      for (auto c : r.choices) cs.push_back(std::to_string(c));
      line += "choices=" + join(cs, ",") + " mean=" + format_number(r.mean) +
              " target=" + format_number(r.target) + " winners=" + id_list(r.winners);
    } else if (kind == GameKind::sag) {
      const auto& r = std::get<SagRecord>(rec);
      std::vector<std::string> hs;
      for (auto h : r.hp_after) hs.push_back(std::to_string(h));
      line += "winner=" + std::to_string(r.winner) + " price=" + std::to_string(r.price) +
              " hp=" + join(hs, ",") + " eliminated=" + id_list(r.eliminated);
    } else {
      const auto& r = std::get<UndercoverRecord>(rec);
      std::vector<std::string> cs;
      for (const auto& [pid, clue] : r.clues) cs.push_back(std::to_string(pid) + ":\"" + clue + "\"");
      std::vector<std::string> vs;
      for (const auto& [pid, target] : r.votes) vs.push_back(std::to_string(pid) + "->" + std::to_string(target));
      line += "clues=" + join(cs, ";") + " votes=" + join(vs, ",") +
              " eliminated=" + (r.eliminated ? std::to_string(*r.eliminated) : std::string("-"));
    }
    lines.push_back(std::move(line));
  }
  return join(lines, "\n");
}

Game::Game(GameSpec spec) : Game(spec, spec.seed) {}

Game::Game(GameSpec spec, std::uint64_t seed) : spec_(std::move(spec)), rng_(seed) {
  spec_.seed = seed;
  spec_.validate();
  setup();
}

void Game::setup() {
  const auto n = static_cast<std::size_t>(spec_.num_players);
  state_ = GameState{};
  state_.players.assign(n, PlayerStatus{});
  state_.cumulative_reward.assign(n, 0.0);
  switch (spec_.kind) {
    case GameKind::g08a:
      state_.phase = Phase::choose;
      break;
    case GameKind::sag:
      state_.phase = Phase::bid;
      for (auto& p : state_.players) {
        p.hp = spec_.sag().initial_hp;
        p.budget = spec_.sag().initial_budget;
      }
      break;
    case GameKind::undercover: {
      state_.phase = Phase::clue;
      const auto& params = spec_.undercover();
      const WordPair pair = rng_.pick(params.word_pairs);
      std::vector<PlayerId> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<PlayerId>(i);
      rng_.shuffle(order);
      for (std::size_t i = 0; i < n; ++i) {
        auto& p = state_.players[static_cast<std::size_t>(order[i])];
        const bool undercover = i < static_cast<std::size_t>(params.num_undercover);
        p.role = undercover ? Role::undercover : Role::civilian;
        p.word = undercover ? pair.undercover : pair.civilian;
      }
      break;
    }
  }
}

std::vector<PlayerId> Game::active_players() const {
  if (state_.terminal) return {};
  return state_.alive_players();
}

Observation Game::observation_for(PlayerId observer) const {
  if (observer < 0 || observer >= spec_.num_players) throw UnknownPlayer(observer);
  const auto& self = state_.players[static_cast<std::size_t>(observer)];

  Observation obs;
  obs.observer = observer;
  obs.round_index = state_.round_index;
  obs.phase = state_.phase;
  auto& f = obs.fields;
  f["game"] = std::string(to_string(spec_.kind));
  f["num-players"] = std::to_string(spec_.num_players);
  f["horizon"] = std::to_string(spec_.horizon);
  f["alive"] = id_list(state_.alive_players());
  if (!state_.history.empty()) f["history"] = history_text(state_, spec_.kind);

  switch (spec_.kind) {
    case GameKind::g08a: {
      const auto& p = spec_.g08a();
      f["action-min"] = std::to_string(p.action_min);
      f["action-max"] = std::to_string(p.action_max);
      f["target-factor"] = format_number(p.target_factor);
      if (!state_.history.empty()) {
        const auto& last = std::get<G08ARecord>(state_.history.back());
        f["last-target"] = format_number(last.target);
        f["last-mean"] = format_number(last.mean);
        f["last-winners"] = id_list(last.winners);
        for (std::size_t i = 0; i < last.choices.size(); ++i) {
          f["last-choice." + std::to_string(i)] = std::to_string(last.choices[i]);
        }
        f["own-last-choice"] = std::to_string(last.choices[static_cast<std::size_t>(observer)]);
        for (std::size_t i = 0; i < state_.cumulative_reward.size(); ++i) {
          f["score." + std::to_string(i)] = format_number(state_.cumulative_reward[i]);
        }
      }
      break;
    }
    case GameKind::sag: {
      const auto& p = spec_.sag();
      f["own-hp"] = std::to_string(self.hp);
      f["own-budget"] = std::to_string(self.budget);
      f["hp-cap"] = std::to_string(p.hp_cap);
      f["round-hp-loss"] = std::to_string(p.round_hp_loss);
      for (std::size_t i = 0; i < state_.players.size(); ++i) {
        f["hp." + std::to_string(i)] = std::to_string(state_.players[i].hp);
      }
      if (!state_.history.empty()) {
        const auto& last = std::get<SagRecord>(state_.history.back());
        f["last-winner"] = std::to_string(last.winner);
        f["last-price"] = std::to_string(last.price);
      }
      break;
    }
    case GameKind::undercover: {
      f["own-word"] = self.word;
      f["num-undercover"] = std::to_string(spec_.undercover().num_undercover);
      for (const auto& [pid, clue] : state_.pending_clues) {
        f["clue." + std::to_string(pid)] = clue;
      }
      if (!state_.history.empty()) {
        const auto& last = std::get<UndercoverRecord>(state_.history.back());
        if (last.eliminated) f["last-eliminated"] = std::to_string(*last.eliminated);
        for (const auto& [pid, target] : last.votes) {
          f["last-vote." + std::to_string(pid)] = std::to_string(target);
        }
      }
      break;
    }
  }
  return obs;
}

StepReport Game::step(const std::map<PlayerId, Action>& actions) {
  if (state_.terminal) throw TerminalStateError();
  for (auto pid : active_players()) {
    if (!actions.count(pid)) throw GameError("missing action for player " + std::to_string(pid));
  }
  switch (spec_.kind) {
    case GameKind::g08a: return step_g08a(actions);
    case GameKind::sag: return step_sag(actions);
    case GameKind::undercover: return step_undercover(actions);
  }
  throw GameError("unknown game kind");
}

void Game::finish_round(const RoundOutcome& outcome) {
  for (std::size_t i = 0; i < outcome.rewards.size(); ++i) {
    state_.cumulative_reward[i] += outcome.rewards[i];
  }
}

StepReport Game::step_g08a(const std::map<PlayerId, Action>& actions) {
  const auto& params = spec_.g08a();
  StepReport report;
  report.phase = Phase::choose;
  report.round_index = state_.round_index + 1;
  std::vector<std::int64_t> choices;
  for (PlayerId pid = 0; pid < spec_.num_players; ++pid) {
    const Action& a = actions.at(pid);
    auto v = as_integer(a);
    std::int64_t applied = 0;
    if (!v) {
      applied = params.action_min;
      report.violations.push_back({pid, "unparseable choice", a, Action{applied}});
    } else {
      applied = std::clamp(*v, params.action_min, params.action_max);
      if (applied != *v) {
        report.violations.push_back({pid, "choice out of range; clamped", a, Action{applied}});
      }
    }
    choices.push_back(applied);
    report.applied[pid] = applied;
  }
  RoundOutcome outcome = g08a_step(choices, params);
  state_.round_index += 1;
  state_.history.push_back(outcome.reveal);
  state_.terminal = state_.round_index >= spec_.horizon;
  outcome.terminal = state_.terminal;
  finish_round(outcome);
  report.round_completed = true;
  report.outcome = std::move(outcome);
  return report;
}

StepReport Game::step_sag(const std::map<PlayerId, Action>& actions) {
  StepReport report;
  report.phase = Phase::bid;
  report.round_index = state_.round_index + 1;
  std::vector<std::optional<std::int64_t>> bids(state_.players.size());
  for (auto pid : state_.alive_players()) {
    const auto& p = state_.players[static_cast<std::size_t>(pid)];
    const Action& a = actions.at(pid);
    auto v = as_integer(a);
    std::int64_t applied = 0;
    if (!v) {
      report.violations.push_back({pid, "unparseable bid", a, Action{applied}});
    } else {
      applied = std::clamp<std::int64_t>(*v, 0, p.budget);
      if (applied != *v) {
        report.violations.push_back({pid, "bid outside [0, budget]; clamped", a, Action{applied}});
      }
    }
    bids[static_cast<std::size_t>(pid)] = applied;
    report.applied[pid] = applied;
  }
  RoundOutcome outcome = sag_step(bids, state_, spec_.sag(), spec_.horizon, rng_);
  finish_round(outcome);
  report.round_completed = true;
  report.outcome = std::move(outcome);
  return report;
}

StepReport Game::step_undercover(const std::map<PlayerId, Action>& actions) {
  const auto& params = spec_.undercover();
  StepReport report;
  report.phase = state_.phase;
  report.round_index = state_.round_index + 1;
  const auto alive = state_.alive_players();

  if (state_.phase == Phase::clue) {
    CluePhase input;
    for (auto pid : alive) {
      const Action& a = actions.at(pid);
      std::string clue = action_to_string(a);
      if (std::holds_alternative<std::int64_t>(a)) {
        report.violations.push_back({pid, "clue must be text", a, Action{clue}});
      }
      input.clues[pid] = clue;
      report.applied[pid] = clue;
    }
    undercover_step(input, state_, params, spec_.horizon, rng_);
    return report;
  }

  VotePhase input;
  for (auto pid : alive) {
    const Action& a = actions.at(pid);
    auto v = as_integer(a);
    const bool valid = v && *v != pid && *v >= 0 && *v < spec_.num_players &&
                       state_.players[static_cast<std::size_t>(*v)].alive;
    PlayerId target = 0;
    if (valid) {
      target = static_cast<PlayerId>(*v);
    } else {
      std::vector<PlayerId> options;
      for (auto other : alive) {
        if (other != pid) options.push_back(other);
      }
      target = rng_.pick(options);
      report.violations.push_back({pid, "invalid vote target; substituted", a, Action{std::int64_t{target}}});
    }
    input.votes[pid] = target;
    report.applied[pid] = std::int64_t{target};
  }
  RoundOutcome outcome = undercover_step(input, state_, params, spec_.horizon, rng_);
  finish_round(outcome);
  report.round_completed = true;
  report.outcome = std::move(outcome);
  return report;
}

EpisodeSummary Game::summary() const {
  EpisodeSummary s;
  const auto n = state_.players.size();
  s.rounds_played = state_.round_index;
  s.total_reward = state_.cumulative_reward;
  s.win_share.assign(n, 0.0);
  s.survival_rounds.assign(n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = state_.players[i];
    s.survival_rounds[i] = p.alive ? s.rounds_played : p.eliminated_round - 1;
  }

  switch (spec_.kind) {
    case GameKind::g08a: {
      double best = *std::max_element(s.total_reward.begin(), s.total_reward.end());
      std::vector<std::size_t> top;
      for (std::size_t i = 0; i < n; ++i) {
        if (std::fabs(s.total_reward[i] - best) <= 1e-9) top.push_back(i);
      }
      if (s.rounds_played > 0) {
        for (auto i : top) s.win_share[i] = 1.0 / static_cast<double>(top.size());
      }
      break;
    }
    case GameKind::sag: {
      const auto alive = state_.alive_players();
      // A last survivor would win every remaining round unopposed.
      if (state_.terminal && alive.size() == 1) {
        s.survival_rounds[static_cast<std::size_t>(alive.front())] = spec_.horizon;
      }
      for (auto pid : alive) s.win_share[static_cast<std::size_t>(pid)] = 1.0 / static_cast<double>(alive.size());
      break;
    }
    case GameKind::undercover: {
      if (state_.winning_team) {
        for (std::size_t i = 0; i < n; ++i) {
          if (state_.players[i].role == state_.winning_team) s.win_share[i] = 1.0;
        }
      }
      break;
    }
  }
  return s;
}

}  // namespace som::game
