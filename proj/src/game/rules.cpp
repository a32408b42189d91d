#include "som/game/rules.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace som::game {
namespace {

// Distances closer than this are treated as equal; real distances between
// integer choices and the target differ by far more.
constexpr double kTieEpsilon = 1e-9;

}  // namespace

RoundOutcome g08a_step(std::span<const std::int64_t> choices, const G08AParams& params) {
  if (choices.empty()) throw GameError("g08a_step: no choices");
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (choices[i] < params.action_min || choices[i] > params.action_max) {
      throw InvalidAction(static_cast<PlayerId>(i),
                          "choice " + std::to_string(choices[i]) + " outside [" +
                              std::to_string(params.action_min) + ", " +
                              std::to_string(params.action_max) + "]");
    }
  }
  const double sum = std::accumulate(choices.begin(), choices.end(), 0.0,
                                     [](double acc, std::int64_t c) { return acc + static_cast<double>(c); });
  const double mean = sum / static_cast<double>(choices.size());
  const double target = params.target_factor * mean;

  double best = INFINITY;
  for (auto c : choices) best = std::min(best, std::fabs(static_cast<double>(c) - target));

  G08ARecord record;
  record.choices.assign(choices.begin(), choices.end());
  record.mean = mean;
  record.target = target;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (std::fabs(static_cast<double>(choices[i]) - target) <= best + kTieEpsilon) {
      record.winners.push_back(static_cast<PlayerId>(i));
    }
  }

  RoundOutcome out;
  out.rewards.assign(choices.size(), 0.0);
  const double share = 1.0 / static_cast<double>(record.winners.size());
  for (auto w : record.winners) out.rewards[static_cast<std::size_t>(w)] = share;
  out.winners = record.winners;
  out.reveal = std::move(record);
  return out;
}

RoundOutcome sag_step(std::span<const std::optional<std::int64_t>> bids, GameState& state,
                      const SagParams& params, int horizon, Rng& rng) {
  if (state.terminal) throw TerminalStateError();
  if (bids.size() != state.players.size()) throw GameError("sag_step: one bid slot per player required");

  std::vector<PlayerId> alive = state.alive_players();
  if (alive.empty()) throw GameError("sag_step: no alive players");
  for (std::size_t i = 0; i < bids.size(); ++i) {
    const auto& p = state.players[i];
    const auto pid = static_cast<PlayerId>(i);
    if (!p.alive) {
      if (bids[i]) throw InvalidAction(pid, "eliminated players cannot bid");
      continue;
    }
    if (!bids[i]) throw InvalidAction(pid, "missing bid");
    if (*bids[i] < 0 || *bids[i] > p.budget) {
      throw InvalidAction(pid, "bid " + std::to_string(*bids[i]) + " outside [0, " +
                                   std::to_string(p.budget) + "]");
    }
  }

  std::int64_t high = -1;
  for (auto pid : alive) high = std::max(high, *bids[static_cast<std::size_t>(pid)]);
  std::vector<PlayerId> tied;
  for (auto pid : alive) {
    if (*bids[static_cast<std::size_t>(pid)] == high) tied.push_back(pid);
  }
  const PlayerId winner = tied.size() == 1 ? tied.front() : rng.pick(tied);

  state.round_index += 1;
  SagRecord record;
  record.winner = winner;
  record.price = high;
  for (auto pid : alive) {
    auto& p = state.players[static_cast<std::size_t>(pid)];
    if (pid == winner) {
      p.budget -= high;
      if (params.full_restore) p.hp = params.hp_cap;
      continue;
    }
    p.hp -= params.round_hp_loss;
    if (p.hp <= 0) {
      p.hp = 0;
      p.alive = false;
      p.eliminated_round = state.round_index;
      record.eliminated.push_back(pid);
    }
  }
  for (const auto& p : state.players) record.hp_after.push_back(p.hp);

  RoundOutcome out;
  out.rewards.assign(state.players.size(), 0.0);
  for (std::size_t i = 0; i < state.players.size(); ++i) {
    if (state.players[i].alive) out.rewards[i] = 1.0;
  }
  out.winners = {winner};
  state.terminal = state.num_alive() <= 1 || state.round_index >= horizon;
  out.terminal = state.terminal;
  state.history.emplace_back(record);
  out.reveal = std::move(record);
  return out;
}

RoundOutcome undercover_step(const UndercoverInput& input, GameState& state,
                             const UndercoverParams& params, int horizon, Rng& rng) {
  if (state.terminal) throw TerminalStateError();
  const auto alive = state.alive_players();
  RoundOutcome out;
  out.rewards.assign(state.players.size(), 0.0);

  if (const auto* clue = std::get_if<CluePhase>(&input)) {
    if (state.phase != Phase::clue) throw GameError("undercover: expected vote phase input");
    for (auto pid : alive) {
      if (!clue->clues.count(pid)) throw InvalidAction(pid, "missing clue");
    }
    for (const auto& [pid, text] : clue->clues) {
      if (pid < 0 || static_cast<std::size_t>(pid) >= state.players.size() ||
          !state.players[static_cast<std::size_t>(pid)].alive) {
        throw InvalidAction(pid, "only alive players give clues");
      }
    }
    state.pending_clues = clue->clues;
    state.phase = Phase::vote;
    UndercoverRecord partial;
    partial.clues = state.pending_clues;
    out.reveal = std::move(partial);
    return out;
  }

  const auto& vote = std::get<VotePhase>(input);
  if (state.phase != Phase::vote) throw GameError("undercover: expected clue phase input");
  std::map<PlayerId, int> tally;
  for (auto pid : alive) {
    auto it = vote.votes.find(pid);
    if (it == vote.votes.end()) throw InvalidAction(pid, "missing vote");
    const PlayerId target = it->second;
    if (target == pid) throw InvalidAction(pid, "cannot vote for self");
    if (target < 0 || static_cast<std::size_t>(target) >= state.players.size() ||
        !state.players[static_cast<std::size_t>(target)].alive) {
      throw InvalidAction(pid, "vote target " + std::to_string(target) + " is not an alive player");
    }
    tally[target] += 1;
  }
  int top = 0;
  for (const auto& [_, n] : tally) top = std::max(top, n);
  std::vector<PlayerId> tied;
  for (const auto& [target, n] : tally) {
    if (n == top) tied.push_back(target);
  }
  const PlayerId eliminated = tied.size() == 1 ? tied.front() : rng.pick(tied);

  state.round_index += 1;
  auto& victim = state.players[static_cast<std::size_t>(eliminated)];
  victim.alive = false;
  victim.eliminated_round = state.round_index;

  UndercoverRecord record;
  record.clues = std::move(state.pending_clues);
  state.pending_clues.clear();
  for (auto pid : alive) record.votes[pid] = vote.votes.at(pid);
  record.eliminated = eliminated;

  int alive_u = 0;
  int alive_c = 0;
  for (const auto& p : state.players) {
    if (!p.alive) continue;
    (p.role == Role::undercover ? alive_u : alive_c) += 1;
  }
  const int round_limit = std::min(params.max_clue_rounds, horizon);
  if (alive_u == 0) {
    state.winning_team = Role::civilian;
  } else if (alive_u >= alive_c || state.round_index >= round_limit) {
    state.winning_team = Role::undercover;
  }
  state.terminal = state.winning_team.has_value();
  state.phase = Phase::clue;
  if (state.terminal) {
    for (std::size_t i = 0; i < state.players.size(); ++i) {
      if (state.players[i].role == state.winning_team) {
        out.rewards[i] = 1.0;
        out.winners.push_back(static_cast<PlayerId>(i));
      }
    }
  }
  out.terminal = state.terminal;
  state.history.emplace_back(record);
  out.reveal = std::move(record);
  return out;
}

}  // namespace som::game
