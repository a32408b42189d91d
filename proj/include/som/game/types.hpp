#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace som::game {

using PlayerId = int;

enum class GameKind { g08a, sag, undercover };

std::string_view to_string(GameKind kind);
GameKind parse_game_kind(std::string_view name);

struct G08AParams {
  std::int64_t action_min = 1;
  std::int64_t action_max = 100;
  double target_factor = 0.8;
};

struct SagParams {
  int initial_hp = 10;
  int hp_cap = 10;
  int round_hp_loss = 2;
  std::int64_t initial_budget = 100;
  // Without full restore the winner only skips this round's hp loss.
  bool full_restore = true;
};

struct WordPair {
  std::string civilian;
  std::string undercover;
};

struct UndercoverParams {
  int num_undercover = 1;
  std::vector<WordPair> word_pairs;
  int max_clue_rounds = 3;
};

using GameParams = std::variant<G08AParams, SagParams, UndercoverParams>;

struct GameSpec {
  GameKind kind = GameKind::g08a;
  int num_players = 2;
  int horizon = 10;
  double discount = 1.0;
  std::uint64_t seed = 0;
  GameParams params = G08AParams{};

  /// Throws ConfigError on a violated invariant.
  void validate() const;

  const G08AParams& g08a() const { return std::get<G08AParams>(params); }
  const SagParams& sag() const { return std::get<SagParams>(params); }
  const UndercoverParams& undercover() const { return std::get<UndercoverParams>(params); }
};

/// Default per-game parameter block for a kind.
GameParams default_params(GameKind kind);

class GameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public GameError {
 public:
  using GameError::GameError;
};

class InvalidAction : public GameError {
 public:
  InvalidAction(PlayerId player, const std::string& what)
      : GameError("invalid action by player " + std::to_string(player) + ": " + what),
        player_(player) {}
  PlayerId player() const { return player_; }

 private:
  PlayerId player_;
};

class TerminalStateError : public GameError {
 public:
  TerminalStateError() : GameError("episode is terminal; no further steps accepted") {}
};

class UnknownPlayer : public GameError {
 public:
  explicit UnknownPlayer(PlayerId p) : GameError("unknown player id " + std::to_string(p)) {}
};

/// A joint-action component: integer for choices, bids and votes; text for
/// Undercover clues.
using Action = std::variant<std::int64_t, std::string>;

std::string action_to_string(const Action& a);

enum class Role { civilian, undercover };
std::string_view to_string(Role r);

enum class Phase { choose, bid, clue, vote };
std::string_view to_string(Phase p);

struct PlayerStatus {
  bool alive = true;
  int hp = 0;
  std::int64_t budget = 0;
  std::string word;
  std::optional<Role> role;
  // Round at whose end the player was eliminated; 0 while alive.
  int eliminated_round = 0;
};

struct G08ARecord {
  std::vector<std::int64_t> choices;
  double mean = 0.0;
  double target = 0.0;
  std::vector<PlayerId> winners;
};

struct SagRecord {
  PlayerId winner = -1;
  std::int64_t price = 0;
  std::vector<int> hp_after;
  std::vector<PlayerId> eliminated;
};

struct UndercoverRecord {
  std::map<PlayerId, std::string> clues;
  std::map<PlayerId, PlayerId> votes;
  std::optional<PlayerId> eliminated;
};

/// Revealed information about one completed round.
using PublicRecord = std::variant<G08ARecord, SagRecord, UndercoverRecord>;

struct GameState {
  int round_index = 0;
  std::vector<PlayerStatus> players;
  std::vector<PublicRecord> history;
  std::vector<double> cumulative_reward;
  bool terminal = false;
  Phase phase = Phase::choose;
  // Undercover: clues of the round in progress (public once given).
  std::map<PlayerId, std::string> pending_clues;
  std::optional<Role> winning_team;

  int num_alive() const;
  std::vector<PlayerId> alive_players() const;
};

struct RoundOutcome {
  std::vector<double> rewards;
  std::vector<PlayerId> winners;
  PublicRecord reveal;
  bool terminal = false;
};

/// What one agent sees; flat named fields, values as text.
struct Observation {
  PlayerId observer = 0;
  int round_index = 0;
  Phase phase = Phase::choose;
  std::map<std::string, std::string> fields;

  std::optional<std::string> get(const std::string& key) const;
  std::optional<double> number(const std::string& key) const;
  /// Canonical one-field-per-line text; newlines in values are escaped.
  std::string serialize() const;
};

struct TrajectoryStep {
  int round = 0;
  Observation observation;
  std::vector<Action> actions;  // one per phase of the round
  double reward = 0.0;
};

/// Local history of one agent.
class Trajectory {
 public:
  /// Throws std::invalid_argument unless round strictly increases.
  void append(TrajectoryStep step);
  const std::vector<TrajectoryStep>& steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }
  std::vector<double> rewards() const;

 private:
  std::vector<TrajectoryStep> steps_;
};

double episode_return(const Trajectory& trajectory, double discount = 1.0);
double episode_return(const std::vector<double>& rewards, double discount = 1.0);

}  // namespace som::game
