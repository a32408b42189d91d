#include "som/game/types.hpp"

#include <cmath>

#include "som/common/text.hpp"

namespace som::game {

std::string_view to_string(GameKind kind) {
  switch (kind) {
    case GameKind::g08a: return "g08a";
    case GameKind::sag: return "sag";
    case GameKind::undercover: return "undercover";
  }
  return "unknown";
}

GameKind parse_game_kind(std::string_view name) {
  const std::string n = to_lower(trim(name));
  if (n == "g08a" || n == "g0.8a") return GameKind::g08a;
  if (n == "sag") return GameKind::sag;
  if (n == "undercover") return GameKind::undercover;
  throw ConfigError("unknown game kind '" + std::string(name) + "'");
}

std::string_view to_string(Role r) {
  return r == Role::civilian ? "civilian" : "undercover";
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::choose: return "choose";
    case Phase::bid: return "bid";
    case Phase::clue: return "clue";
    case Phase::vote: return "vote";
  }
  return "unknown";
}

std::string action_to_string(const Action& a) {
  if (const auto* v = std::get_if<std::int64_t>(&a)) return std::to_string(*v);
  return std::get<std::string>(a);
}

GameParams default_params(GameKind kind) {
  switch (kind) {
    case GameKind::g08a: return G08AParams{};
    case GameKind::sag: return SagParams{};
    case GameKind::undercover: {
      UndercoverParams p;
      p.word_pairs = {{"apple", "pear"}, {"coffee", "tea"}, {"piano", "guitar"},
                      {"river", "lake"}, {"train", "bus"}};
      return p;
    }
  }
  return G08AParams{};
}

void GameSpec::validate() const {
  if (num_players < 2) throw ConfigError("num-players must be >= 2");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("discount must be in [0,1]");
  switch (kind) {
    case GameKind::g08a: {
      const auto* p = std::get_if<G08AParams>(&params);
      if (!p) throw ConfigError("g08a game needs g08a parameters");
      if (p->action_min >= p->action_max) throw ConfigError("action-min must be < action-max");
      if (!(p->target_factor > 0.0 && p->target_factor < 1.0))
        throw ConfigError("target-factor must be in (0,1)");
      break;
    }
    case GameKind::sag: {
      const auto* p = std::get_if<SagParams>(&params);
      if (!p) throw ConfigError("sag game needs sag parameters");
      if (!(0 < p->round_hp_loss && p->round_hp_loss <= p->initial_hp && p->initial_hp <= p->hp_cap))
        throw ConfigError("sag requires 0 < round-hp-loss <= initial-hp <= hp-cap");
      if (p->initial_budget < 0) throw ConfigError("initial-budget must be >= 0");
      break;
    }
    case GameKind::undercover: {
      const auto* p = std::get_if<UndercoverParams>(&params);
      if (!p) throw ConfigError("undercover game needs undercover parameters");
      if (p->num_undercover < 1 || p->num_undercover >= num_players)
        throw ConfigError("num-undercover must be in [1, num-players)");
      if (p->word_pairs.empty()) throw ConfigError("undercover needs at least one word pair");
      for (const auto& wp : p->word_pairs) {
        if (wp.civilian.empty() || wp.undercover.empty() || wp.civilian == wp.undercover)
          throw ConfigError("word pairs must hold two distinct non-empty words");
      }
      if (p->max_clue_rounds < 1) throw ConfigError("max-clue-rounds must be >= 1");
      break;
    }
  }
}

int GameState::num_alive() const {
  int n = 0;
  for (const auto& p : players) n += p.alive ? 1 : 0;
  return n;
}

std::vector<PlayerId> GameState::alive_players() const {
  std::vector<PlayerId> out;
  for (std::size_t i = 0; i < players.size(); ++i) {
    if (players[i].alive) out.push_back(static_cast<PlayerId>(i));
  }
  return out;
}

std::optional<std::string> Observation::get(const std::string& key) const {
  auto it = fields.find(key);
  if (it == fields.end()) return std::nullopt;
  return it->second;
}

std::optional<double> Observation::number(const std::string& key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  return parse_number(*v);
}

std::string Observation::serialize() const {
  std::string out;
  out += "observer=" + std::to_string(observer) + "\n";
  out += "round=" + std::to_string(round_index) + "\n";
  out += "phase=" + std::string(to_string(phase)) + "\n";
  for (const auto& [k, v] : fields) {
    out += k;
    out += '=';
    for (char c : v) {
      if (c == '\n') {
        out += "\\n";
      } else if (c == '\\') {
        out += "\\\\";
      } else {
        out += c;
      }
    }
    out += '\n';
  }
  return out;
}

void Trajectory::append(TrajectoryStep step) {
  if (!steps_.empty() && step.round <= steps_.back().round) {
    throw std::invalid_argument("trajectory rounds must strictly increase");
  }
  steps_.push_back(std::move(step));
}

std::vector<double> Trajectory::rewards() const {
  std::vector<double> r;
  r.reserve(steps_.size());
  for (const auto& s : steps_) r.push_back(s.reward);
  return r;
}

double episode_return(const std::vector<double>& rewards, double discount) {
  double total = 0.0;
  double weight = 1.0;
  for (double r : rewards) {
    total += weight * r;
    weight *= discount;
  }
  return total;
}

double episode_return(const Trajectory& trajectory, double discount) {
  return episode_return(trajectory.rewards(), discount);
}

}  // namespace som::game
