#include "som/agents/scripted_agents.hpp"

#include <algorithm>
#include <cmath>

#include "som/common/text.hpp"

namespace som::agents {

namespace {

constexpr std::string_view kConstantPrefix = "g08a-constant-";

std::optional<std::int64_t> constant_of(std::string_view rule) {
  if (rule.substr(0, kConstantPrefix.size()) != kConstantPrefix) return std::nullopt;
  auto v = parse_number(rule.substr(kConstantPrefix.size()));
  if (!v || *v != std::floor(*v)) return std::nullopt;
  return static_cast<std::int64_t>(*v);
}

std::int64_t field_int(const game::Observation& obs, const std::string& key, std::int64_t fallback) {
  auto v = obs.number(key);
  return v ? static_cast<std::int64_t>(*v) : fallback;
}

std::string length_clue(const game::Observation& obs) {
  return "my word has " + std::to_string(obs.get("own-word").value_or("").size()) + " letters";
}

void require_game(std::string_view rule, const game::Observation& obs, std::string_view kind) {
  if (obs.get("game").value_or("") != kind) {
    throw std::invalid_argument("rule '" + std::string(rule) + "' does not apply to game " + obs.get("game").value_or("?"));
  }
}

}  // namespace

bool is_known_rule(std::string_view rule) {
  return rule == "g08a-follow-target" || rule == "sag-half-budget" || rule == "sag-urgent" ||
         rule == "undercover-length" || constant_of(rule).has_value();
}

Action scripted_opponent(std::string_view rule, const game::Observation& obs) {
  if (rule == "g08a-follow-target") {
    require_game(rule, obs, "g08a");
    const auto lo = field_int(obs, "action-min", 1);
    const auto hi = field_int(obs, "action-max", 100);
    auto target = obs.number("last-target");
    if (!target) return Action{std::clamp<std::int64_t>(50, lo, hi)};
    return Action{std::clamp(round_half_away(0.8 * *target), lo, hi)};
  }
  if (auto c = constant_of(rule)) {
    require_game(rule, obs, "g08a");
    return Action{std::clamp(*c, field_int(obs, "action-min", 1), field_int(obs, "action-max", 100))};
  }
  if (rule == "sag-half-budget") {
    require_game(rule, obs, "sag");
    return Action{field_int(obs, "own-budget", 0) / 2};
  }
  if (rule == "sag-urgent") {
    require_game(rule, obs, "sag");
    const bool urgent = field_int(obs, "own-hp", 0) <= field_int(obs, "round-hp-loss", 0);
    return Action{urgent ? field_int(obs, "own-budget", 0) : std::int64_t{0}};
  }
  if (rule == "undercover-length") {
    require_game(rule, obs, "undercover");
    if (obs.phase == game::Phase::clue) return Action{length_clue(obs)};
    const std::string own = "clue." + std::to_string(obs.observer);
    const std::string mine = obs.get(own).value_or(length_clue(obs));
    std::optional<std::int64_t> first_other;
    for (const auto& part : split(obs.get("alive").value_or(""), ',')) {
      auto v = parse_number(part);
      if (!v || static_cast<PlayerId>(*v) == obs.observer) continue;
      const auto p = static_cast<std::int64_t>(*v);
      if (!first_other) first_other = p;
      if (obs.get("clue." + std::to_string(p)).value_or(mine) != mine) return Action{p};
    }
    return Action{first_other.value_or(obs.observer)};
  }
  throw std::invalid_argument("unknown scripted rule '" + std::string(rule) + "'");
}

ScriptedAgent::ScriptedAgent(std::string rule) : rule_(std::move(rule)) {
  if (!is_known_rule(rule_)) throw std::invalid_argument("unknown scripted rule '" + rule_ + "'");
}

std::unique_ptr<Agent> ScriptedAgent::clone() const {
  auto copy = std::make_unique<ScriptedAgent>(*this);
  copy->events_ = EventLog{};
  return copy;
}

Action ScriptedAgent::act(const game::Observation& obs) {
  Action a = scripted_opponent(rule_, obs);
  events_.add({{"type", "act"}, {"round", obs.round_index + 1}, {"phase", game::to_string(obs.phase)},
               {"action", game::action_to_string(a)}});
  return a;
}

}  // namespace som::agents
