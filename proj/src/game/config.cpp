#include "som/game/config.hpp"

#include <yaml-cpp/yaml.h>

namespace som::game {
namespace {

template <typename T>
T get_or(const YAML::Node& node, const char* key, T fallback) {
  if (!node || !node[key]) return fallback;
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

GameSpec parse_game_spec(const YAML::Node& node) {
  if (!node || !node.IsMap()) throw ConfigError("game block must be a mapping");
  if (!node["kind"]) throw ConfigError("game block needs 'kind'");
  GameSpec spec;
  spec.kind = parse_game_kind(node["kind"].as<std::string>());
  spec.num_players = get_or(node, "players", 2);
  spec.horizon = get_or(node, "horizon", 10);
  spec.discount = get_or(node, "discount", 1.0);
  spec.seed = get_or<std::uint64_t>(node, "seed", 0);
  spec.params = default_params(spec.kind);

  const YAML::Node params = node["params"];
  if (params && !params.IsMap()) throw ConfigError("game params must be a mapping");
  switch (spec.kind) {
    case GameKind::g08a: {
      auto& p = std::get<G08AParams>(spec.params);
      p.action_min = get_or(params, "action_min", p.action_min);
      p.action_max = get_or(params, "action_max", p.action_max);
      p.target_factor = get_or(params, "target_factor", p.target_factor);
      break;
    }
    case GameKind::sag: {
      auto& p = std::get<SagParams>(spec.params);
      p.initial_hp = get_or(params, "initial_hp", p.initial_hp);
      p.hp_cap = get_or(params, "hp_cap", p.hp_cap);
      p.round_hp_loss = get_or(params, "round_hp_loss", p.round_hp_loss);
      p.initial_budget = get_or(params, "initial_budget", p.initial_budget);
      p.full_restore = get_or(params, "full_restore", p.full_restore);
      break;
    }
    case GameKind::undercover: {
      auto& p = std::get<UndercoverParams>(spec.params);
      p.num_undercover = get_or(params, "num_undercover", p.num_undercover);
      p.max_clue_rounds = get_or(params, "max_clue_rounds", p.max_clue_rounds);
      if (params && params["word_pairs"]) {
        p.word_pairs.clear();
        for (const auto& pair : params["word_pairs"]) {
          if (!pair.IsSequence() || pair.size() != 2)
            throw ConfigError("each word pair must be a two-element list");
          p.word_pairs.push_back({pair[0].as<std::string>(), pair[1].as<std::string>()});
        }
      }
      break;
    }
  }
  spec.validate();
  return spec;
}

GameSpec load_game_spec(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot read " + path.string() + ": " + e.what());
  }
  return parse_game_spec(root["game"] ? root["game"] : root);
}

}  // namespace som::game
