#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "som/agents/factory.hpp"
#include "som/game/types.hpp"
#include "som/store/model_store.hpp"

namespace som::tournament {

struct BackendConfig {
  std::string name;
  std::string kind;  // scripted | http
  std::filesystem::path rules;  // scripted
  std::string base_url;         // http; SOM_API_BASE when empty
  std::string model;            // http; SOM_MODEL when empty
  std::string api_key_env = "SOM_API_KEY";
  int timeout_ms = 60000;
  int max_attempts = 3;
};

struct MatchSettings {
  int warmup = 5;
  int eval = 10;
  int runs = 1;
  std::vector<std::uint64_t> seeds;  // one per run
  bool freeze_eval = true;
  int parallelism = 1;
};

/// Seat 0 is the evaluated agent; the other seats are its opponents.
struct Matchup {
  std::vector<std::string> seats;
};

struct MatchConfig {
  game::GameSpec game;
  std::vector<BackendConfig> backends;
  std::vector<agents::AgentConfig> agents;
  std::map<std::string, std::filesystem::path> models;  // som agent -> archive to start from
  std::vector<Matchup> matchups;
  MatchSettings match;

  const agents::AgentConfig& agent(const std::string& name) const;
  /// Throws game::ConfigError on any inconsistency.
  void validate() const;
};

/// Reads a match file. Relative paths resolve against `base_dir`.
MatchConfig parse_match_config(const std::string& yaml_text, const std::filesystem::path& base_dir);
MatchConfig load_match_config(const std::filesystem::path& path);

/// Builds every configured backend. Throws backend::PreconditionError for
/// unusable http settings and RulesError for bad rule files.
agents::BackendRegistry make_backends(const MatchConfig& config);

/// Seeds for each run: explicit seeds, else derived from the game seed.
std::vector<std::uint64_t> run_seeds(const MatchConfig& config);

}  // namespace som::tournament
