#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include <yaml-cpp/yaml.h>

#include "som/agents/agent.hpp"
#include "som/agents/baselines.hpp"
#include "som/agents/som_agent.hpp"
#include "som/backend/reasoner.hpp"

namespace som::agents {

using BackendRegistry = std::map<std::string, std::shared_ptr<const backend::Reasoner>>;

struct AgentConfig {
  std::string name;
  std::string kind;  // som | llm-only | cot | tot | k-r | reflexion | mixed | scripted
  std::string backend;
  std::optional<SomParams> som;  // present iff kind == som
  BaselineParams baseline;
  std::string rule;  // scripted rule id
  std::uint64_t seed = 0;

  /// Throws game::ConfigError when the fields do not fit the kind.
  void validate() const;
};

/// Reads one agent entry. SOM keys: top_k, top_m, match_tolerance,
/// pool_capacity, match_threshold, judge_matching, ablation or the
/// individual enable_* flags.
AgentConfig parse_agent_config(const YAML::Node& node);

/// `run_seed` perturbs the seeds of stochastic agents so runs differ.
std::unique_ptr<Agent> make_agent(const AgentConfig& config, const BackendRegistry& backends,
                                  std::uint64_t run_seed = 0);

}  // namespace som::agents
