#include "som/agents/factory.hpp"

#include <set>

#include "som/agents/scripted_agents.hpp"
#include "som/common/rng.hpp"
#include "som/game/types.hpp"

namespace som::agents {

using game::ConfigError;

namespace {

const std::set<std::string> kKinds{"som", "llm-only", "cot", "tot", "k-r", "reflexion", "mixed", "scripted"};

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (node[key]) out = node[key].as<T>();
}

SomParams parse_som(const YAML::Node& n) {
  SomParams p;
  if (!n) return p;
  if (n["ablation"]) {
    const auto name = n["ablation"].as<std::string>();
    auto a = parse_ablation(name);
    if (!a) throw ConfigError("unknown ablation '" + name + "'");
    p = apply_ablation(p, *a);
  }
  read(n, "top_k", p.top_k);
  read(n, "top_m", p.top_m);
  if (n["match_tolerance"]) {
    if (n["match_tolerance"].IsNull() || n["match_tolerance"].as<std::string>() == "exact") p.match_tolerance.reset();
    else p.match_tolerance = n["match_tolerance"].as<double>();
  }
  if (n["pool_capacity"]) {
    if (n["pool_capacity"].IsNull() || n["pool_capacity"].as<std::string>() == "unbounded") p.pool_capacity.reset();
    else p.pool_capacity = n["pool_capacity"].as<std::size_t>();
  }
  read(n, "match_threshold", p.match_threshold);
  read(n, "judge_matching", p.judge_matching);
  read(n, "enable_graph", p.enable_graph);
  read(n, "enable_intermediates", p.enable_intermediates);
  read(n, "enable_refine", p.enable_refine);
  read(n, "enable_examples", p.enable_examples);
  return p;
}

}  // namespace

void AgentConfig::validate() const {
  if (name.empty()) throw ConfigError("agent needs a name");
  if (!kKinds.count(kind)) throw ConfigError("agent '" + name + "' has unknown kind '" + kind + "'");
  if (som.has_value() != (kind == "som")) throw ConfigError("agent '" + name + "': som parameters are only for kind som");
  if (kind == "scripted") {
    if (!is_known_rule(rule)) throw ConfigError("agent '" + name + "' has unknown rule '" + rule + "'");
    return;
  }
  if (baseline.k_depth < 0) throw ConfigError("agent '" + name + "': k must be non-negative");
  if (baseline.tot_breadth < 1) throw ConfigError("agent '" + name + "': tot breadth must be positive");
  if (som) {
    if (som->top_m == 0) throw ConfigError("agent '" + name + "': top_m must be positive");
    if (som->match_tolerance && *som->match_tolerance < 0) throw ConfigError("agent '" + name + "': negative tolerance");
    if (som->match_threshold < 0 || som->match_threshold > 1) throw ConfigError("agent '" + name + "': threshold outside [0,1]");
  }
  const bool analytic_kr = kind == "k-r" && baseline.analytic;
  if (!analytic_kr && backend.empty()) throw ConfigError("agent '" + name + "' needs a backend");
}

AgentConfig parse_agent_config(const YAML::Node& node) {
  if (!node.IsMap()) throw ConfigError("agent entry must be a map");
  AgentConfig c;
  try {
    read(node, "name", c.name);
    read(node, "kind", c.kind);
    read(node, "backend", c.backend);
    read(node, "rule", c.rule);
    read(node, "seed", c.seed);
    read(node, "k", c.baseline.k_depth);
    read(node, "analytic", c.baseline.analytic);
    read(node, "tot_breadth", c.baseline.tot_breadth);
    read(node, "reflexion_memory", c.baseline.reflexion_memory);
    if (c.kind == "som") c.som = parse_som(node["som"]);
    else if (node["som"]) throw ConfigError("agent '" + c.name + "': som parameters are only for kind som");
  } catch (const YAML::Exception& e) {
    throw ConfigError("agent '" + c.name + "': " + e.what());
  }
  c.validate();
  return c;
}

std::unique_ptr<Agent> make_agent(const AgentConfig& config, const BackendRegistry& backends, std::uint64_t run_seed) {
  config.validate();
  std::shared_ptr<const backend::Reasoner> backend;
  if (!config.backend.empty()) {
    auto it = backends.find(config.backend);
    if (it == backends.end()) throw ConfigError("agent '" + config.name + "' uses unknown backend '" + config.backend + "'");
    backend = it->second;
  }
  if (config.kind == "som") return std::make_unique<SomAgent>(backend, *config.som);
  if (config.kind == "scripted") return std::make_unique<ScriptedAgent>(config.rule);
  if (config.kind == "mixed") return std::make_unique<MixedAgent>(backend, config.baseline, derive_seed(run_seed, config.seed));
  return std::make_unique<BaselineAgent>(config.kind, backend, config.baseline);
}

}  // namespace som::agents
