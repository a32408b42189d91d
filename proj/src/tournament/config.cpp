#include "som/tournament/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "som/backend/http.hpp"
#include "som/backend/scripted.hpp"
#include "som/common/rng.hpp"
#include "som/game/config.hpp"

namespace som::tournament {

using game::ConfigError;

namespace {

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (node && node[key]) out = node[key].as<T>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

BackendConfig parse_backend(const YAML::Node& n, const std::filesystem::path& base) {
  if (!n.IsMap()) throw ConfigError("backend entry must be a map");
  // Secrets stay in the environment so config snapshots never carry them.
  for (const char* key : {"api_key", "key", "token"}) {
    if (n[key]) throw ConfigError(std::string("backend key '") + key + "' is not allowed; use api_key_env");
  }
  BackendConfig b;
  read(n, "name", b.name);
  read(n, "kind", b.kind);
  if (n["rules"]) b.rules = resolve(base, n["rules"].as<std::string>());
  read(n, "base_url", b.base_url);
  read(n, "model", b.model);
  read(n, "api_key_env", b.api_key_env);
  read(n, "timeout_ms", b.timeout_ms);
  read(n, "max_attempts", b.max_attempts);
  return b;
}

std::vector<Matchup> parse_matchups(const YAML::Node& root, int players) {
  std::vector<Matchup> out;
  if (const auto list = root["matchups"]) {
    if (!list.IsSequence()) throw ConfigError("matchups must be a list");
    for (const auto& m : list) {
      if (!m.IsSequence()) throw ConfigError("each matchup must list one agent per seat");
      out.push_back({m.as<std::vector<std::string>>()});
    }
  }
  // A grid seats each evaluated agent against each opponent in all other seats.
  if (const auto grid = root["grid"]) {
    if (!grid["evaluated"] || !grid["opponents"]) throw ConfigError("grid needs evaluated and opponents");
    for (const auto& e : grid["evaluated"].as<std::vector<std::string>>()) {
      for (const auto& o : grid["opponents"].as<std::vector<std::string>>()) {
        Matchup m{{e}};
        for (int i = 1; i < players; ++i) m.seats.push_back(o);
        out.push_back(std::move(m));
      }
    }
  }
  return out;
}

}  // namespace

const agents::AgentConfig& MatchConfig::agent(const std::string& name) const {
  for (const auto& a : agents) {
    if (a.name == name) return a;
  }
  throw ConfigError("unknown agent '" + name + "'");
}

void MatchConfig::validate() const {
  game.validate();
  std::set<std::string> backend_names;
  for (const auto& b : backends) {
    if (b.name.empty()) throw ConfigError("backend needs a name");
    if (!backend_names.insert(b.name).second) throw ConfigError("duplicate backend '" + b.name + "'");
    if (b.kind == "scripted") {
      if (b.rules.empty()) throw ConfigError("scripted backend '" + b.name + "' needs rules");
    } else if (b.kind == "http") {
      if (b.api_key_env.empty()) throw ConfigError("http backend '" + b.name + "' needs api_key_env");
      if (b.timeout_ms <= 0 || b.max_attempts < 1) throw ConfigError("http backend '" + b.name + "' has bad limits");
    } else {
      throw ConfigError("backend '" + b.name + "' has unknown kind '" + b.kind + "'");
    }
  }
  std::set<std::string> agent_names;
  for (const auto& a : agents) {
    a.validate();
    if (!agent_names.insert(a.name).second) throw ConfigError("duplicate agent '" + a.name + "'");
    if (!a.backend.empty() && !backend_names.count(a.backend))
      throw ConfigError("agent '" + a.name + "' uses unknown backend '" + a.backend + "'");
  }
  for (const auto& [name, path] : models) {
    if (agent(name).kind != "som") throw ConfigError("model given for non-som agent '" + name + "'");
  }
  if (matchups.empty()) throw ConfigError("no matchups configured");
  for (const auto& m : matchups) {
    if (static_cast<int>(m.seats.size()) != game.num_players)
      throw ConfigError("matchup seat count differs from the number of players");
    for (const auto& s : m.seats) agent(s);
  }
  if (match.warmup < 0 || match.eval < 0) throw ConfigError("episode counts must be non-negative");
  if (match.runs < 1) throw ConfigError("runs must be at least 1");
  if (!match.seeds.empty() && static_cast<int>(match.seeds.size()) != match.runs)
    throw ConfigError("seeds must list one seed per run");
  if (match.parallelism < 1) throw ConfigError("parallelism must be at least 1");
}

MatchConfig parse_match_config(const std::string& yaml_text, const std::filesystem::path& base_dir) {
  MatchConfig c;
  try {
    const YAML::Node root = YAML::Load(yaml_text);
    if (!root.IsMap()) throw ConfigError("match config must be a map");
    c.game = game::parse_game_spec(root["game"]);
    if (const auto list = root["backends"]) {
      for (const auto& b : list) c.backends.push_back(parse_backend(b, base_dir));
    }
    if (const auto list = root["agents"]) {
      for (const auto& a : list) {
        c.agents.push_back(agents::parse_agent_config(a));
        if (a["model"]) c.models[c.agents.back().name] = resolve(base_dir, a["model"].as<std::string>());
      }
    }
    c.matchups = parse_matchups(root, c.game.num_players);
    if (const auto m = root["match"]) {
      read(m, "warmup", c.match.warmup);
      read(m, "eval", c.match.eval);
      read(m, "runs", c.match.runs);
      read(m, "seeds", c.match.seeds);
      // A single base seed from which per-run seeds are derived.
      if (m["seed"]) c.game.seed = m["seed"].as<std::uint64_t>();
      read(m, "freeze_eval", c.match.freeze_eval);
      read(m, "parallelism", c.match.parallelism);
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("bad match config: ") + e.what());
  }
  c.validate();
  return c;
}

MatchConfig load_match_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_match_config(ss.str(), path.parent_path());
}

agents::BackendRegistry make_backends(const MatchConfig& config) {
  agents::BackendRegistry out;
  for (const auto& b : config.backends) {
    if (b.kind == "scripted") {
      out[b.name] = std::make_shared<backend::ScriptedReasoner>(backend::ScriptedRuleSet::load(b.rules), b.name);
      continue;
    }
    backend::HttpConfig h;
    h.base_url = b.base_url;
    h.model = b.model;
    h.api_key_env = b.api_key_env;
    h.timeout = std::chrono::milliseconds(b.timeout_ms);
    h.max_attempts = b.max_attempts;
    h = backend::HttpConfig::from_environment(h);
    if (h.base_url.empty() || h.model.empty())
      throw backend::PreconditionError("http backend '" + b.name + "' needs a base url and model (SOM_API_BASE, SOM_MODEL)");
    out[b.name] = std::make_shared<backend::HttpReasoner>(h);
  }
  return out;
}

std::vector<std::uint64_t> run_seeds(const MatchConfig& config) {
  if (!config.match.seeds.empty()) return config.match.seeds;
  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < config.match.runs; ++r) seeds.push_back(derive_seed(config.game.seed, static_cast<std::uint64_t>(r)));
  return seeds;
}

}  // namespace som::tournament
