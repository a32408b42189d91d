#include "som/cli/commands.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include "som/backend/scripted.hpp"
#include "som/store/model_store.hpp"
#include "som/tournament/config.hpp"
#include "som/tournament/match.hpp"

namespace som::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using tournament::MatchConfig;

namespace {

/// File-name-safe form of an agent id; never contains a path separator.
std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out.empty() ? "_" : out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw game::ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes below `out` only; `rel` is built from sanitized parts.
void write_file(const fs::path& out, const fs::path& rel, const std::string& text) {
  const fs::path path = out / rel;
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

void require_out(const CliInvocation& inv) {
  if (inv.out.empty()) throw game::ConfigError("--out is required");
}

void apply_ablation(MatchConfig& config, agents::Ablation a) {
  for (auto& agent : config.agents) {
    if (agent.som) agent.som = agents::apply_ablation(*agent.som, a);
  }
}

MatchConfig load_config(const CliInvocation& inv) {
  if (inv.config.empty()) throw game::ConfigError("--config is required");
  MatchConfig config = tournament::load_match_config(inv.config);
  if (inv.seed) {
    config.game.seed = *inv.seed;
    config.match.seeds.clear();
  }
  if (inv.parallelism) config.match.parallelism = *inv.parallelism;
  if (inv.freeze_eval) config.match.freeze_eval = *inv.freeze_eval;
  if (!inv.ablation.empty() && inv.ablation != "all") {
    auto a = agents::parse_ablation(inv.ablation);
    if (!a) throw game::ConfigError("unknown ablation '" + inv.ablation + "'");
    apply_ablation(config, *a);
  }
  config.validate();
  return config;
}

json invocation_json(const CliInvocation& inv) {
  json j{{"subcommand", inv.subcommand}, {"config", inv.config.filename().string()}};
  j["seed"] = inv.seed ? json(*inv.seed) : json(nullptr);
  j["backend"] = inv.backend;
  j["parallelism"] = inv.parallelism ? json(*inv.parallelism) : json(nullptr);
  j["freeze_eval"] = inv.freeze_eval ? json(*inv.freeze_eval) : json(nullptr);
  j["ablation"] = inv.ablation;
  j["agent"] = inv.agent;
  j["archive"] = inv.archive.filename().string();
  return j;
}

struct RunResult {
  tournament::MatchOutcome outcome;
  int code = kOk;
};

/// Runs one match and writes its report, logs and final models below `out`.
RunResult execute(const MatchConfig& config, const CliInvocation& inv, const fs::path& out,
                  tournament::MatchOptions options) {
  const auto backends = tournament::make_backends(config);
  options.backend_override = inv.backend;
  options.on_episode = [&](const tournament::EpisodeKey& key, const tournament::EpisodeResult& r) {
    const auto& seats = config.matchups[static_cast<std::size_t>(key.matchup)].seats;
    std::string lines;
    json head{{"type", "episode"}, {"matchup", key.matchup}, {"run", key.run}, {"stage", key.stage},
              {"episode", key.episode}, {"seed", r.record.seed}, {"seats", seats},
              {"valid", r.record.valid}, {"invalid_reason", r.record.invalid_reason}};
    lines += head.dump() + "\n";
    for (const auto& round : r.round_log) {
      json line = round;
      line["type"] = "round";
      lines += line.dump() + "\n";
    }
    for (std::size_t s = 0; s < r.agent_events.size(); ++s) {
      for (const auto& e : r.agent_events[s]) {
        json line{{"type", "agent-event"}, {"seat", s}, {"agent", seats.at(s)}, {"event", e}};
        lines += line.dump() + "\n";
      }
    }
    write_file(out, fs::path("logs") / (key.stem() + ".jsonl"), lines);
  };

  RunResult result;
  result.outcome = tournament::run_match(config, backends, options);
  const auto& report = result.outcome.report;
  write_file(out, "report.txt", tournament::render_report_text(report));
  write_file(out, "report.json", tournament::render_report_json(report));
  for (const auto& m : result.outcome.models) {
    char stem[64];
    std::snprintf(stem, sizeof stem, "m%03d-r%02d-", m.matchup, m.run);
    write_file(out, fs::path("models") / (stem + safe_name(m.agent) + std::string(store::kExtension)),
               store::save_model(m.archive, {inv.include_graph, inv.include_pools}));
  }

  auto violations = tournament::check_report(report);
  for (const auto& v : result.outcome.violations) violations.push_back(v);
  for (const auto& v : violations) spdlog::error("invariant violated: {}", v);
  if (result.outcome.backend_failures > 0) {
    spdlog::error("{} episode(s) aborted by backend errors", result.outcome.backend_failures);
  }
  if (!violations.empty()) result.code = kInvariantViolation;
  else if (result.outcome.backend_failures > 0) result.code = kBackendFailure;
  return result;
}

void snapshot(const CliInvocation& inv, const fs::path& out) {
  write_file(out, "config.yaml", read_file(inv.config));
  write_file(out, "invocation.json", invocation_json(inv).dump(2) + "\n");
}

/// Mean over matchups evaluating a SOM agent, per run, then across runs.
json ablation_row(const MatchConfig& config, const tournament::MatchReport& report) {
  std::map<int, std::vector<double>> dev, win;
  for (const auto& mu : report.matchups) {
    if (config.agent(mu.evaluated()).kind != "som") continue;
    for (const auto& r : mu.runs) {
      if (r.deviation) dev[r.run].push_back(*r.deviation);
      if (r.win_rate) win[r.run].push_back(*r.win_rate);
    }
  }
  auto across = [](const std::map<int, std::vector<double>>& per_run) {
    std::vector<double> means;
    for (const auto& [run, v] : per_run) {
      double s = 0;
      for (double x : v) s += x;
      means.push_back(s / static_cast<double>(v.size()));
    }
    return tournament::summarize(means);
  };
  auto stat = [](const tournament::Stat& s) {
    return json{{"mean", s.mean ? json(*s.mean) : json(nullptr)}, {"std", s.std ? json(*s.std) : json(nullptr)}};
  };
  return {{"deviation", stat(across(dev))}, {"win_rate", stat(across(win))}};
}

std::string render_ablation(const json& rows) {
  auto cell = [](const json& s) -> std::string {
    if (s.at("mean").is_null()) return "-";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f ± %.2f", s.at("mean").get<double>(), s.at("std").get<double>());
    return buf;
  };
  std::vector<std::array<std::string, 3>> table{{"variant", "prediction deviation (%)", "win rate"}};
  for (const auto& r : rows) table.push_back({r.at("variant").get<std::string>(), cell(r.at("deviation")), cell(r.at("win_rate"))});
  std::array<std::size_t, 3> w{};
  auto width = [](const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
  };
  for (const auto& row : table) {
    for (std::size_t i = 0; i < 3; ++i) w[i] = std::max(w[i], width(row[i]));
  }
  std::string out;
  for (const auto& row : table) {
    std::string line;
    for (std::size_t i = 0; i < 3; ++i) {
      if (i) line += " | ";
      line += row[i] + std::string(w[i] - width(row[i]), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

int run_ablation(const CliInvocation& inv) {
  const MatchConfig base = load_config(inv);
  snapshot(inv, inv.out);
  json rows = json::array();
  int code = kOk;
  for (auto a : agents::all_ablations()) {
    MatchConfig config = base;
    apply_ablation(config, a);
    const std::string name(agents::to_string(a));
    auto r = execute(config, inv, inv.out / "ablation" / name, {});
    code = std::max(code, r.code);
    json row = ablation_row(config, r.outcome.report);
    row["variant"] = name;
    rows.push_back(row);
  }
  write_file(inv.out, "ablation.txt", render_ablation(rows));
  write_file(inv.out, "ablation.json", json{{"variants", rows}}.dump(2) + "\n");
  return code;
}

const tournament::FinalModel* final_model_of(const tournament::MatchOutcome& outcome, const std::string& agent) {
  for (const auto& m : outcome.models) {
    if (m.agent == agent) return &m;
  }
  return nullptr;
}

void require_som_agent(const MatchConfig& config, const std::string& agent) {
  if (agent.empty()) throw game::ConfigError("--agent is required");
  if (config.agent(agent).kind != "som") throw game::ConfigError("agent '" + agent + "' is not a som agent");
  for (const auto& m : config.matchups) {
    for (const auto& s : m.seats) {
      if (s == agent) return;
    }
  }
  throw game::ConfigError("agent '" + agent + "' is not seated in any matchup");
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const game::ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kConfigError;
  } catch (const YAML::Exception& e) {
    spdlog::error("config error: {}", e.what());
    return kConfigError;
  } catch (const backend::RulesError& e) {
    spdlog::error("config error: {}", e.what());
    return kConfigError;
  } catch (const store::ArchiveError& e) {
    spdlog::error("archive rejected ({}): {}", e.invariant(), e.what());
    return kRejectedArchive;
  } catch (const backend::BackendError& e) {
    spdlog::error("backend failure: {}", e.what());
    return kBackendFailure;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  }
}

}  // namespace

int cmd_run(const CliInvocation& inv) {
  return guarded([&] {
    require_out(inv);
    if (inv.ablation == "all") return run_ablation(inv);
    const MatchConfig config = load_config(inv);
    snapshot(inv, inv.out);
    return execute(config, inv, inv.out, {}).code;
  });
}

int cmd_report(const CliInvocation& inv) {
  return guarded([&] {
    require_out(inv);
    json j;
    try {
      j = json::parse(read_file(inv.out / "report.json"));
    } catch (const json::exception& e) {
      throw game::ConfigError(std::string("report.json is malformed: ") + e.what());
    }
    tournament::MatchReport report;
    try {
      report = tournament::report_from_json(j);
    } catch (const json::exception& e) {
      throw game::ConfigError(std::string("report.json is malformed: ") + e.what());
    }
    const auto text = tournament::render_report_text(report);
    write_file(inv.out, "report.txt", text);
    std::cout << text;
    const auto violations = tournament::check_report(report);
    for (const auto& v : violations) spdlog::error("invariant violated: {}", v);
    return violations.empty() ? kOk : kInvariantViolation;
  });
}

int cmd_export_model(const CliInvocation& inv) {
  return guarded([&] {
    require_out(inv);
    const MatchConfig config = load_config(inv);
    require_som_agent(config, inv.agent);
    snapshot(inv, inv.out);
    auto r = execute(config, inv, inv.out, {});
    const auto* m = final_model_of(r.outcome, inv.agent);
    if (!m) throw game::ConfigError("no model was built for '" + inv.agent + "'");
    write_file(inv.out, safe_name(inv.agent) + std::string(store::kExtension),
               store::save_model(m->archive, {inv.include_graph, inv.include_pools}));
    return r.code;
  });
}

int cmd_import_model(const CliInvocation& inv) {
  return guarded([&] {
    require_out(inv);
    if (inv.archive.empty()) throw game::ConfigError("--archive is required");
    const MatchConfig config = load_config(inv);
    require_som_agent(config, inv.agent);
    const auto archive = store::read_archive(inv.archive);
    tournament::MatchOptions options;
    options.initial_models[inv.agent] = archive;
    const bool frozen = inv.freeze_eval.value_or(false);
    if (frozen) options.frozen_agents.insert(inv.agent);
    snapshot(inv, inv.out);
    auto r = execute(config, inv, inv.out, options);
    const auto* m = final_model_of(r.outcome, inv.agent);
    if (!m) throw game::ConfigError("no model was kept for '" + inv.agent + "'");
    write_file(inv.out, safe_name(inv.agent) + std::string(store::kExtension),
               store::save_model(m->archive, {inv.include_graph, inv.include_pools}));
    if (frozen && !(m->archive.model == archive.model)) {
      spdlog::error("frozen model for '{}' changed during the match", inv.agent);
      return static_cast<int>(kInvariantViolation);
    }
    return r.code;
  });
}

int cmd_validate_config(const CliInvocation& inv) {
  return guarded([&] {
    const MatchConfig config = load_config(inv);
    for (const auto& b : config.backends) {
      if (b.kind == "scripted") backend::ScriptedRuleSet::load(b.rules);
    }
    std::cout << "config ok: " << config.matchups.size() << " matchup(s), " << config.match.runs << " run(s)\n";
    return static_cast<int>(kOk);
  });
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Structured opponent modelling tournaments"};
  app.require_subcommand(1);
  CliInvocation inv;
  bool freeze = true;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
  bool no_graph = false, no_pools = false;

  std::vector<std::pair<CLI::App*, CLI::Option*>> freeze_opts;
  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", inv.config, "match config file");
    if (needs_config) c->required();
    sub->add_option("--out", inv.out, "output directory");
    sub->add_option("--seed", seed, "base seed for all runs");
    sub->add_option("--backend", inv.backend, "backend name replacing every agent's backend");
    sub->add_option("--parallelism", parallelism, "concurrent evaluation episodes")->check(CLI::PositiveNumber);
    freeze_opts.emplace_back(sub, sub->add_flag("--freeze-eval,!--no-freeze-eval", freeze, "freeze models in evaluation"));
    sub->add_option("--ablation", inv.ablation, "ablation preset, or 'all' for the five-variant study");
    sub->add_option("--log-level", inv.log_level, "trace|debug|info|warn|error|off");
  };
  auto* run = app.add_subcommand("run", "run a match");
  common(run, true);
  auto* report = app.add_subcommand("report", "re-render and check report.json in --out");
  report->add_option("--out", inv.out, "output directory")->required();
  report->add_option("--log-level", inv.log_level, "log level");
  auto* exp = app.add_subcommand("export-model", "run a match and export one som agent's model");
  common(exp, true);
  exp->add_option("--agent", inv.agent, "som agent name")->required();
  exp->add_flag("--no-graph", no_graph, "leave the causal graph out of the archive");
  exp->add_flag("--no-pools", no_pools, "leave the example pools out of the archive");
  auto* imp = app.add_subcommand("import-model", "run a match starting a som agent from an archive");
  common(imp, true);
  imp->add_option("--agent", inv.agent, "som agent name")->required();
  imp->add_option("--archive", inv.archive, "model archive")->required();
  auto* val = app.add_subcommand("validate-config", "check a match config");
  val->add_option("--config", inv.config, "match config file")->required();
  val->add_option("--log-level", inv.log_level, "log level");

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  inv.seed = seed;
  inv.parallelism = parallelism;
  inv.include_graph = !no_graph;
  inv.include_pools = !no_pools;
  for (const auto& [sub, opt] : freeze_opts) {
    if (sub->parsed() && opt->count() > 0) inv.freeze_eval = freeze;
  }
  static const auto logger = [] {
    auto l = spdlog::stderr_color_mt("som");
    spdlog::set_default_logger(l);
    return l;
  }();
  spdlog::set_level(spdlog::level::from_str(inv.log_level));

  inv.subcommand = app.get_subcommands().front()->get_name();
  if (run->parsed()) return cmd_run(inv);
  if (report->parsed()) return cmd_report(inv);
  if (exp->parsed()) return cmd_export_model(inv);
  if (imp->parsed()) return cmd_import_model(inv);
  return cmd_validate_config(inv);
}

}  // namespace som::cli
