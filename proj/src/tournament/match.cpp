#include "som/tournament/match.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <optional>
#include <thread>

#include "som/agents/som_agent.hpp"
#include "som/common/rng.hpp"
#include "som/common/text.hpp"

namespace som::tournament {

namespace {

constexpr std::uint64_t kEvalSalt = 1'000'000;
constexpr std::size_t kContextEpisodes = 5;

double action_range(const game::GameSpec& spec) {
  switch (spec.kind) {
    case game::GameKind::g08a: return static_cast<double>(spec.g08a().action_max - spec.g08a().action_min);
    case game::GameKind::sag: return static_cast<double>(spec.sag().initial_budget);
    case game::GameKind::undercover: return 0;
  }
  return 0;
}

/// Distinct ids for repeated agents in one matchup: "a", "a#2", ...
std::vector<std::string> roster_of(const Matchup& m) {
  std::vector<std::string> roster;
  std::map<std::string, int> seen;
  for (const auto& s : m.seats) {
    const int n = ++seen[s];
    roster.push_back(n == 1 ? s : s + "#" + std::to_string(n));
  }
  return roster;
}

const agents::SomAgent* as_som(const agents::Agent* a) { return dynamic_cast<const agents::SomAgent*>(a); }

std::string model_bytes(const agents::OpponentModel& m) { return store::save_model({m, {}}); }

std::string context_digest(const std::vector<std::vector<std::string>>& histories) {
  const std::size_t from = histories.size() > kContextEpisodes ? histories.size() - kContextEpisodes : 0;
  std::vector<std::string> parts;
  for (std::size_t i = from; i < histories.size(); ++i) {
    parts.push_back("Episode " + std::to_string(i + 1) + ":\n" + join(histories[i], "\n"));
  }
  return join(parts, "\n");
}

std::vector<agents::Agent*> pointers(const std::vector<std::unique_ptr<agents::Agent>>& seats) {
  std::vector<agents::Agent*> out;
  for (const auto& a : seats) out.push_back(a.get());
  return out;
}

std::vector<std::unique_ptr<agents::Agent>> clone_all(const std::vector<std::unique_ptr<agents::Agent>>& seats) {
  std::vector<std::unique_ptr<agents::Agent>> out;
  for (const auto& a : seats) out.push_back(a->clone());
  return out;
}

}  // namespace

std::string EpisodeKey::stem() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "m%03d-r%02d-%s-e%04d", matchup, run, stage.c_str(), episode);
  return buf;
}

MatchOutcome run_match(const MatchConfig& config, const agents::BackendRegistry& backends, const MatchOptions& options) {
  config.validate();
  if (!options.backend_override.empty() && !backends.count(options.backend_override))
    throw game::ConfigError("unknown backend '" + options.backend_override + "'");

  std::map<std::string, store::ModelArchive> initial = options.initial_models;
  for (const auto& [name, path] : config.models) {
    if (!initial.count(name)) initial.emplace(name, store::read_archive(path));
  }
  for (const auto& [name, archive] : initial) {
    if (archive.model.game != config.game.kind)
      throw store::ArchiveError("game", "model for '" + name + "' was built for another game");
  }

  MatchOutcome outcome;
  auto& report = outcome.report;
  report.game = std::string(game::to_string(config.game.kind));
  report.horizon = config.game.horizon;
  report.action_range = action_range(config.game);
  const auto seeds = run_seeds(config);

  for (std::size_t m = 0; m < config.matchups.size(); ++m) {
    const auto& matchup = config.matchups[m];
    const auto roster = roster_of(matchup);
    MatchupReport mu;
    mu.seats = matchup.seats;

    for (int r = 0; r < config.match.runs; ++r) {
      const std::uint64_t run_seed = seeds[static_cast<std::size_t>(r)];
      RunAggregate aggregate;
      aggregate.run = r;
      aggregate.seed = run_seed;
      mu.runs.push_back(aggregate);

      std::vector<std::unique_ptr<agents::Agent>> seats;
      std::vector<std::string> seat_backends;
      for (const auto& name : matchup.seats) {
        auto cfg = config.agent(name);
        if (!options.backend_override.empty() && !cfg.backend.empty()) cfg.backend = options.backend_override;
        auto agent = agents::make_agent(cfg, backends, run_seed);
        if (auto it = initial.find(name); it != initial.end()) {
          if (auto* som = dynamic_cast<agents::SomAgent*>(agent.get())) som->set_model(it->second.model);
        }
        if (options.frozen_agents.count(name)) agent->set_frozen(true);
        seats.push_back(std::move(agent));
        seat_backends.push_back(cfg.backend);
      }

      auto record = [&](const std::string& stage, int index, EpisodeResult result) {
        result.record.matchup = static_cast<int>(m);
        result.record.run = r;
        result.record.stage = stage;
        result.record.episode = index;
        if (result.backend_failure) ++outcome.backend_failures;
        if (options.on_episode) options.on_episode({static_cast<int>(m), r, stage, index}, result);
        report.episodes.push_back(std::move(result.record));
      };

      std::vector<std::vector<std::string>> histories;
      for (int e = 0; e < config.match.warmup; ++e) {
        auto result = run_episode(config.game, pointers(seats), roster,
                                  derive_seed(run_seed, static_cast<std::uint64_t>(e)), e);
        if (result.record.valid) histories.push_back(result.history);
        record("warmup", e, std::move(result));
      }

      const auto digest = context_digest(histories);
      for (auto& a : seats) {
        a->set_context(digest);
        if (config.match.freeze_eval) a->set_frozen(true);
      }

      std::map<std::size_t, std::string> frozen_bytes;
      for (std::size_t i = 0; i < seats.size(); ++i) {
        if (const auto* som = as_som(seats[i].get())) frozen_bytes[i] = model_bytes(som->model());
      }

      const int n_eval = config.match.eval;
      auto eval_seed = [&](int e) { return derive_seed(run_seed, kEvalSalt + static_cast<std::uint64_t>(e)); };
      if (config.match.freeze_eval) {
        // Each evaluation episode plays copies of the frozen agents, so the
        // outcome of one episode never depends on another.
        std::vector<std::optional<EpisodeResult>> results(static_cast<std::size_t>(n_eval));
        std::vector<std::vector<std::unique_ptr<agents::Agent>>> used(static_cast<std::size_t>(n_eval));
        std::atomic<int> next{0};
        auto worker = [&] {
          for (int e = next++; e < n_eval; e = next++) {
            auto copies = clone_all(seats);
            results[static_cast<std::size_t>(e)] =
                run_episode(config.game, pointers(copies), roster, eval_seed(e), config.match.warmup + e);
            used[static_cast<std::size_t>(e)] = std::move(copies);
          }
        };
        const int threads = std::min(config.match.parallelism, std::max(n_eval, 1));
        if (threads <= 1) {
          worker();
        } else {
          std::vector<std::thread> pool;
          for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
          for (auto& t : pool) t.join();
        }
        for (int e = 0; e < n_eval; ++e) {
          const auto& copies = used[static_cast<std::size_t>(e)];
          for (const auto& [i, bytes] : frozen_bytes) {
            if (model_bytes(as_som(copies[i].get())->model()) != bytes) {
              outcome.violations.push_back("freeze breached by " + roster[i] + " in matchup " + std::to_string(m) +
                                           " run " + std::to_string(r) + " eval " + std::to_string(e));
            }
          }
          record("eval", e, std::move(*results[static_cast<std::size_t>(e)]));
        }
      } else {
        for (int e = 0; e < n_eval; ++e) {
          record("eval", e, run_episode(config.game, pointers(seats), roster, eval_seed(e), config.match.warmup + e));
        }
      }
      for (const auto& [i, bytes] : frozen_bytes) {
        if (config.match.freeze_eval && model_bytes(as_som(seats[i].get())->model()) != bytes)
          outcome.violations.push_back("freeze breached by " + roster[i]);
      }

      for (std::size_t i = 0; i < seats.size(); ++i) {
        const auto* som = as_som(seats[i].get());
        if (!som) continue;
        FinalModel fm{static_cast<int>(m), r, roster[i], {som->model(), {}}};
        auto it = initial.find(matchup.seats[i]);
        if (it != initial.end() && it->second.model == som->model()) {
          fm.archive.provenance = it->second.provenance;
        } else {
          fm.archive.provenance = {roster[i], seat_backends[i], report.game, store::creation_timestamp()};
        }
        outcome.models.push_back(std::move(fm));
      }
    }
    report.matchups.push_back(std::move(mu));
  }

  recompute_aggregates(report);
  return outcome;
}

}  // namespace som::tournament
