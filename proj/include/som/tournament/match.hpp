#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "som/agents/agent.hpp"
#include "som/store/model_store.hpp"
#include "som/tournament/config.hpp"
#include "som/tournament/episode.hpp"
#include "som/tournament/report.hpp"

namespace som::tournament {

/// Where an episode's logs belong, for file naming.
struct EpisodeKey {
  int matchup = 0;
  int run = 0;
  std::string stage;
  int episode = 0;
  /// "m<matchup>-r<run>-<stage>-e<episode>", zero padded.
  std::string stem() const;
};

/// Final learned state of one SOM seat after a (matchup, run).
struct FinalModel {
  int matchup = 0;
  int run = 0;
  std::string agent;
  store::ModelArchive archive;
};

struct MatchOptions {
  /// Called once per finished episode, in deterministic order.
  std::function<void(const EpisodeKey&, const EpisodeResult&)> on_episode;
  /// Starting models for SOM agents by name, overriding config paths.
  std::map<std::string, store::ModelArchive> initial_models;
  /// Replaces the backend of every agent that uses one.
  std::string backend_override;
  /// Agents frozen from the first warm-up episode on.
  std::set<std::string> frozen_agents;
};

struct MatchOutcome {
  MatchReport report;
  std::vector<FinalModel> models;
  /// Freeze contract breaches and other invariant failures seen while
  /// running.
  std::vector<std::string> violations;
  /// Invalid episodes caused by backend errors.
  int backend_failures = 0;
};

/// Warm-up episodes learn; evaluation episodes each start from a copy of
/// the post-warm-up agents (frozen when configured), so results do not
/// depend on parallelism.
MatchOutcome run_match(const MatchConfig& config, const agents::BackendRegistry& backends,
                       const MatchOptions& options = {});

}  // namespace som::tournament
