#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "som/game/types.hpp"

namespace som::tournament {

struct PredictionPair {
  int round = 0;
  int predictor = 0;
  int target = 0;
  std::string predicted;
  std::string actual;
  bool operator==(const PredictionPair&) const = default;
};

struct EpisodeRecord {
  int matchup = 0;
  int run = 0;
  std::string stage;  // "warmup" or "eval"
  int episode = 0;
  std::uint64_t seed = 0;
  bool valid = true;
  std::string invalid_reason;
  int rounds_played = 0;
  std::vector<double> win_share;
  std::vector<int> survival_rounds;
  std::vector<double> total_reward;
  std::vector<PredictionPair> predictions;
  bool operator==(const EpisodeRecord&) const = default;
};

/// 100 * mean |predicted - actual| / range over numeric pairs; absent when
/// no pair is numeric. range must be positive.
std::optional<double> prediction_deviation(const std::vector<PredictionPair>& pairs, double range);
std::optional<double> prediction_deviation(const std::vector<std::pair<double, double>>& pairs, double range);

struct Stat {
  std::optional<double> mean;
  std::optional<double> std;  // sample standard deviation; 0 for one value
  bool operator==(const Stat&) const = default;
};

Stat summarize(const std::vector<double>& values);

struct RunAggregate {
  int run = 0;
  std::uint64_t seed = 0;
  int valid_episodes = 0;
  int invalid_episodes = 0;
  std::optional<double> win_rate;
  std::optional<double> survival;
  std::optional<double> deviation;
  bool operator==(const RunAggregate&) const = default;
};

struct MatchupReport {
  std::vector<std::string> seats;
  std::vector<RunAggregate> runs;
  Stat win_rate;
  Stat survival;
  Stat deviation;
  bool operator==(const MatchupReport&) const = default;

  const std::string& evaluated() const { return seats.front(); }
  /// Opponent column label: distinct opponent names joined with '+'.
  std::string opponents() const;
};

struct MatchReport {
  std::string game;
  int horizon = 0;
  double action_range = 0;  // 0 when deviation is undefined for the game
  std::vector<MatchupReport> matchups;
  std::vector<EpisodeRecord> episodes;
  bool operator==(const MatchReport&) const = default;
};

/// Rebuilds every aggregate from `episodes` (evaluation stage, valid only).
void recompute_aggregates(MatchReport& report);

/// Per-episode deviation of seat 0 for one (matchup, run): warm-up
/// episodes first, then evaluation episodes.
std::vector<std::optional<double>> deviation_series(const MatchReport& report, int matchup, int run);

/// Invariant violations: win rates outside [0,1], per-episode win shares
/// summing above 1, survival above the horizon, aggregates that do not
/// recompute. Empty when the report is sound.
std::vector<std::string> check_report(const MatchReport& report);

nlohmann::json report_to_json(const MatchReport& report);
MatchReport report_from_json(const nlohmann::json& j);

/// Evaluated x opponent matrices with row averages, then per-matchup lines.
std::string render_report_text(const MatchReport& report);
/// Machine-readable form; canonical key order, two-space indent.
std::string render_report_json(const MatchReport& report);

}  // namespace som::tournament
