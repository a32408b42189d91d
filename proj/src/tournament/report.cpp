#include "som/tournament/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "som/common/text.hpp"

namespace som::tournament {

namespace {

constexpr double kEps = 1e-9;

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<PredictionPair> seat0_pairs(const EpisodeRecord& e) {
  std::vector<PredictionPair> out;
  for (const auto& p : e.predictions) {
    if (p.predictor == 0) out.push_back(p);
  }
  return out;
}

std::optional<double> episode_deviation(const EpisodeRecord& e, double range) {
  if (range <= 0) return std::nullopt;
  return prediction_deviation(seat0_pairs(e), range);
}

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> opt_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

nlohmann::json stat_json(const Stat& s) { return {{"mean", opt(s.mean)}, {"std", opt(s.std)}}; }

Stat stat_from(const nlohmann::json& j) { return {opt_from(j.at("mean")), opt_from(j.at("std"))}; }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  if (s == "-0.00" || s == "-0.0") s.erase(0, 1);
  return s;
}

std::string cell(const Stat& s, int digits) {
  if (!s.mean) return "-";
  return fixed(*s.mean, digits) + " ± " + fixed(s.std.value_or(0), digits);
}

// Display width: counts code points, which is enough for the ASCII plus
// '±' used here.
std::size_t width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

std::string pad(const std::string& s, std::size_t w) { return s + std::string(w - std::min(w, width(s)), ' '); }

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& r : rows) {
    widths.resize(std::max(widths.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) widths[i] = std::max(widths[i], width(r[i]));
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) line += " | ";
      line += pad(r[i], widths[i]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace

std::optional<double> prediction_deviation(const std::vector<std::pair<double, double>>& pairs, double range) {
  if (pairs.empty() || !(range > 0)) return std::nullopt;
  double total = 0;
  for (const auto& [p, a] : pairs) total += std::abs(p - a);
  return 100.0 * (total / static_cast<double>(pairs.size())) / range;
}

std::optional<double> prediction_deviation(const std::vector<PredictionPair>& pairs, double range) {
  std::vector<std::pair<double, double>> numeric;
  for (const auto& p : pairs) {
    auto a = parse_number(p.predicted);
    auto b = parse_number(p.actual);
    if (a && b) numeric.emplace_back(*a, *b);
  }
  return prediction_deviation(numeric, range);
}

Stat summarize(const std::vector<double>& values) {
  Stat s;
  s.mean = mean_of(values);
  if (!s.mean) return s;
  if (values.size() == 1) {
    s.std = 0.0;
    return s;
  }
  double ss = 0;
  for (double v : values) ss += (v - *s.mean) * (v - *s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return s;
}

std::string MatchupReport::opponents() const {
  std::vector<std::string> names;
  for (std::size_t i = 1; i < seats.size(); ++i) {
    if (std::find(names.begin(), names.end(), seats[i]) == names.end()) names.push_back(seats[i]);
  }
  return join(names, "+");
}

void recompute_aggregates(MatchReport& report) {
  for (std::size_t m = 0; m < report.matchups.size(); ++m) {
    auto& mu = report.matchups[m];
    std::vector<double> wins, survivals, deviations;
    for (auto& run : mu.runs) {
      std::vector<double> w, s;
      std::vector<PredictionPair> pairs;
      run.valid_episodes = 0;
      run.invalid_episodes = 0;
      for (const auto& e : report.episodes) {
        if (e.matchup != static_cast<int>(m) || e.run != run.run || e.stage != "eval") continue;
        if (!e.valid) {
          ++run.invalid_episodes;
          continue;
        }
        ++run.valid_episodes;
        w.push_back(e.win_share.empty() ? 0.0 : e.win_share.front());
        s.push_back(e.survival_rounds.empty() ? 0.0 : e.survival_rounds.front());
        for (auto& p : seat0_pairs(e)) pairs.push_back(std::move(p));
      }
      run.win_rate = mean_of(w);
      run.survival = mean_of(s);
      run.deviation = report.action_range > 0 ? prediction_deviation(pairs, report.action_range) : std::nullopt;
      if (run.win_rate) wins.push_back(*run.win_rate);
      if (run.survival) survivals.push_back(*run.survival);
      if (run.deviation) deviations.push_back(*run.deviation);
    }
    mu.win_rate = summarize(wins);
    mu.survival = summarize(survivals);
    mu.deviation = summarize(deviations);
  }
}

std::vector<std::optional<double>> deviation_series(const MatchReport& report, int matchup, int run) {
  std::vector<std::optional<double>> out;
  for (const char* stage : {"warmup", "eval"}) {
    for (const auto& e : report.episodes) {
      if (e.matchup == matchup && e.run == run && e.stage == stage && e.valid)
        out.push_back(episode_deviation(e, report.action_range));
    }
  }
  return out;
}

std::vector<std::string> check_report(const MatchReport& report) {
  std::vector<std::string> out;
  const bool single_winner = report.game != "undercover";
  for (const auto& e : report.episodes) {
    if (!e.valid) continue;
    const std::string where = "episode m" + std::to_string(e.matchup) + " r" + std::to_string(e.run) + " " +
                              e.stage + " " + std::to_string(e.episode);
    double total = 0;
    for (double w : e.win_share) {
      if (w < -kEps || w > 1 + kEps) out.push_back(where + ": win share outside [0,1]");
      total += w;
    }
    if (single_winner && total > 1 + kEps) out.push_back(where + ": win shares sum above 1");
    for (int s : e.survival_rounds) {
      if (s < 0 || s > report.horizon) out.push_back(where + ": survival outside [0, horizon]");
    }
    if (e.rounds_played > report.horizon) out.push_back(where + ": more rounds than the horizon");
  }
  for (const auto& mu : report.matchups) {
    for (const auto& r : mu.runs) {
      if (r.win_rate && (*r.win_rate < -kEps || *r.win_rate > 1 + kEps))
        out.push_back("matchup " + join(mu.seats, ",") + ": win rate outside [0,1]");
      if (r.survival && *r.survival > report.horizon + kEps)
        out.push_back("matchup " + join(mu.seats, ",") + ": survival above horizon");
    }
  }
  MatchReport again = report;
  recompute_aggregates(again);
  if (again.matchups != report.matchups) out.push_back("aggregates do not recompute from episode records");
  return out;
}

nlohmann::json report_to_json(const MatchReport& report) {
  nlohmann::json j;
  j["game"] = report.game;
  j["horizon"] = report.horizon;
  j["action_range"] = report.action_range;
  j["matchups"] = nlohmann::json::array();
  for (const auto& mu : report.matchups) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : mu.runs) {
      runs.push_back({{"run", r.run},
                      {"seed", r.seed},
                      {"valid_episodes", r.valid_episodes},
                      {"invalid_episodes", r.invalid_episodes},
                      {"win_rate", opt(r.win_rate)},
                      {"survival", opt(r.survival)},
                      {"deviation", opt(r.deviation)}});
    }
    j["matchups"].push_back({{"seats", mu.seats},
                             {"runs", runs},
                             {"win_rate", stat_json(mu.win_rate)},
                             {"survival", stat_json(mu.survival)},
                             {"deviation", stat_json(mu.deviation)}});
  }
  j["episodes"] = nlohmann::json::array();
  for (const auto& e : report.episodes) {
    nlohmann::json preds = nlohmann::json::array();
    for (const auto& p : e.predictions) {
      preds.push_back({{"round", p.round},
                       {"predictor", p.predictor},
                       {"target", p.target},
                       {"predicted", p.predicted},
                       {"actual", p.actual}});
    }
    j["episodes"].push_back({{"matchup", e.matchup},
                             {"run", e.run},
                             {"stage", e.stage},
                             {"episode", e.episode},
                             {"seed", e.seed},
                             {"valid", e.valid},
                             {"invalid_reason", e.invalid_reason},
                             {"rounds_played", e.rounds_played},
                             {"win_share", e.win_share},
                             {"survival_rounds", e.survival_rounds},
                             {"total_reward", e.total_reward},
                             {"predictions", preds}});
  }
  return j;
}

MatchReport report_from_json(const nlohmann::json& j) {
  MatchReport r;
  r.game = j.at("game").get<std::string>();
  r.horizon = j.at("horizon").get<int>();
  r.action_range = j.at("action_range").get<double>();
  for (const auto& m : j.at("matchups")) {
    MatchupReport mu;
    mu.seats = m.at("seats").get<std::vector<std::string>>();
    for (const auto& x : m.at("runs")) {
      RunAggregate a;
      a.run = x.at("run").get<int>();
      a.seed = x.at("seed").get<std::uint64_t>();
      a.valid_episodes = x.at("valid_episodes").get<int>();
      a.invalid_episodes = x.at("invalid_episodes").get<int>();
      a.win_rate = opt_from(x.at("win_rate"));
      a.survival = opt_from(x.at("survival"));
      a.deviation = opt_from(x.at("deviation"));
      mu.runs.push_back(a);
    }
    mu.win_rate = stat_from(m.at("win_rate"));
    mu.survival = stat_from(m.at("survival"));
    mu.deviation = stat_from(m.at("deviation"));
    r.matchups.push_back(std::move(mu));
  }
  for (const auto& x : j.at("episodes")) {
    EpisodeRecord e;
    e.matchup = x.at("matchup").get<int>();
    e.run = x.at("run").get<int>();
    e.stage = x.at("stage").get<std::string>();
    e.episode = x.at("episode").get<int>();
    e.seed = x.at("seed").get<std::uint64_t>();
    e.valid = x.at("valid").get<bool>();
    e.invalid_reason = x.at("invalid_reason").get<std::string>();
    e.rounds_played = x.at("rounds_played").get<int>();
    e.win_share = x.at("win_share").get<std::vector<double>>();
    e.survival_rounds = x.at("survival_rounds").get<std::vector<int>>();
    e.total_reward = x.at("total_reward").get<std::vector<double>>();
    for (const auto& p : x.at("predictions")) {
      e.predictions.push_back({p.at("round").get<int>(), p.at("predictor").get<int>(), p.at("target").get<int>(),
                               p.at("predicted").get<std::string>(), p.at("actual").get<std::string>()});
    }
    r.episodes.push_back(std::move(e));
  }
  return r;
}

std::string render_report_text(const MatchReport& report) {
  std::ostringstream out;
  out << "game: " << report.game << "  horizon: " << report.horizon << "\n";

  std::vector<std::string> rows, cols;
  for (const auto& mu : report.matchups) {
    if (std::find(rows.begin(), rows.end(), mu.evaluated()) == rows.end()) rows.push_back(mu.evaluated());
    const auto o = mu.opponents();
    if (std::find(cols.begin(), cols.end(), o) == cols.end()) cols.push_back(o);
  }
  auto find_cell = [&](const std::string& r, const std::string& c) -> const MatchupReport* {
    for (const auto& mu : report.matchups) {
      if (mu.evaluated() == r && mu.opponents() == c) return &mu;
    }
    return nullptr;
  };

  struct Metric {
    const char* title;
    Stat MatchupReport::*field;
    int digits;
  };
  const Metric metrics[] = {{"win rate", &MatchupReport::win_rate, 2},
                            {"survival rounds", &MatchupReport::survival, 2},
                            {"prediction deviation (%)", &MatchupReport::deviation, 2}};
  for (const auto& metric : metrics) {
    out << "\n" << metric.title << "\n";
    std::vector<std::vector<std::string>> table;
    std::vector<std::string> header{"evaluated \\ opponent"};
    for (const auto& c : cols) header.push_back(c);
    header.push_back("avg");
    table.push_back(header);
    for (const auto& r : rows) {
      std::vector<std::string> line{r};
      std::vector<double> means;
      for (const auto& c : cols) {
        const auto* mu = find_cell(r, c);
        if (!mu) {
          line.push_back("");
          continue;
        }
        const Stat& s = mu->*metric.field;
        line.push_back(cell(s, metric.digits));
        if (s.mean) means.push_back(*s.mean);
      }
      const auto avg = mean_of(means);
      line.push_back(avg ? fixed(*avg, metric.digits) : "-");
      table.push_back(line);
    }
    out << render_table(table);
  }

  out << "\nmatchups\n";
  std::vector<std::vector<std::string>> table{{"seats", "run", "seed", "valid", "invalid", "win", "survival", "deviation"}};
  for (const auto& mu : report.matchups) {
    for (const auto& r : mu.runs) {
      table.push_back({join(mu.seats, ","), std::to_string(r.run), std::to_string(r.seed),
                       std::to_string(r.valid_episodes), std::to_string(r.invalid_episodes),
                       r.win_rate ? fixed(*r.win_rate, 4) : "-", r.survival ? fixed(*r.survival, 4) : "-",
                       r.deviation ? fixed(*r.deviation, 4) : "-"});
    }
  }
  out << render_table(table);

  std::vector<std::vector<std::string>> invalid{{"invalid episode", "reason"}};
  for (const auto& e : report.episodes) {
    if (e.valid) continue;
    invalid.push_back({"m" + std::to_string(e.matchup) + " r" + std::to_string(e.run) + " " + e.stage + " " +
                           std::to_string(e.episode),
                       e.invalid_reason});
  }
  if (invalid.size() > 1) out << "\n" << render_table(invalid);
  return out.str();
}

std::string render_report_json(const MatchReport& report) { return report_to_json(report).dump(2) + "\n"; }

}  // namespace som::tournament
