#include "som/agents/action_grammar.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "som/common/text.hpp"

namespace som::agents {

namespace {

constexpr std::size_t kMaxScan = 8192;
constexpr std::size_t kMaxClue = 200;

std::optional<std::string> last_match(const std::string& text, const std::regex& re, int group) {
  std::optional<std::string> found;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
    found = (*it)[group].str();
  }
  return found;
}

ParsedAction parse_number_action(const std::string& text, std::int64_t lo, std::int64_t hi) {
  static const std::regex labeled(R"((?:choice|bid|vote|action|guess|answer)\s*[:=]\s*(?:player\s*)?(-?\d+(?:\.\d+)?))",
                                  std::regex::icase);
  static const std::regex bare(R"(-?\d+(?:\.\d+)?)");
  auto raw = last_match(text, labeled, 1);
  if (!raw) raw = last_match(text, bare, 0);
  ParsedAction out;
  if (!raw) {
    out.problem = "no number in reply";
    return out;
  }
  const auto v = parse_number(*raw);
  if (!v || std::fabs(*v) > 1e15) {
    out.problem = "unreadable number '" + *raw + "'";
    return out;
  }
  std::int64_t x = round_half_away(*v);
  if (x < lo || x > hi) {
    out.clamped = true;
    out.problem = "value " + *raw + " clamped into [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    x = std::clamp(x, lo, hi);
  }
  out.action = game::Action{x};
  return out;
}

ParsedAction parse_clue(const std::string& text) {
  static const std::regex labeled(R"(clue\s*[:=]\s*([^\n]+))", std::regex::icase);
  auto clue = last_match(text, labeled, 1);
  if (!clue) {
    for (const auto& line : split_lines(text)) {
      if (!trim(line).empty()) clue = line;
    }
  }
  ParsedAction out;
  if (!clue) {
    out.problem = "empty reply";
    return out;
  }
  std::string c = trim(*clue);
  while (!c.empty() && (c.front() == '"' || c.front() == '\'')) c.erase(c.begin());
  while (!c.empty() && (c.back() == '"' || c.back() == '\'')) c.pop_back();
  c = trim(c);
  if (c.empty()) {
    out.problem = "empty clue";
    return out;
  }
  if (c.size() > kMaxClue) c.resize(kMaxClue);
  out.action = game::Action{c};
  return out;
}

}  // namespace

ParsedAction parse_action(game::Phase phase, std::string_view text, std::int64_t lo, std::int64_t hi) {
  try {
    std::string tail(text.size() > kMaxScan ? text.substr(text.size() - kMaxScan) : text);
    if (phase == game::Phase::clue) return parse_clue(tail);
    return parse_number_action(tail, lo, hi);
  } catch (const std::exception& e) {
    ParsedAction out;
    out.problem = std::string("parse failure: ") + e.what();
    return out;
  }
}

std::pair<std::int64_t, std::int64_t> action_range(const game::GameSpec& spec, game::Phase phase,
                                                   const game::Observation& obs) {
  switch (phase) {
    case game::Phase::choose: return {spec.g08a().action_min, spec.g08a().action_max};
    case game::Phase::bid: {
      const auto budget = obs.number("own-budget");
      return {0, budget ? static_cast<std::int64_t>(*budget) : 0};
    }
    case game::Phase::vote: return {0, spec.num_players - 1};
    case game::Phase::clue: return {0, 0};
  }
  return {0, 0};
}

}  // namespace som::agents
