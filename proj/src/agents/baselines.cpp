#include "som/agents/baselines.hpp"

#include <algorithm>
#include <regex>

#include "som/agents/action_grammar.hpp"
#include "som/agents/game_text.hpp"
#include "som/agents/strategies.hpp"
#include "som/backend/prompts.hpp"
#include "som/common/text.hpp"

namespace som::agents {

namespace {

const std::vector<std::string>& baseline_kinds() {
  static const std::vector<std::string> kinds{"llm-only", "cot", "tot", "reflexion", "k-r"};
  return kinds;
}

double parse_score(const std::string& reply) {
  static const std::regex number(R"(\d+(?:\.\d+)?)");
  std::optional<double> last;
  for (auto it = std::sregex_iterator(reply.begin(), reply.end(), number); it != std::sregex_iterator(); ++it) {
    last = parse_number(it->str());
  }
  return last ? std::clamp(*last, 0.0, 1.0) : 0.0;
}

}  // namespace

BaselineAgent::BaselineAgent(std::string kind, std::shared_ptr<const backend::Reasoner> backend, BaselineParams params)
    : kind_(std::move(kind)), backend_(std::move(backend)), params_(params) {
  if (std::find(baseline_kinds().begin(), baseline_kinds().end(), kind_) == baseline_kinds().end()) {
    throw std::invalid_argument("unknown baseline kind '" + kind_ + "'");
  }
  if (params_.tot_breadth < 1) throw std::invalid_argument("tot breadth must be at least 1");
  if (params_.k_depth < 0) throw std::invalid_argument("k-level depth must be non-negative");
  const bool needs_backend = !(kind_ == "k-r" && params_.analytic);
  if (needs_backend && !backend_) throw std::invalid_argument(kind_ + " agent needs a backend");
}

std::unique_ptr<Agent> BaselineAgent::clone() const {
  auto copy = std::make_unique<BaselineAgent>(*this);
  copy->events_ = EventLog{};
  return copy;
}

void BaselineAgent::begin_episode(const Seating& seating) {
  Agent::begin_episode(seating);
  last_own_.clear();
  round_ = 0;
}

std::string BaselineAgent::ask(backend::Purpose purpose, const std::string& prompt, double temperature) {
  return backend_->complete(backend::make_request(purpose, std::string(trim(backend::prompt_template("system"))),
                                                  prompt, temperature, 600));
}

Action BaselineAgent::fallback(const game::Observation& obs) const {
  if (auto it = last_own_.find(obs.phase); it != last_own_.end()) return it->second;
  const auto [lo, hi] = action_range(seating_.spec, obs.phase, obs);
  switch (obs.phase) {
    case game::Phase::clue: return Action{std::string("pass")};
    case game::Phase::vote:
      for (const auto& part : split(obs.get("alive").value_or(""), ',')) {
        auto v = parse_number(part);
        if (v && static_cast<PlayerId>(*v) != seating_.self) return Action{static_cast<std::int64_t>(*v)};
      }
      return Action{lo};
    default: return Action{lo};
  }
}

Action BaselineAgent::finish(const game::Observation& obs, const std::string& reply) {
  const auto [lo, hi] = action_range(seating_.spec, obs.phase, obs);
  auto parsed = parse_action(obs.phase, reply, lo, hi);
  Action a = parsed.action ? *parsed.action : fallback(obs);
  if (!parsed.problem.empty()) {
    events_.add({{"type", "violation"}, {"round", round_}, {"phase", game::to_string(obs.phase)},
                 {"problem", parsed.problem}, {"fallback", !parsed.action}});
  }
  return a;
}

Action BaselineAgent::act_tot(const game::Observation& obs, const std::map<std::string, std::string>& vars) {
  std::vector<std::string> candidates;
  std::vector<double> scores;
  for (int b = 1; b <= params_.tot_breadth; ++b) {
    auto v = vars;
    v["branch"] = std::to_string(b);
    v["breadth"] = std::to_string(params_.tot_breadth);
    const std::string candidate = ask(backend::Purpose::act, backend::render_prompt("tot-propose", v), 0.8);
    auto e = vars;
    e["candidate"] = candidate;
    const double score = parse_score(ask(backend::Purpose::act, backend::render_prompt("tot-evaluate", e), 0.0));
    candidates.push_back(candidate);
    scores.push_back(score);
  }
  const auto best = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
  events_.add({{"type", "tot"}, {"round", round_}, {"scores", scores}, {"chosen", best + 1}});
  return finish(obs, candidates[best]);
}

Action BaselineAgent::act(const game::Observation& obs) {
  round_ = obs.round_index + 1;
  const auto& spec = seating_.spec;
  Action a;
  if (kind_ == "k-r" && params_.analytic && spec.kind == game::GameKind::g08a) {
    const auto& g = spec.g08a();
    const auto mean = obs.number("last-mean");
    const std::int64_t anchor = mean ? round_half_away(*mean) : round_half_away((g.action_min + g.action_max) / 2.0);
    a = Action{k_level_choice(params_.k_depth, spec.num_players, std::clamp(anchor, g.action_min, g.action_max),
                              g.target_factor, g.action_min, g.action_max)};
  } else if (!backend_) {
    a = fallback(obs);
    events_.add({{"type", "violation"}, {"round", round_}, {"problem", "analytic k-r only covers G0.8A"}, {"fallback", true}});
  } else {
    const auto ctx = prompt_context(spec, obs.phase);
    std::map<std::string, std::string> vars{{"game", ctx.game},
                                            {"rules", ctx.rules},
                                            {"player", std::to_string(seating_.self)},
                                            {"history", history_of(obs)},
                                            {"observation", observation_text(obs)},
                                            {"format", ctx.format}};
    if (!context_.empty()) vars["history"] = "Earlier episodes:\n" + context_ + "\n\nThis episode:\n" + vars["history"];
    if (kind_ == "llm-only") {
      a = finish(obs, ask(backend::Purpose::act, backend::render_prompt("act-direct", vars), 0.7));
    } else if (kind_ == "cot") {
      a = finish(obs, ask(backend::Purpose::act, backend::render_prompt("act-cot", vars), 0.7));
    } else if (kind_ == "reflexion") {
      std::vector<std::string> lessons;
      for (const auto& m : memory_) lessons.push_back("- " + m);
      vars["memory"] = lessons.empty() ? "(none yet)" : join(lessons, "\n");
      a = finish(obs, ask(backend::Purpose::act, backend::render_prompt("act-reflexion", vars), 0.7));
    } else if (kind_ == "k-r") {
      vars["depth"] = std::to_string(params_.k_depth);
      a = finish(obs, ask(backend::Purpose::act, backend::render_prompt("act-kr", vars), 0.7));
    } else {
      a = act_tot(obs, vars);
    }
  }
  last_own_[obs.phase] = a;
  events_.add({{"type", "act"}, {"round", round_}, {"phase", game::to_string(obs.phase)}, {"action", game::action_to_string(a)}});
  return a;
}

void BaselineAgent::end_round(const RoundEnd& info) {
  if (kind_ != "reflexion" || frozen_ || !backend_) return;
  std::vector<std::string> own;
  for (const auto& a : info.own_actions) own.push_back(game::action_to_string(a));
  const auto lines = split_lines(history_of(info.after));
  const std::string outcome = (lines.empty() ? "(none)" : lines.back()) + "\nyour reward = " + format_number(info.reward);
  {
    const std::string lesson = trim(ask(backend::Purpose::reflect,
                                        backend::render_prompt("reflexion-reflect", {{"game", std::string(display_name(seating_.spec.kind))},
                                                                                     {"player", std::to_string(seating_.self)},
                                                                                     {"round", std::to_string(info.round_index)},
                                                                                     {"outcome", outcome},
                                                                                     {"own_action", join(own, ", ")}}),
                                        0.7));
    if (lesson.empty()) return;
    memory_.push_back(lesson);
    while (memory_.size() > params_.reflexion_memory) memory_.pop_front();
    events_.add({{"type", "reflection"}, {"round", info.round_index}, {"text", lesson}});
  }
}

MixedAgent::MixedAgent(std::shared_ptr<const backend::Reasoner> backend, BaselineParams params, std::uint64_t seed)
    : seed_(seed) {
  for (const auto& kind : mixed_pool()) {
    members_.emplace(kind, std::make_unique<BaselineAgent>(kind, backend, params));
  }
}

MixedAgent::MixedAgent(const MixedAgent& other) : Agent(other), seed_(other.seed_), current_(other.current_) {
  events_ = EventLog{};
  for (const auto& [kind, member] : other.members_) members_.emplace(kind, member->clone());
}

std::unique_ptr<Agent> MixedAgent::clone() const { return std::make_unique<MixedAgent>(*this); }

void MixedAgent::begin_episode(const Seating& seating) {
  Agent::begin_episode(seating);
  current_ = mixed_opponent(seed_, seating.episode);
  members_.at(current_)->set_context(context_);
  members_.at(current_)->begin_episode(seating);
  events_.add({{"type", "mixed-draw"}, {"episode", seating.episode}, {"kind", current_}});
}

Action MixedAgent::act(const game::Observation& obs) {
  auto& member = *members_.at(current_);
  Action a = member.act(obs);
  for (auto& e : member.events().take()) events_.add(std::move(e));
  return a;
}

void MixedAgent::end_round(const RoundEnd& info) {
  auto& member = *members_.at(current_);
  member.end_round(info);
  for (auto& e : member.events().take()) events_.add(std::move(e));
}

void MixedAgent::end_episode(const game::EpisodeSummary& summary) { members_.at(current_)->end_episode(summary); }

void MixedAgent::set_frozen(bool frozen) {
  Agent::set_frozen(frozen);
  for (auto& [k, m] : members_) m->set_frozen(frozen);
}

}  // namespace som::agents
