#include "som/agents/som_agent.hpp"

#include <algorithm>
#include <array>

#include <spdlog/spdlog.h>

#include "som/agents/action_grammar.hpp"
#include "som/agents/game_text.hpp"
#include "som/agents/strategies.hpp"
#include "som/backend/prompts.hpp"
#include "som/backend/reasoning.hpp"
#include "som/common/text.hpp"

namespace som::agents {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Ablation, std::string_view>, 5> kAblations{{
    {Ablation::llm_only, "llm-only"},
    {Ablation::static_graph, "static"},
    {Ablation::intermediates, "intermediates"},
    {Ablation::refine, "refine"},
    {Ablation::full, "full"},
}};

std::string none_or(const std::optional<std::string>& v) { return v ? *v : "none"; }

game::Phase prediction_phase(game::GameKind kind) {
  switch (kind) {
    case game::GameKind::g08a: return game::Phase::choose;
    case game::GameKind::sag: return game::Phase::bid;
    case game::GameKind::undercover: return game::Phase::vote;
  }
  return game::Phase::choose;
}

std::vector<PlayerId> alive_of(const game::Observation& obs) {
  std::vector<PlayerId> out;
  for (const auto& part : split(obs.get("alive").value_or(""), ',')) {
    if (auto v = parse_number(part)) out.push_back(static_cast<PlayerId>(*v));
  }
  return out;
}

}  // namespace

std::string_view to_string(Ablation a) {
  for (const auto& [value, name] : kAblations) {
    if (value == a) return name;
  }
  return "full";
}

std::optional<Ablation> parse_ablation(std::string_view s) {
  for (const auto& [value, name] : kAblations) {
    if (name == s) return value;
  }
  return std::nullopt;
}

const std::vector<Ablation>& all_ablations() {
  static const std::vector<Ablation> all{Ablation::llm_only, Ablation::static_graph, Ablation::intermediates,
                                         Ablation::refine, Ablation::full};
  return all;
}

SomParams apply_ablation(SomParams p, Ablation a) {
  p.enable_graph = a != Ablation::llm_only;
  p.enable_intermediates = a == Ablation::intermediates || a == Ablation::refine || a == Ablation::full;
  p.enable_refine = a == Ablation::refine || a == Ablation::full;
  p.enable_examples = a == Ablation::full;
  return p;
}

std::vector<std::string> graph_keys(game::GameKind kind) {
  switch (kind) {
    case game::GameKind::g08a: return {"last-target", "last-mean", "opponent-last-choice"};
    case game::GameKind::sag: return {"own-hp", "opponent-hp", "last-price", "opponent-won-last"};
    case game::GameKind::undercover: return {"clue-transcript", "opponent-clue", "alive-players"};
  }
  return {};
}

std::map<std::string, std::string> graph_values(const game::GameSpec& spec, const game::Observation& obs,
                                                PlayerId opponent,
                                                const std::map<PlayerId, std::string>& last_actions) {
  const std::string opp = std::to_string(opponent);
  std::map<std::string, std::string> v;
  switch (spec.kind) {
    case game::GameKind::g08a: {
      v["last-target"] = none_or(obs.get("last-target"));
      v["last-mean"] = none_or(obs.get("last-mean"));
      auto last = obs.get("last-choice." + opp);
      if (!last) {
        if (auto it = last_actions.find(opponent); it != last_actions.end()) last = it->second;
      }
      v["opponent-last-choice"] = none_or(last);
      break;
    }
    case game::GameKind::sag: {
      v["own-hp"] = none_or(obs.get("own-hp"));
      v["opponent-hp"] = none_or(obs.get("hp." + opp));
      v["last-price"] = none_or(obs.get("last-price"));
      const auto winner = obs.get("last-winner");
      v["opponent-won-last"] = winner ? (*winner == opp ? "yes" : "no") : "none";
      break;
    }
    case game::GameKind::undercover: {
      std::vector<std::string> transcript;
      for (const auto& [key, value] : obs.fields) {
        if (key.rfind("clue.", 0) == 0) transcript.push_back("player " + key.substr(5) + ": " + value);
      }
      v["clue-transcript"] = transcript.empty() ? "none" : join(transcript, "; ");
      v["opponent-clue"] = none_or(obs.get("clue." + opp));
      v["alive-players"] = none_or(obs.get("alive"));
      break;
    }
  }
  return v;
}

OpponentModel OpponentModel::fresh(game::GameKind kind, std::optional<std::size_t> capacity) {
  OpponentModel m;
  m.game = kind;
  const auto keys = graph_keys(kind);
  m.graph = scm::init_graph(keys);
  m.pool_capacity = capacity;
  return m;
}

scm::ExamplePool& OpponentModel::pool(const std::string& opponent_id) {
  auto it = pools.find(opponent_id);
  if (it == pools.end()) it = pools.emplace(opponent_id, scm::ExamplePool(opponent_id, pool_capacity)).first;
  return it->second;
}

const scm::ExamplePool* OpponentModel::find_pool(const std::string& opponent_id) const {
  auto it = pools.find(opponent_id);
  return it == pools.end() ? nullptr : &it->second;
}

SomAgent::SomAgent(std::shared_ptr<const backend::Reasoner> backend, SomParams params,
                   std::optional<OpponentModel> model)
    : backend_(std::move(backend)), params_(params) {
  if (!backend_) throw std::invalid_argument("SOM agent needs a backend");
  if (model) model_ = std::move(*model);
}

std::unique_ptr<Agent> SomAgent::clone() const {
  auto copy = std::make_unique<SomAgent>(*this);
  copy->events_ = EventLog{};
  return copy;
}

void SomAgent::begin_episode(const Seating& seating) {
  Agent::begin_episode(seating);
  if (model_.graph.nodes().empty()) {
    model_ = OpponentModel::fresh(seating.spec.kind, params_.pool_capacity);
  } else if (model_.game != seating.spec.kind) {
    throw std::invalid_argument("opponent model was built for " + std::string(game::to_string(model_.game)) +
                                ", not " + std::string(game::to_string(seating.spec.kind)));
  }
  last_actions_.clear();
  pending_.clear();
  predictions_.clear();
  round_ = 0;
}

void SomAgent::warn(const std::string& stage, const std::string& what) {
  spdlog::warn("som agent, round {}, {} skipped: {}", round_, stage, what);
  events_.add({{"type", "warning"}, {"round", round_}, {"stage", stage}, {"error", what}});
}

std::string SomAgent::fallback_action(PlayerId opponent, const game::Observation& obs) const {
  if (auto it = last_actions_.find(opponent); it != last_actions_.end()) return it->second;
  const auto& spec = seating_.spec;
  switch (spec.kind) {
    case game::GameKind::g08a:
      return std::to_string(round_half_away((spec.g08a().action_min + spec.g08a().action_max) / 2.0));
    case game::GameKind::sag:
      return "0";
    case game::GameKind::undercover:
      for (PlayerId p : alive_of(obs)) {
        if (p != opponent) return std::to_string(p);
      }
      return std::to_string(opponent);
  }
  return "0";
}

std::string SomAgent::predict(const game::Observation& obs, PlayerId opponent) {
  const auto& spec = seating_.spec;
  const auto phase = prediction_phase(spec.kind);
  const std::string opp_id = seating_.id_of(opponent);
  const auto ctx = prompt_context(spec, phase, opp_id);
  const auto [lo, hi] = action_range(spec, phase, obs);
  // The opponent's bid range is its own budget, which is private.
  const std::int64_t top = spec.kind == game::GameKind::sag ? spec.sag().initial_budget : hi;

  Pending pending;
  pending.values = graph_values(spec, obs, opponent, last_actions_);
  bool fallback = false;
  json event{{"type", "predict"}, {"round", round_}, {"opponent", opp_id}, {"seat", opponent}};

  auto normalize = [&](const std::string& raw) -> std::optional<std::string> {
    auto parsed = parse_action(phase, raw, lo, top);
    if (!parsed.action) return std::nullopt;
    return game::action_to_string(*parsed.action);
  };

  if (!params_.enable_graph) {
    event["mode"] = "direct";
    std::optional<std::string> value;
    try {
      const std::string user = backend::render_prompt("predict-direct", {{"game", ctx.game},
                                                                         {"rules", ctx.rules},
                                                                         {"opponent", opp_id},
                                                                         {"observation", backend::value_lines(pending.values)},
                                                                         {"format", ctx.format}});
      const std::string reply = backend_->complete(backend::make_request(
          backend::Purpose::infer, std::string(trim(backend::prompt_template("system"))), user, 0.0, 200));
      std::string first;
      for (const auto& line : split_lines(reply)) {
        if (!trim(line).empty()) {
          first = line;
          break;
        }
      }
      value = normalize(first);
    } catch (const backend::BackendError& e) {
      warn("predict", e.what());
    }
    fallback = !value;
    pending.predicted = value ? *value : fallback_action(opponent, obs);
  } else {
    event["mode"] = "graph";
    scm::InferenceOptions opts;
    opts.top_m = params_.top_m;
    opts.use_examples = params_.enable_examples;
    opts.similarity = backend::jaccard_similarity;
    opts.action_fallback = [&] { return fallback_action(opponent, obs); };
    const scm::ExamplePool* pool = params_.enable_examples ? model_.find_pool(opp_id) : nullptr;
    auto trace = scm::infer(model_.graph, pending.values, pool,
                            backend::backend_structural_function(*backend_, ctx), opts);
    auto value = normalize(trace.predicted_action);
    fallback = trace.action_fallback || !value;
    pending.predicted = value ? *value : fallback_action(opponent, obs);
    trace.predicted_action = pending.predicted;
    event["nodes"] = trace.records.size();
    std::size_t failed = 0;
    for (const auto& r : trace.records) failed += r.fallback ? 1 : 0;
    event["failed-nodes"] = failed;
    event["examples-used"] = [&] {
      std::size_t n = 0;
      for (const auto& r : trace.records) n += r.example_ids.size();
      return n;
    }();
    pending.trace = std::move(trace);
  }
  event["value"] = pending.predicted;
  event["fallback"] = fallback;
  events_.add(std::move(event));
  const std::string predicted = pending.predicted;
  pending_[opponent] = std::move(pending);
  predictions_[opponent] = predicted;
  return predicted;
}

Action SomAgent::act(const game::Observation& obs) {
  round_ = obs.round_index + 1;
  const auto& spec = seating_.spec;
  if (obs.phase == prediction_phase(spec.kind)) {
    predictions_.clear();
    pending_.clear();
    for (PlayerId p : alive_of(obs)) {
      if (p != seating_.self) predict(obs, p);
    }
  }
  Action a = best_response(obs);
  events_.add({{"type", "act"}, {"round", round_}, {"phase", game::to_string(obs.phase)},
               {"action", game::action_to_string(a)}});
  return a;
}

Action SomAgent::best_response(const game::Observation& obs) {
  const auto& spec = seating_.spec;
  const auto [lo, hi] = action_range(spec, obs.phase, obs);
  switch (spec.kind) {
    case game::GameKind::g08a: {
      double sum = 0;
      for (const auto& [p, v] : predictions_) sum += parse_number(v).value_or((lo + hi) / 2.0);
      const auto& g = spec.g08a();
      return Action{g08a_best_response(sum, spec.num_players, g.target_factor, g.action_min, g.action_max)};
    }
    case game::GameKind::sag: {
      double rival = 0;
      for (const auto& [p, v] : predictions_) rival = std::max(rival, parse_number(v).value_or(0.0));
      const int hp = static_cast<int>(obs.number("own-hp").value_or(0));
      return Action{sag_best_response(rival, hp, hi, spec.sag().round_hp_loss)};
    }
    case game::GameKind::undercover: {
      std::vector<std::string> lines;
      for (const auto& [p, v] : predictions_) lines.push_back("  player " + std::to_string(p) + " votes for " + v);
      const auto ctx = prompt_context(spec, obs.phase);
      std::optional<Action> chosen;
      try {
        const std::string user = backend::render_prompt(
            "som-act", {{"game", ctx.game},
                        {"rules", ctx.rules},
                        {"player", std::to_string(seating_.self)},
                        {"history", history_of(obs)},
                        {"observation", observation_text(obs)},
                        {"predictions", lines.empty() ? "(none yet)" : join(lines, "\n")},
                        {"format", ctx.format}});
        const std::string reply = backend_->complete(backend::make_request(
            backend::Purpose::act, std::string(trim(backend::prompt_template("system"))), user, 0.7, 200));
        chosen = parse_action(obs.phase, reply, lo, hi).action;
      } catch (const backend::BackendError& e) {
        warn("act", e.what());
      }
      if (chosen) return *chosen;
      if (obs.phase == game::Phase::clue) return Action{std::string("pass")};
      // Join the vote most others are predicted to cast.
      std::map<std::string, int> tally;
      for (const auto& [p, v] : predictions_) {
        if (v != std::to_string(seating_.self)) ++tally[v];
      }
      std::string best;
      int best_count = 0;
      for (const auto& [v, c] : tally) {
        if (c > best_count) best = v, best_count = c;
      }
      if (auto v = parse_number(best)) return Action{static_cast<std::int64_t>(*v)};
      for (PlayerId p : alive_of(obs)) {
        if (p != seating_.self) return Action{std::int64_t{p}};
      }
      return Action{std::int64_t{lo}};
    }
  }
  return Action{lo};
}

void SomAgent::end_round(const RoundEnd& info) {
  round_ = info.round_index;
  const std::string history = history_of(info.after);
  for (const auto& [p, actions] : info.revealed) {
    if (p == seating_.self || actions.empty()) continue;
    last_actions_[p] = game::action_to_string(actions.back());
  }
  if (frozen_) {
    pending_.clear();
    return;
  }
  for (auto& [p, pending] : pending_) {
    auto it = info.revealed.find(p);
    if (it == info.revealed.end() || it->second.empty()) continue;
    observe(p, game::action_to_string(it->second.back()), history);
  }
  pending_.clear();
}

void SomAgent::observe(PlayerId opponent, const std::string& actual, const std::string& history) {
  const auto& spec = seating_.spec;
  const std::string opp_id = seating_.id_of(opponent);
  const Pending& pending = pending_.at(opponent);

  // Credit the prediction made before this action was seen.
  if (pending.trace && params_.enable_graph) {
    const scm::MatchPredicate predicate{spec.kind == game::GameKind::undercover ? std::nullopt : params_.match_tolerance};
    auto& pool = model_.pool(opp_id);
    const std::size_t added = scm::credit_assign(*pending.trace, pending.predicted, actual, predicate, pool);
    events_.add({{"type", "credit"},
                 {"round", round_},
                 {"opponent", opp_id},
                 {"predicted", pending.predicted},
                 {"actual", actual},
                 {"matched", predicate(pending.predicted, actual)},
                 {"added", added},
                 {"pool-size", pool.size()}});
  }

  if (!params_.enable_graph || !params_.enable_intermediates) return;

  const auto ctx = prompt_context(spec, prediction_phase(spec.kind), opp_id);
  backend::ExtractResult extracted;
  try {
    const std::string reflection = backend::reflect(*backend_, ctx, {history, pending.values, actual});
    extracted = backend::extract(*backend_, reflection, model_.graph.observation_keys());
  } catch (const backend::BackendError& e) {
    warn("graph-update", e.what());
    return;
  }
  auto applied = scm::apply_chains(model_.graph, extracted.chains,
                                   backend::make_node_matcher(backend::jaccard_similarity, params_.match_threshold,
                                                              params_.judge_matching ? backend_.get() : nullptr));
  json event{{"type", "graph-update"},
             {"round", round_},
             {"opponent", opp_id},
             {"chains", json::array()},
             {"created", applied.created},
             {"reinforced", applied.reinforced},
             {"dropped-nodes", applied.dropped}};
  for (const auto& c : applied.chains) {
    event["chains"].push_back({{"chain", c.chain.to_string()}, {"accepted", c.accepted}, {"reason", c.reason}});
  }
  for (const auto& d : extracted.dropped) {
    event["chains"].push_back({{"chain", d.line}, {"accepted", false}, {"reason", d.reason}});
  }
  model_.graph = std::move(applied.graph);
  if (params_.enable_refine) {
    auto pruned = scm::prune_top_k(model_.graph, params_.top_k);
    event["pruned"] = pruned.pruned;
    event["cascaded"] = pruned.cascaded;
    model_.graph = std::move(pruned.graph);
  }
  event["intermediates"] = model_.graph.intermediates().size();
  events_.add(std::move(event));
}

}  // namespace som::agents
