#include "som/game/round_log.hpp"

namespace som::game {

using nlohmann::json;

json to_json(const Action& action) {
  if (const auto* v = std::get_if<std::int64_t>(&action)) return *v;
  return std::get<std::string>(action);
}

json to_json(const PublicRecord& record) {
  json j;
  if (const auto* g = std::get_if<G08ARecord>(&record)) {
    j["choices"] = g->choices;
    j["mean"] = g->mean;
    j["target"] = g->target;
    j["winners"] = g->winners;
  } else if (const auto* s = std::get_if<SagRecord>(&record)) {
    j["winner"] = s->winner;
    j["price"] = s->price;
    j["hp_after"] = s->hp_after;
    j["eliminated"] = s->eliminated;
  } else {
    const auto& u = std::get<UndercoverRecord>(record);
    json clues = json::object();
    for (const auto& [pid, c] : u.clues) clues[std::to_string(pid)] = c;
    json votes = json::object();
    for (const auto& [pid, t] : u.votes) votes[std::to_string(pid)] = t;
    j["clues"] = clues;
    j["votes"] = votes;
    j["eliminated"] = u.eliminated ? json(*u.eliminated) : json(nullptr);
  }
  return j;
}

json to_json(const RoundOutcome& outcome) {
  return json{{"rewards", outcome.rewards},
              {"winners", outcome.winners},
              {"reveal", to_json(outcome.reveal)},
              {"terminal", outcome.terminal}};
}

json RoundLogRecord::to_json() const {
  json actions = json::object();
  for (const auto& [phase, joint] : joint_action) {
    json per = json::object();
    for (const auto& [pid, a] : joint) per[std::to_string(pid)] = game::to_json(a);
    actions[phase] = per;
  }
  json viol = json::array();
  for (const auto& v : violations) {
    viol.push_back({{"player", v.player},
                    {"reason", v.reason},
                    {"submitted", game::to_json(v.submitted)},
                    {"substituted", game::to_json(v.substituted)}});
  }
  json digests = json::object();
  for (const auto& [pid, d] : observation_digests) digests[std::to_string(pid)] = d;
  return json{{"type", "round"},
              {"round", round_index},
              {"joint_action", actions},
              {"outcome", game::to_json(outcome)},
              {"violations", viol},
              {"observation_digests", digests}};
}

void append_record(std::ostream& out, const json& record) {
  out << record.dump() << '\n';
}

}  // namespace som::game
