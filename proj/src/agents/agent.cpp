#include "som/agents/agent.hpp"

namespace som::agents {

std::map<PlayerId, std::vector<Action>> revealed_actions(game::GameKind kind, const game::PublicRecord& record) {
  std::map<PlayerId, std::vector<Action>> out;
  switch (kind) {
    case game::GameKind::g08a: {
      const auto& r = std::get<game::G08ARecord>(record);
      for (std::size_t i = 0; i < r.choices.size(); ++i) out[static_cast<PlayerId>(i)].push_back(Action{r.choices[i]});
      break;
    }
    case game::GameKind::sag: {
      const auto& r = std::get<game::SagRecord>(record);
      if (r.winner >= 0) out[r.winner].push_back(Action{r.price});
      break;
    }
    case game::GameKind::undercover: {
      const auto& r = std::get<game::UndercoverRecord>(record);
      for (const auto& [p, clue] : r.clues) out[p].push_back(Action{clue});
      for (const auto& [p, target] : r.votes) out[p].push_back(Action{std::int64_t{target}});
      break;
    }
  }
  return out;
}

}  // namespace som::agents
