#include "som/agents/game_text.hpp"

#include "som/backend/prompts.hpp"
#include "som/common/text.hpp"

namespace som::agents {

std::string_view display_name(game::GameKind kind) {
  switch (kind) {
    case game::GameKind::g08a: return "Guess 0.8 of the Average";
    case game::GameKind::sag: return "Survival Auction";
    case game::GameKind::undercover: return "Who is Undercover";
  }
  return "game";
}

backend::PromptContext prompt_context(const game::GameSpec& spec, game::Phase phase, std::string opponent) {
  backend::PromptContext ctx;
  ctx.game = std::string(display_name(spec.kind));
  ctx.opponent = std::move(opponent);
  switch (spec.kind) {
    case game::GameKind::g08a: {
      const auto& p = spec.g08a();
      const std::map<std::string, std::string> vars{{"min", std::to_string(p.action_min)},
                                                    {"max", std::to_string(p.action_max)},
                                                    {"factor", format_number(p.target_factor)}};
      ctx.rules = backend::render_prompt("rules-g08a", vars);
      ctx.format = backend::render_prompt("format-g08a", vars);
      break;
    }
    case game::GameKind::sag: {
      const auto& p = spec.sag();
      ctx.rules = backend::render_prompt("rules-sag", {{"loss", std::to_string(p.round_hp_loss)},
                                                       {"cap", std::to_string(p.hp_cap)}});
      ctx.format = backend::render_prompt("format-sag", {});
      break;
    }
    case game::GameKind::undercover:
      ctx.rules = backend::render_prompt("rules-undercover", {});
      ctx.format = backend::render_prompt(phase == game::Phase::clue ? "format-clue" : "format-vote", {});
      break;
  }
  return ctx;
}

std::string observation_text(const game::Observation& obs) {
  auto fields = obs.fields;
  fields.erase("history");
  fields["round"] = std::to_string(obs.round_index + 1);
  fields["phase"] = std::string(game::to_string(obs.phase));
  return backend::value_lines(fields);
}

std::string history_of(const game::Observation& obs) {
  auto h = obs.get("history");
  return h ? *h : "(no completed rounds)";
}

}  // namespace som::agents
