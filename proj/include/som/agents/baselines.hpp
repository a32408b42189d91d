#pragma once

#include <deque>
#include <memory>
#include <string>

#include "som/agents/agent.hpp"
#include "som/backend/reasoner.hpp"

namespace som::agents {

struct BaselineParams {
  int tot_breadth = 3;
  std::size_t reflexion_memory = 5;
  int k_depth = 2;
  /// K-R in G0.8A uses k_level_choice instead of a prompt.
  bool analytic = false;
};

/// Prompt-strategy agents: llm-only, cot, tot, reflexion and k-r.
class BaselineAgent : public Agent {
 public:
  BaselineAgent(std::string kind, std::shared_ptr<const backend::Reasoner> backend, BaselineParams params = {});

  std::string kind() const override { return kind_; }
  std::unique_ptr<Agent> clone() const override;
  void begin_episode(const Seating& seating) override;
  Action act(const game::Observation& obs) override;
  void end_round(const RoundEnd& info) override;

  const std::deque<std::string>& memory() const { return memory_; }

 private:
  std::string ask(backend::Purpose purpose, const std::string& prompt, double temperature);
  Action finish(const game::Observation& obs, const std::string& reply);
  Action fallback(const game::Observation& obs) const;
  Action act_tot(const game::Observation& obs, const std::map<std::string, std::string>& vars);

  std::string kind_;
  std::shared_ptr<const backend::Reasoner> backend_;
  BaselineParams params_;
  std::deque<std::string> memory_;  // reflexion lessons, newest last
  std::map<game::Phase, Action> last_own_;
  int round_ = 0;
};

/// Plays one baseline per episode, drawn by mixed_opponent(seed, episode).
/// Each drawn kind keeps its own state across episodes.
class MixedAgent : public Agent {
 public:
  MixedAgent(std::shared_ptr<const backend::Reasoner> backend, BaselineParams params, std::uint64_t seed);
  MixedAgent(const MixedAgent& other);

  std::string kind() const override { return "mixed"; }
  std::unique_ptr<Agent> clone() const override;
  void begin_episode(const Seating& seating) override;
  Action act(const game::Observation& obs) override;
  void end_round(const RoundEnd& info) override;
  void end_episode(const game::EpisodeSummary& summary) override;
  void set_frozen(bool frozen) override;

  const std::string& current_kind() const { return current_; }

 private:
  std::map<std::string, std::unique_ptr<Agent>> members_;
  std::uint64_t seed_;
  std::string current_;
};

}  // namespace som::agents
