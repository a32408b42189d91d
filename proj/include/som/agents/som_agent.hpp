#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "som/agents/agent.hpp"
#include "som/backend/reasoner.hpp"
#include "som/scm/causal_graph.hpp"
#include "som/scm/example_pool.hpp"
#include "som/scm/inference.hpp"

namespace som::agents {

struct SomParams {
  std::size_t top_k = 5;
  std::size_t top_m = 3;
  /// Numeric match tolerance for credit assignment; nullopt means exact.
  std::optional<double> match_tolerance = 5.0;
  std::optional<std::size_t> pool_capacity = scm::kDefaultPoolCapacity;
  double match_threshold = 0.5;
  bool judge_matching = false;
  /// Off: predict with one direct prompt and keep no graph.
  bool enable_graph = true;
  bool enable_intermediates = true;
  bool enable_refine = true;
  bool enable_examples = true;
};

/// Named ablation presets, weakest first.
enum class Ablation { llm_only, static_graph, intermediates, refine, full };
std::string_view to_string(Ablation a);
std::optional<Ablation> parse_ablation(std::string_view s);
const std::vector<Ablation>& all_ablations();
SomParams apply_ablation(SomParams base, Ablation a);

/// Observation keys of the shared graph for a game.
std::vector<std::string> graph_keys(game::GameKind kind);

/// Root values for predicting `opponent`, seen from the observer. Missing
/// facts read "none".
std::map<std::string, std::string> graph_values(const game::GameSpec& spec, const game::Observation& obs,
                                                PlayerId opponent,
                                                const std::map<PlayerId, std::string>& last_actions);

/// Shared causal graph plus one example pool per opponent id.
struct OpponentModel {
  game::GameKind game = game::GameKind::g08a;
  scm::CausalGraph graph;
  std::map<std::string, scm::ExamplePool> pools;
  std::optional<std::size_t> pool_capacity = scm::kDefaultPoolCapacity;

  static OpponentModel fresh(game::GameKind kind, std::optional<std::size_t> capacity = scm::kDefaultPoolCapacity);
  scm::ExamplePool& pool(const std::string& opponent_id);
  const scm::ExamplePool* find_pool(const std::string& opponent_id) const;
  bool operator==(const OpponentModel&) const = default;
};

/// Agent that builds a causal model of its opponents, predicts their next
/// actions through it, and best-responds.
///
/// Per round: predict (in act), then on round end credit the stored trace
/// against the revealed action, then reflect, extract, merge and prune.
class SomAgent : public Agent {
 public:
  SomAgent(std::shared_ptr<const backend::Reasoner> backend, SomParams params,
           std::optional<OpponentModel> model = std::nullopt);

  std::string kind() const override { return "som"; }
  std::unique_ptr<Agent> clone() const override;

  void begin_episode(const Seating& seating) override;
  Action act(const game::Observation& obs) override;
  void end_round(const RoundEnd& info) override;
  std::map<PlayerId, std::string> predictions() const override { return predictions_; }

  const OpponentModel& model() const { return model_; }
  void set_model(OpponentModel model) { model_ = std::move(model); }
  const SomParams& params() const { return params_; }

  /// Predicts one opponent's next action and stores the trace for credit.
  std::string predict(const game::Observation& obs, PlayerId opponent);

 private:
  struct Pending {
    std::map<std::string, std::string> values;
    std::optional<scm::InferenceTrace> trace;
    std::string predicted;
  };

  std::string fallback_action(PlayerId opponent, const game::Observation& obs) const;
  void observe(PlayerId opponent, const std::string& actual, const std::string& history);
  Action best_response(const game::Observation& obs);
  void warn(const std::string& stage, const std::string& what);

  std::shared_ptr<const backend::Reasoner> backend_;
  SomParams params_;
  OpponentModel model_;
  // Per-episode state.
  std::map<PlayerId, std::string> last_actions_;
  std::map<PlayerId, Pending> pending_;
  std::map<PlayerId, std::string> predictions_;
  int round_ = 0;
};

}  // namespace som::agents
