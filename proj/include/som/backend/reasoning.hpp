#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "som/backend/reasoner.hpp"
#include "som/scm/causal_graph.hpp"
#include "som/scm/example_pool.hpp"
#include "som/scm/inference.hpp"

namespace som::backend {

/// Game framing shared by every prompt an agent sends.
struct PromptContext {
  std::string game;      // display name
  std::string rules;     // rendered rules text
  std::string format;    // answer format line for actions
  std::string opponent;  // opponent id, when the prompt concerns one
};

struct ReflectInput {
  std::string history;
  std::map<std::string, std::string> observation;
  std::string action;
};

/// Free-text hypothesis about the opponent's hidden reasoning. Backend
/// errors propagate.
std::string reflect(const Reasoner& backend, const PromptContext& ctx, const ReflectInput& input);

struct DroppedLine {
  std::string line;
  std::string reason;
};

struct ExtractResult {
  std::vector<scm::CausalChain> chains;
  std::vector<DroppedLine> dropped;
};

/// Parses `key -> label -> ... -> ACTION` lines. Bullets, numbering and
/// surrounding backticks are tolerated; lines without an arrow are ignored;
/// arrowed lines that fail validation are dropped with a reason.
ExtractResult parse_chains(std::string_view text, const std::vector<std::string>& observation_keys);

/// Asks the backend for chains and parses them. Backend errors propagate.
ExtractResult extract(const Reasoner& backend, std::string_view reflection,
                      const std::vector<std::string>& observation_keys);

/// Jaccard overlap of lower-cased alphanumeric token sets; 0 when both are
/// empty.
double jaccard_similarity(std::string_view a, std::string_view b);

inline constexpr double kDefaultMatchThreshold = 0.5;

/// Best existing label scoring at least `threshold`; ties keep the earlier
/// label. With a judge, the first label the judge accepts wins, and judge
/// errors fall back to the similarity score.
std::optional<std::string> semantic_match(std::string_view candidate, const std::vector<std::string>& existing,
                                          const scm::SimilarityFn& similarity,
                                          double threshold = kDefaultMatchThreshold,
                                          const Reasoner* judge = nullptr);

/// Pairwise form of semantic_match for apply_chains.
scm::NodeMatcher make_node_matcher(scm::SimilarityFn similarity, double threshold = kDefaultMatchThreshold,
                                   const Reasoner* judge = nullptr);

/// Structural function that asks the backend for each node's value. The
/// value is the first non-empty line of the reply, stripped of a leading
/// "label:" or "label =" prefix.
scm::StructuralFunction backend_structural_function(const Reasoner& backend, PromptContext ctx);

/// Renders retrieved examples for an infer prompt.
std::string example_lines(const std::vector<scm::PoolEntry>& examples);

}  // namespace som::backend
