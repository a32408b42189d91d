#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "som/scm/causal_graph.hpp"
#include "som/scm/example_pool.hpp"

namespace som::scm {

/// What a structural function sees when valuing one node.
struct NodeQuery {
  std::string label;
  NodeKind kind = NodeKind::intermediate;
  std::map<std::string, std::string> parent_values;
  std::vector<PoolEntry> examples;
};

struct NodeValue {
  std::string value;
  std::string reasoning;
};

/// Realises f_j for one node. Throwing marks the node as failed.
using StructuralFunction = std::function<NodeValue(const NodeQuery&)>;

struct NodeRecord {
  NodeId node = 0;
  std::string label;
  std::map<std::string, std::string> parent_values;
  std::vector<std::uint64_t> example_ids;
  std::string value;
  std::string reasoning;
  bool fallback = false;
  std::string error;

  bool operator==(const NodeRecord&) const = default;
};

/// One record per non-root node in evaluation order; the last is the action.
struct InferenceTrace {
  std::map<std::string, std::string> root_values;
  std::vector<NodeRecord> records;
  std::string predicted_action;
  bool action_fallback = false;

  bool operator==(const InferenceTrace&) const = default;
};

struct InferenceOptions {
  std::size_t top_m = 3;
  bool use_examples = true;
  SimilarityFn similarity;
  /// Value used when the action node cannot be evaluated.
  std::function<std::string()> action_fallback;
};

/// Evaluates the graph in topological order. Roots take the supplied
/// observation values (every observation label must be present, else
/// std::invalid_argument); each other node is valued by `fn` from its
/// parents and retrieved examples.
InferenceTrace infer(const CausalGraph& graph, const std::map<std::string, std::string>& observation_values,
                     const ExamplePool* pool, const StructuralFunction& fn, const InferenceOptions& options);

/// Exact text equality, or absolute numeric tolerance when set and both
/// sides parse as numbers.
struct MatchPredicate {
  std::optional<double> tolerance;

  bool operator()(std::string_view predicted, std::string_view actual) const;
};

/// Stores one example per successfully valued record when the prediction
/// matched. Returns how many examples were appended.
std::size_t credit_assign(const InferenceTrace& trace, std::string_view predicted, std::string_view actual,
                          const MatchPredicate& predicate, ExamplePool& pool);

}  // namespace som::scm
