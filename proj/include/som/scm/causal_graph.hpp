#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace som::scm {

using NodeId = std::uint32_t;

enum class NodeKind { observation, intermediate, action };

std::string_view to_string(NodeKind kind);
NodeKind parse_node_kind(std::string_view s);

/// Label of the single action node. Chains end with it.
inline constexpr std::string_view kActionLabel = "ACTION";

struct Node {
  NodeId id = 0;
  NodeKind kind = NodeKind::observation;
  std::string label;
  std::optional<int> count;  // reinforcement count, intermediates only
  std::uint64_t order = 0;   // insertion order

  bool operator==(const Node&) const = default;
};

struct Edge {
  NodeId parent = 0;
  NodeId child = 0;

  auto operator<=>(const Edge&) const = default;
};

/// Raised when a graph or chain violates a structural invariant. The
/// invariant name is stable ("acyclic", "edge-endpoints", ...).
class GraphError : public std::runtime_error {
 public:
  GraphError(std::string invariant, const std::string& detail)
      : std::runtime_error(invariant + ": " + detail), invariant_(std::move(invariant)) {}
  const std::string& invariant() const { return invariant_; }

 private:
  std::string invariant_;
};

/// Observation label, zero or more intermediate labels, then ACTION.
struct CausalChain {
  std::vector<std::string> labels;

  /// Reason the chain is malformed against `observation_keys`, if any.
  std::optional<std::string> problem(std::span<const std::string> observation_keys) const;
  std::string to_string() const;
  bool operator==(const CausalChain&) const = default;
};

/// Directed acyclic graph from observation roots through hypothesised
/// intermediate variables to the opponent's action.
///
/// Invariants: acyclic; exactly one action node with out-degree 0;
/// observation nodes have in-degree 0; every intermediate lies on some
/// observation-to-action path; direct observation-to-action edges are
/// permanent.
class CausalGraph {
 public:
  CausalGraph() = default;

  /// Rebuilds a graph from stored parts, throwing GraphError on any
  /// invariant violation.
  static CausalGraph from_parts(std::vector<Node> nodes, std::vector<Edge> edges,
                                std::uint64_t next_order);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::set<Edge>& edges() const { return edges_; }
  std::uint64_t next_order() const { return next_order_; }

  const Node& node(NodeId id) const;
  const Node* find(NodeId id) const;
  const Node* find_label(std::string_view label) const;
  NodeId action_id() const;

  std::vector<std::string> observation_keys() const;
  std::vector<const Node*> intermediates() const;
  std::vector<NodeId> parents(NodeId id) const;
  bool has_edge(NodeId parent, NodeId child) const { return edges_.count({parent, child}) > 0; }
  bool reaches(NodeId from, NodeId to) const;
  bool is_permanent(const Edge& e) const;

  /// Name of the first violated invariant, if any.
  std::optional<std::string> violated_invariant() const;

  NodeId add_observation(std::string label);
  NodeId add_action();
  NodeId add_intermediate(std::string label);
  void reinforce(NodeId id);

  /// Adds parent -> child unless doing so breaks an invariant; returns the
  /// rejection reason ("cycle", ...) in that case. Existing edges are a no-op.
  std::optional<std::string> try_add_edge(NodeId parent, NodeId child);

  /// Removes an intermediate node and every incident edge.
  void remove_intermediate(NodeId id);

  /// Drops intermediates not on any observation-to-action path. Returns the
  /// removed ids.
  std::vector<NodeId> remove_dangling();

  bool operator==(const CausalGraph&) const = default;

 private:
  NodeId add_node(NodeKind kind, std::string label, std::optional<int> count);

  std::vector<Node> nodes_;  // ascending insertion order
  std::set<Edge> edges_;
  std::uint64_t next_order_ = 0;
};

/// Minimal initial graph: one node per observation key, the action node, and
/// a direct edge from each key to the action. Throws GraphError on empty or
/// duplicate keys.
CausalGraph init_graph(std::span<const std::string> observation_keys);

/// Decides whether a candidate intermediate label denotes an existing one.
using NodeMatcher = std::function<bool(std::string_view candidate, std::string_view existing)>;

struct ChainResult {
  CausalChain chain;
  bool accepted = false;
  std::string reason;
  std::vector<std::pair<std::string, std::string>> rejected_edges;
};

struct ApplyResult {
  CausalGraph graph;
  std::vector<ChainResult> chains;
  std::vector<std::string> created;
  std::vector<std::string> reinforced;
  std::vector<std::string> dropped;  // new nodes left off every path by rejected edges
};

/// Consolidates extracted chains into the graph. Each distinct node touched
/// by the batch is reinforced at most once; on several matcher hits the
/// highest-count node absorbs the reinforcement.
ApplyResult apply_chains(const CausalGraph& graph, std::span<const CausalChain> chains,
                         const NodeMatcher& matcher);

struct PruneResult {
  CausalGraph graph;
  std::vector<std::string> pruned;    // ranked below K
  std::vector<std::string> cascaded;  // lost their last path after pruning
};

/// Keeps the K intermediates ranked highest by (count desc, insertion asc).
PruneResult prune_top_k(const CausalGraph& graph, std::size_t k);

/// Parents before children; ties by kind (observation, intermediate,
/// action) then insertion order. Throws GraphError("acyclic") on a cycle.
std::vector<NodeId> topological_order(const CausalGraph& graph);
std::vector<NodeId> topological_order(std::span<const Node> nodes, const std::set<Edge>& edges);

}  // namespace som::scm
