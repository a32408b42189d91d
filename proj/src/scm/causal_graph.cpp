#include "som/scm/causal_graph.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <unordered_set>

namespace som::scm {
namespace {

int kind_rank(NodeKind k) {
  switch (k) {
    case NodeKind::observation: return 0;
    case NodeKind::intermediate: return 1;
    case NodeKind::action: return 2;
  }
  return 3;
}

std::vector<NodeId> children_of(const std::set<Edge>& edges, NodeId id) {
  std::vector<NodeId> out;
  for (auto it = edges.lower_bound({id, 0}); it != edges.end() && it->parent == id; ++it) {
    out.push_back(it->child);
  }
  return out;
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::observation: return "observation";
    case NodeKind::intermediate: return "intermediate";
    case NodeKind::action: return "action";
  }
  return "unknown";
}

NodeKind parse_node_kind(std::string_view s) {
  if (s == "observation") return NodeKind::observation;
  if (s == "intermediate") return NodeKind::intermediate;
  if (s == "action") return NodeKind::action;
  throw GraphError("node-kind", "unknown node kind '" + std::string(s) + "'");
}

std::optional<std::string> CausalChain::problem(std::span<const std::string> observation_keys) const {
  if (labels.size() < 2) return "chain needs an observation key and ACTION";
  for (const auto& l : labels) {
    if (l.empty()) return "empty label";
  }
  if (labels.back() != kActionLabel) return "chain must end at ACTION";
  auto is_key = [&](const std::string& l) {
    return std::find(observation_keys.begin(), observation_keys.end(), l) != observation_keys.end();
  };
  if (!is_key(labels.front())) return "unknown observation key '" + labels.front() + "'";
  std::set<std::string> seen;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!seen.insert(labels[i]).second) return "repeated label '" + labels[i] + "'";
    if (i == 0 || i + 1 == labels.size()) continue;
    if (labels[i] == kActionLabel) return "ACTION must be the last label";
    if (is_key(labels[i])) return "observation key '" + labels[i] + "' used as an intermediate";
  }
  return std::nullopt;
}

std::string CausalChain::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += " -> ";
    out += labels[i];
  }
  return out;
}

CausalGraph CausalGraph::from_parts(std::vector<Node> nodes, std::vector<Edge> edges,
                                    std::uint64_t next_order) {
  CausalGraph g;
  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.order < b.order; });
  g.nodes_ = std::move(nodes);
  for (const auto& e : edges) g.edges_.insert(e);
  g.next_order_ = next_order;
  for (const auto& n : g.nodes_) {
    if (n.order >= next_order || n.id >= next_order) {
      throw GraphError("insertion-order", "node '" + n.label + "' is not below the next insertion index");
    }
  }
  if (auto bad = g.violated_invariant()) throw GraphError(*bad, "stored graph violates '" + *bad + "'");
  return g;
}

const Node* CausalGraph::find(NodeId id) const {
  for (const auto& n : nodes_) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const Node& CausalGraph::node(NodeId id) const {
  const Node* n = find(id);
  if (!n) throw GraphError("edge-endpoints", "no node with id " + std::to_string(id));
  return *n;
}

const Node* CausalGraph::find_label(std::string_view label) const {
  for (const auto& n : nodes_) {
    if (n.label == label) return &n;
  }
  return nullptr;
}

NodeId CausalGraph::action_id() const {
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::action) return n.id;
  }
  throw GraphError("single-action", "graph has no action node");
}

std::vector<std::string> CausalGraph::observation_keys() const {
  std::vector<std::string> keys;
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::observation) keys.push_back(n.label);
  }
  return keys;
}

std::vector<const Node*> CausalGraph::intermediates() const {
  std::vector<const Node*> out;
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::intermediate) out.push_back(&n);
  }
  return out;
}

std::vector<NodeId> CausalGraph::parents(NodeId id) const {
  std::vector<NodeId> out;
  for (const auto& e : edges_) {
    if (e.child == id) out.push_back(e.parent);
  }
  std::sort(out.begin(), out.end(), [this](NodeId a, NodeId b) { return node(a).order < node(b).order; });
  return out;
}

bool CausalGraph::reaches(NodeId from, NodeId to) const {
  if (from == to) return true;
  std::vector<NodeId> stack{from};
  std::unordered_set<NodeId> seen{from};
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    for (NodeId c : children_of(edges_, cur)) {
      if (c == to) return true;
      if (seen.insert(c).second) stack.push_back(c);
    }
  }
  return false;
}

bool CausalGraph::is_permanent(const Edge& e) const {
  const Node* p = find(e.parent);
  const Node* c = find(e.child);
  return p && c && p->kind == NodeKind::observation && c->kind == NodeKind::action;
}

std::optional<std::string> CausalGraph::violated_invariant() const {
  std::set<NodeId> ids;
  std::set<std::string> labels;
  int actions = 0;
  int observations = 0;
  for (const auto& n : nodes_) {
    if (n.label.empty()) return "labels";
    if (!ids.insert(n.id).second) return "unique-ids";
    if (!labels.insert(n.label).second) return "unique-labels";
    if (n.kind == NodeKind::intermediate) {
      if (!n.count || *n.count < 1) return "counts";
    } else if (n.count) {
      return "counts";
    }
    actions += n.kind == NodeKind::action ? 1 : 0;
    observations += n.kind == NodeKind::observation ? 1 : 0;
  }
  if (actions != 1) return "single-action";
  if (observations == 0) return "observation-present";
  for (const auto& e : edges_) {
    if (!ids.count(e.parent) || !ids.count(e.child)) return "edge-endpoints";
  }
  try {
    topological_order(nodes_, edges_);
  } catch (const GraphError&) {
    return "acyclic";
  }
  const NodeId action = action_id();
  for (const auto& e : edges_) {
    if (node(e.child).kind == NodeKind::observation) return "observation-roots";
    if (e.parent == action) return "action-sink";
  }
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::observation && !has_edge(n.id, action)) return "initial-edges";
  }

  std::unordered_set<NodeId> forward;
  std::vector<NodeId> stack;
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::observation) {
      forward.insert(n.id);
      stack.push_back(n.id);
    }
  }
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    for (NodeId c : children_of(edges_, cur)) {
      if (forward.insert(c).second) stack.push_back(c);
    }
  }
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::intermediate && (!forward.count(n.id) || !reaches(n.id, action))) {
      return "intermediate-on-path";
    }
  }
  return std::nullopt;
}

NodeId CausalGraph::add_node(NodeKind kind, std::string label, std::optional<int> count) {
  if (label.empty()) throw GraphError("labels", "node labels must be non-empty");
  if (find_label(label)) throw GraphError("unique-labels", "duplicate label '" + label + "'");
  Node n;
  n.id = static_cast<NodeId>(next_order_);
  n.order = next_order_;
  n.kind = kind;
  n.label = std::move(label);
  n.count = count;
  ++next_order_;
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

NodeId CausalGraph::add_observation(std::string label) {
  return add_node(NodeKind::observation, std::move(label), std::nullopt);
}

NodeId CausalGraph::add_action() {
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::action) throw GraphError("single-action", "graph already has an action node");
  }
  return add_node(NodeKind::action, std::string(kActionLabel), std::nullopt);
}

NodeId CausalGraph::add_intermediate(std::string label) {
  return add_node(NodeKind::intermediate, std::move(label), 1);
}

void CausalGraph::reinforce(NodeId id) {
  for (auto& n : nodes_) {
    if (n.id == id) {
      if (n.kind != NodeKind::intermediate) throw GraphError("counts", "only intermediates carry counts");
      *n.count += 1;
      return;
    }
  }
  throw GraphError("edge-endpoints", "no node with id " + std::to_string(id));
}

std::optional<std::string> CausalGraph::try_add_edge(NodeId parent, NodeId child) {
  const Node* p = find(parent);
  const Node* c = find(child);
  if (!p || !c) return "edge-endpoints";
  if (has_edge(parent, child)) return std::nullopt;
  if (parent == child || reaches(child, parent)) return "cycle";
  if (p->kind == NodeKind::action) return "action-sink";
  if (c->kind == NodeKind::observation) return "observation-roots";
  edges_.insert({parent, child});
  return std::nullopt;
}

void CausalGraph::remove_intermediate(NodeId id) {
  auto it = std::find_if(nodes_.begin(), nodes_.end(), [id](const Node& n) { return n.id == id; });
  if (it == nodes_.end()) return;
  if (it->kind != NodeKind::intermediate) {
    throw GraphError("permanent-nodes", "observation and action nodes cannot be removed");
  }
  nodes_.erase(it);
  std::erase_if(edges_, [id](const Edge& e) { return e.parent == id || e.child == id; });
}

std::vector<NodeId> CausalGraph::remove_dangling() {
  std::unordered_set<NodeId> forward;
  std::vector<NodeId> stack;
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::observation) {
      forward.insert(n.id);
      stack.push_back(n.id);
    }
  }
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    for (NodeId c : children_of(edges_, cur)) {
      if (forward.insert(c).second) stack.push_back(c);
    }
  }
  std::map<NodeId, std::vector<NodeId>> reverse;
  for (const auto& e : edges_) reverse[e.child].push_back(e.parent);
  std::unordered_set<NodeId> backward;
  const NodeId action = action_id();
  backward.insert(action);
  stack.push_back(action);
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    for (NodeId p : reverse[cur]) {
      if (backward.insert(p).second) stack.push_back(p);
    }
  }
  std::vector<NodeId> removed;
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::intermediate && (!forward.count(n.id) || !backward.count(n.id))) {
      removed.push_back(n.id);
    }
  }
  for (NodeId id : removed) remove_intermediate(id);
  return removed;
}

CausalGraph init_graph(std::span<const std::string> observation_keys) {
  if (observation_keys.empty()) throw GraphError("observation-present", "at least one observation key is required");
  CausalGraph g;
  std::vector<NodeId> obs;
  for (const auto& key : observation_keys) {
    if (key == kActionLabel) throw GraphError("unique-labels", "observation key may not be ACTION");
    if (g.find_label(key)) throw GraphError("unique-labels", "duplicate observation key '" + key + "'");
    obs.push_back(g.add_observation(key));
  }
  const NodeId action = g.add_action();
  for (NodeId o : obs) g.try_add_edge(o, action);
  return g;
}

ApplyResult apply_chains(const CausalGraph& graph, std::span<const CausalChain> chains,
                         const NodeMatcher& matcher) {
  ApplyResult result;
  result.graph = graph;
  CausalGraph& g = result.graph;
  const auto keys = g.observation_keys();
  std::set<NodeId> touched;
  std::set<NodeId> created;

  for (const auto& chain : chains) {
    ChainResult cr;
    cr.chain = chain;
    if (auto bad = chain.problem(keys)) {
      cr.accepted = false;
      cr.reason = *bad;
      result.chains.push_back(std::move(cr));
      continue;
    }
    std::vector<NodeId> path;
    for (std::size_t i = 0; i < chain.labels.size(); ++i) {
      const auto& label = chain.labels[i];
      if (i == 0 || i + 1 == chain.labels.size()) {
        path.push_back(g.find_label(label)->id);
        continue;
      }
      const Node* target = nullptr;
      if (const Node* exact = g.find_label(label); exact && exact->kind == NodeKind::intermediate) {
        target = exact;
      } else if (matcher) {
        for (const Node* cand : g.intermediates()) {
          if (!matcher(label, cand->label)) continue;
          if (!target || *cand->count > *target->count) target = cand;
        }
      }
      NodeId id = 0;
      if (target) {
        id = target->id;
        if (touched.insert(id).second) {
          g.reinforce(id);
          result.reinforced.push_back(target->label);
        }
      } else {
        id = g.add_intermediate(label);
        touched.insert(id);
        created.insert(id);
        result.created.push_back(label);
      }
      path.push_back(id);
    }
    cr.accepted = true;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      if (auto why = g.try_add_edge(path[i], path[i + 1])) {
        cr.rejected_edges.emplace_back(g.node(path[i]).label, g.node(path[i + 1]).label);
        if (cr.reason.empty()) cr.reason = *why;
      }
    }
    result.chains.push_back(std::move(cr));
  }

  std::map<NodeId, std::string> labels;
  for (const auto& n : g.nodes()) labels[n.id] = n.label;
  for (NodeId id : g.remove_dangling()) result.dropped.push_back(labels[id]);
  return result;
}

PruneResult prune_top_k(const CausalGraph& graph, std::size_t k) {
  PruneResult result;
  result.graph = graph;
  auto mids = graph.intermediates();
  std::stable_sort(mids.begin(), mids.end(), [](const Node* a, const Node* b) {
    if (*a->count != *b->count) return *a->count > *b->count;
    return a->order < b->order;
  });
  std::map<NodeId, std::string> labels;
  for (const auto& n : graph.nodes()) labels[n.id] = n.label;
  for (std::size_t i = k; i < mids.size(); ++i) {
    result.pruned.push_back(mids[i]->label);
    result.graph.remove_intermediate(mids[i]->id);
  }
  for (NodeId id : result.graph.remove_dangling()) result.cascaded.push_back(labels[id]);
  return result;
}

std::vector<NodeId> topological_order(std::span<const Node> nodes, const std::set<Edge>& edges) {
  std::map<NodeId, const Node*> by_id;
  for (const auto& n : nodes) by_id[n.id] = &n;
  std::map<NodeId, int> indegree;
  for (const auto& n : nodes) indegree[n.id] = 0;
  for (const auto& e : edges) {
    if (!by_id.count(e.parent) || !by_id.count(e.child)) {
      throw GraphError("edge-endpoints", "edge references a missing node");
    }
    indegree[e.child] += 1;
  }
  using Key = std::tuple<int, std::uint64_t, NodeId>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
  for (const auto& n : nodes) {
    if (indegree[n.id] == 0) ready.emplace(kind_rank(n.kind), n.order, n.id);
  }
  std::vector<NodeId> order;
  while (!ready.empty()) {
    auto [rank, ord, id] = ready.top();
    ready.pop();
    order.push_back(id);
    for (NodeId c : children_of(edges, id)) {
      if (--indegree[c] == 0) {
        const Node* cn = by_id[c];
        ready.emplace(kind_rank(cn->kind), cn->order, c);
      }
    }
  }
  if (order.size() != nodes.size()) throw GraphError("acyclic", "cycle detected in causal graph");
  return order;
}

std::vector<NodeId> topological_order(const CausalGraph& graph) {
  return topological_order(graph.nodes(), graph.edges());
}

}  // namespace som::scm
