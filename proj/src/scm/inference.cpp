#include "som/scm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "som/common/text.hpp"

namespace som::scm {

InferenceTrace infer(const CausalGraph& graph, const std::map<std::string, std::string>& observation_values,
                     const ExamplePool* pool, const StructuralFunction& fn, const InferenceOptions& options) {
  InferenceTrace trace;
  std::map<NodeId, std::string> values;
  for (NodeId id : topological_order(graph)) {
    const Node& node = graph.node(id);
    if (node.kind == NodeKind::observation) {
      auto it = observation_values.find(node.label);
      if (it == observation_values.end()) {
        throw std::invalid_argument("infer: no value supplied for observation '" + node.label + "'");
      }
      values[id] = it->second;
      trace.root_values[node.label] = it->second;
      continue;
    }

    NodeRecord rec;
    rec.node = id;
    rec.label = node.label;
    TargetLink link;
    for (NodeId p : graph.parents(id)) {
      const auto& pl = graph.node(p).label;
      rec.parent_values[pl] = values.at(p);
      link.parents.push_back(pl);
    }
    std::sort(link.parents.begin(), link.parents.end());
    link.child = node.label;

    NodeQuery query;
    query.label = node.label;
    query.kind = node.kind;
    query.parent_values = rec.parent_values;
    if (options.use_examples && pool && options.similarity) {
      query.examples = retrieve_examples(*pool, rec.parent_values, link, std::max<std::size_t>(1, options.top_m),
                                         options.similarity);
      for (const auto& e : query.examples) rec.example_ids.push_back(e.id);
    }

    try {
      NodeValue v = fn(query);
      rec.value = trim(v.value);
      rec.reasoning = std::move(v.reasoning);
    } catch (const std::exception& e) {
      rec.fallback = true;
      rec.error = e.what();
      rec.value.clear();
      if (node.kind == NodeKind::action && options.action_fallback) rec.value = options.action_fallback();
    }
    values[id] = rec.value;
    if (node.kind == NodeKind::action) {
      trace.predicted_action = rec.value;
      trace.action_fallback = rec.fallback;
    }
    trace.records.push_back(std::move(rec));
  }
  return trace;
}

bool MatchPredicate::operator()(std::string_view predicted, std::string_view actual) const {
  if (tolerance) {
    auto p = parse_number(predicted);
    auto a = parse_number(actual);
    if (p && a) return std::fabs(*p - *a) <= *tolerance + 1e-12;
  }
  return trim(predicted) == trim(actual);
}

std::size_t credit_assign(const InferenceTrace& trace, std::string_view predicted, std::string_view actual,
                          const MatchPredicate& predicate, ExamplePool& pool) {
  if (!predicate(predicted, actual)) return 0;
  std::size_t added = 0;
  for (const auto& rec : trace.records) {
    if (rec.fallback || rec.parent_values.empty()) continue;
    ReasoningExample ex;
    ex.parent_values = rec.parent_values;
    ex.child_value = rec.value;
    ex.reasoning = rec.reasoning;
    for (const auto& [label, _] : rec.parent_values) ex.link.parents.push_back(label);
    ex.link.child = rec.label;
    pool.append(std::move(ex));
    ++added;
  }
  return added;
}

}  // namespace som::scm
