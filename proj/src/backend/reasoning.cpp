#include "som/backend/reasoning.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include <spdlog/spdlog.h>

#include "som/backend/prompts.hpp"
#include "som/common/text.hpp"

namespace som::backend {

namespace {

constexpr std::size_t kMaxValueLength = 200;

std::string strip_decoration(std::string line) {
  static const std::regex bullet(R"(^\s*(?:[-*+]|\d+[.)])\s+)");
  line = std::regex_replace(line, bullet, "");
  line = trim(line);
  while (!line.empty() && line.front() == '`') line.erase(line.begin());
  while (!line.empty() && line.back() == '`') line.pop_back();
  return trim(line);
}

std::string system_prompt() { return std::string(trim(prompt_template("system"))); }

}  // namespace

std::string reflect(const Reasoner& backend, const PromptContext& ctx, const ReflectInput& input) {
  const std::string user = render_prompt("reflect", {{"game", ctx.game},
                                                     {"rules", ctx.rules},
                                                     {"history", input.history.empty() ? "(none)" : input.history},
                                                     {"observation", value_lines(input.observation)},
                                                     {"opponent", ctx.opponent},
                                                     {"action", input.action}});
  return backend.complete(make_request(Purpose::reflect, system_prompt(), user, 0.7, 400));
}

ExtractResult parse_chains(std::string_view text, const std::vector<std::string>& observation_keys) {
  ExtractResult out;
  std::set<std::vector<std::string>> seen;
  for (const auto& raw : split_lines(text)) {
    std::string line = strip_decoration(raw);
    if (line.find("->") == std::string::npos) continue;
    scm::CausalChain chain;
    std::size_t pos = 0;
    for (;;) {
      const auto arrow = line.find("->", pos);
      chain.labels.push_back(trim(std::string_view(line).substr(pos, arrow == std::string::npos ? std::string::npos : arrow - pos)));
      if (arrow == std::string::npos) break;
      pos = arrow + 2;
    }
    if (auto problem = chain.problem(observation_keys)) {
      spdlog::debug("dropping chain line '{}': {}", line, *problem);
      out.dropped.push_back({line, *problem});
      continue;
    }
    if (!seen.insert(chain.labels).second) continue;
    out.chains.push_back(std::move(chain));
  }
  return out;
}

ExtractResult extract(const Reasoner& backend, std::string_view reflection,
                      const std::vector<std::string>& observation_keys) {
  const std::string user = render_prompt("extract", {{"reflection", std::string(reflection)},
                                                     {"keys", join(observation_keys, ", ")}});
  return parse_chains(backend.complete(make_request(Purpose::extract, system_prompt(), user, 0.0, 300)),
                      observation_keys);
}

double jaccard_similarity(std::string_view a, std::string_view b) {
  const auto ta = tokenize(a);
  const auto tb = tokenize(b);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  return static_cast<double>(common) / static_cast<double>(sa.size() + sb.size() - common);
}

namespace {

std::optional<bool> judge_pair(const Reasoner& judge, std::string_view candidate, std::string_view existing) {
  try {
    const std::string user = render_prompt("match", {{"candidate", std::string(candidate)},
                                                     {"existing", std::string(existing)}});
    const auto reply = tokenize(judge.complete(make_request(Purpose::match, system_prompt(), user, 0.0, 8)));
    if (reply.empty()) return std::nullopt;
    if (reply.front() == "yes") return true;
    if (reply.front() == "no") return false;
    return std::nullopt;
  } catch (const BackendError& e) {
    spdlog::warn("match judge failed, using similarity: {}", e.what());
    return std::nullopt;
  }
}

}  // namespace

std::optional<std::string> semantic_match(std::string_view candidate, const std::vector<std::string>& existing,
                                          const scm::SimilarityFn& similarity, double threshold,
                                          const Reasoner* judge) {
  std::optional<std::string> best;
  double best_score = -1.0;
  for (const auto& label : existing) {
    if (judge) {
      if (auto verdict = judge_pair(*judge, candidate, label)) {
        if (*verdict) return label;
        continue;
      }
    }
    const double s = similarity(candidate, label);
    if (s >= threshold && s > best_score) {
      best = label;
      best_score = s;
    }
  }
  return best;
}

scm::NodeMatcher make_node_matcher(scm::SimilarityFn similarity, double threshold, const Reasoner* judge) {
  return [similarity = std::move(similarity), threshold, judge](std::string_view candidate, std::string_view existing) {
    std::vector<std::string> one{std::string(existing)};
    return semantic_match(candidate, one, similarity, threshold, judge).has_value();
  };
}

std::string example_lines(const std::vector<scm::PoolEntry>& examples) {
  if (examples.empty()) return "(none)";
  std::vector<std::string> lines;
  for (const auto& e : examples) {
    std::string line = "- when " + scm::parent_values_text(e.example.parent_values) + " the value was " +
                       e.example.child_value;
    if (!e.example.reasoning.empty()) line += " (" + split_lines(e.example.reasoning).front() + ")";
    lines.push_back(std::move(line));
  }
  return join(lines, "\n");
}

scm::StructuralFunction backend_structural_function(const Reasoner& backend, PromptContext ctx) {
  return [&backend, ctx = std::move(ctx)](const scm::NodeQuery& q) -> scm::NodeValue {
    const bool is_action = q.kind == scm::NodeKind::action;
    const std::string instruction =
        is_action ? "Give the opponent's next action. " + ctx.format
                  : "Give the value of this hidden step as a number or a short phrase.";
    const std::string user = render_prompt("infer-node", {{"game", ctx.game},
                                                          {"opponent", ctx.opponent},
                                                          {"node", q.label},
                                                          {"kind", std::string(scm::to_string(q.kind))},
                                                          {"inputs", value_lines(q.parent_values)},
                                                          {"examples", example_lines(q.examples)},
                                                          {"instruction", instruction}});
    const std::string reply = backend.complete(make_request(Purpose::infer, system_prompt(), user, 0.0, 200));
    std::string first;
    std::vector<std::string> rest;
    for (const auto& line : split_lines(reply)) {
      const std::string t = trim(line);
      if (t.empty()) continue;
      if (first.empty()) first = t;
      else rest.push_back(t);
    }
    if (first.empty()) throw BackendError("empty value for node " + q.label);
    static const std::regex prefix(R"(^[A-Za-z][A-Za-z _-]{0,40}\s*[:=]\s*(.+)$)");
    std::smatch m;
    if (std::regex_match(first, m, prefix)) first = trim(m[1].str());
    while (!first.empty() && first.back() == '.') first.pop_back();
    if (first.size() > kMaxValueLength) first.resize(kMaxValueLength);
    return {first, join(rest, " ")};
  };
}

}  // namespace som::backend
