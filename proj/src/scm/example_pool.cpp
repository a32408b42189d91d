#include "som/scm/example_pool.hpp"

#include <algorithm>
#include <stdexcept>

namespace som::scm {

ExamplePool::ExamplePool(std::string opponent_id, std::optional<std::size_t> capacity)
    : opponent_id_(std::move(opponent_id)), capacity_(capacity) {
  if (capacity_ && *capacity_ == 0) throw std::invalid_argument("pool capacity must be positive");
}

ExamplePool ExamplePool::from_parts(std::string opponent_id, std::optional<std::size_t> capacity,
                                    std::deque<PoolEntry> entries, std::uint64_t next_id) {
  ExamplePool pool(std::move(opponent_id), capacity);
  std::optional<std::uint64_t> prev;
  for (const auto& e : entries) {
    if (prev && e.id <= *prev) throw std::invalid_argument("pool entry ids must increase");
    if (e.id >= next_id) throw std::invalid_argument("pool entry id not below next id");
    if (e.example.link.parents.empty()) throw std::invalid_argument("example without parent labels");
    prev = e.id;
  }
  if (capacity && entries.size() > *capacity) throw std::invalid_argument("pool exceeds its capacity");
  pool.entries_ = std::move(entries);
  pool.next_id_ = next_id;
  return pool;
}

void ExamplePool::append(ReasoningExample example) {
  if (example.link.parents.empty()) throw std::invalid_argument("example needs at least one parent label");
  std::sort(example.link.parents.begin(), example.link.parents.end());
  entries_.push_back({next_id_++, std::move(example)});
  while (capacity_ && entries_.size() > *capacity_) entries_.pop_front();
}

std::string parent_values_text(const std::map<std::string, std::string>& values) {
  std::string out;
  for (const auto& [label, value] : values) {
    if (!out.empty()) out += "; ";
    out += label + "=" + value;
  }
  return out;
}

std::vector<PoolEntry> retrieve_examples(const ExamplePool& pool,
                                         const std::map<std::string, std::string>& query,
                                         const TargetLink& link, std::size_t m,
                                         const SimilarityFn& similarity) {
  if (m == 0) throw std::invalid_argument("retrieve_examples: M must be >= 1");
  const std::string query_text = parent_values_text(query);
  std::vector<std::pair<double, const PoolEntry*>> scored;
  for (const auto& e : pool.entries()) {
    if (e.example.link.child != link.child) continue;
    scored.emplace_back(similarity(query_text, parent_values_text(e.example.parent_values)), &e);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second->id > b.second->id;
  });
  std::vector<PoolEntry> out;
  for (std::size_t i = 0; i < scored.size() && i < m; ++i) out.push_back(*scored[i].second);
  return out;
}

}  // namespace som::scm
