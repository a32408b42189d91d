#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace som::scm {

/// Which structural relation an example instantiates.
struct TargetLink {
  std::vector<std::string> parents;  // sorted, non-empty
  std::string child;

  bool operator==(const TargetLink&) const = default;
};

/// One validated parent-to-child reasoning step.
struct ReasoningExample {
  std::map<std::string, std::string> parent_values;
  std::string child_value;
  std::string reasoning;
  TargetLink link;

  bool operator==(const ReasoningExample&) const = default;
};

struct PoolEntry {
  std::uint64_t id = 0;  // assigned on append, increasing
  ReasoningExample example;

  bool operator==(const PoolEntry&) const = default;
};

inline constexpr std::size_t kDefaultPoolCapacity = 200;

/// Opponent-specific, append-only store of reasoning examples. Oldest
/// entries are evicted once capacity is exceeded.
class ExamplePool {
 public:
  explicit ExamplePool(std::string opponent_id = {},
                       std::optional<std::size_t> capacity = kDefaultPoolCapacity);

  /// Restores a stored pool; ids must be strictly increasing and below
  /// `next_id`.
  static ExamplePool from_parts(std::string opponent_id, std::optional<std::size_t> capacity,
                                std::deque<PoolEntry> entries, std::uint64_t next_id);

  void append(ReasoningExample example);

  const std::string& opponent_id() const { return opponent_id_; }
  std::optional<std::size_t> capacity() const { return capacity_; }
  const std::deque<PoolEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::uint64_t next_id() const { return next_id_; }

  bool operator==(const ExamplePool&) const = default;

 private:
  std::string opponent_id_;
  std::optional<std::size_t> capacity_;
  std::deque<PoolEntry> entries_;
  std::uint64_t next_id_ = 0;
};

/// "label=value; label=value" in label order; the retrieval query form.
std::string parent_values_text(const std::map<std::string, std::string>& values);

using SimilarityFn = std::function<double(std::string_view, std::string_view)>;

/// Up to `m` entries whose link child equals `link.child`, by similarity of
/// parent-value text (desc), then newest first.
std::vector<PoolEntry> retrieve_examples(const ExamplePool& pool,
                                         const std::map<std::string, std::string>& query,
                                         const TargetLink& link, std::size_t m,
                                         const SimilarityFn& similarity);

}  // namespace som::scm
