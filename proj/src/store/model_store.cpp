#include "som/store/model_store.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include <set>

#include <nlohmann/json.hpp>

namespace som::store {

using nlohmann::json;

namespace {

json graph_to_json(const scm::CausalGraph& g) {
  json nodes = json::array();
  for (std::size_t i = 0; i < g.nodes().size(); ++i) {
    const auto& n = g.nodes()[i];
    nodes.push_back({{"index", i},
                     {"id", n.id},
                     {"kind", scm::to_string(n.kind)},
                     {"label", n.label},
                     {"count", n.count ? json(*n.count) : json(nullptr)},
                     {"order", n.order}});
  }
  json edges = json::array();
  std::size_t i = 0;
  for (const auto& e : g.edges()) edges.push_back({{"index", i++}, {"parent", e.parent}, {"child", e.child}});
  return {{"nodes", nodes}, {"edges", edges}, {"next_order", g.next_order()}};
}

json pool_to_json(std::size_t index, const scm::ExamplePool& pool) {
  json examples = json::array();
  std::size_t i = 0;
  for (const auto& entry : pool.entries()) {
    const auto& ex = entry.example;
    examples.push_back({{"index", i++},
                        {"id", entry.id},
                        {"parent_values", ex.parent_values},
                        {"child_value", ex.child_value},
                        {"reasoning", ex.reasoning},
                        {"link", {{"parents", ex.link.parents}, {"child", ex.link.child}}}});
  }
  return {{"index", index},
          {"opponent", pool.opponent_id()},
          {"capacity", pool.capacity() ? json(*pool.capacity()) : json(nullptr)},
          {"next_id", pool.next_id()},
          {"examples", examples}};
}

// Entries must carry index = position, so reordering is detectable.
void check_indices(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw ArchiveError("format", what + " must be a list");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (arr[i].at("index").get<std::size_t>() != i) throw ArchiveError("order-indices", what + " index mismatch at " + std::to_string(i));
  }
}

scm::CausalGraph graph_from_json(const json& j) {
  check_indices(j.at("nodes"), "nodes");
  check_indices(j.at("edges"), "edges");
  std::vector<scm::Node> nodes;
  for (const auto& n : j.at("nodes")) {
    scm::Node node;
    node.id = n.at("id").get<scm::NodeId>();
    try {
      node.kind = scm::parse_node_kind(n.at("kind").get<std::string>());
    } catch (const scm::GraphError& e) {
      throw ArchiveError(e.invariant(), e.what());
    }
    node.label = n.at("label").get<std::string>();
    if (!n.at("count").is_null()) node.count = n.at("count").get<int>();
    node.order = n.at("order").get<std::uint64_t>();
    nodes.push_back(std::move(node));
  }
  std::vector<scm::Edge> edges;
  for (const auto& e : j.at("edges")) edges.push_back({e.at("parent").get<scm::NodeId>(), e.at("child").get<scm::NodeId>()});
  if (std::set<scm::Edge>(edges.begin(), edges.end()).size() != edges.size()) {
    throw ArchiveError("unique-edges", "duplicate edge");
  }
  try {
    return scm::CausalGraph::from_parts(std::move(nodes), std::move(edges), j.at("next_order").get<std::uint64_t>());
  } catch (const scm::GraphError& e) {
    throw ArchiveError(e.invariant(), e.what());
  }
}

scm::ExamplePool pool_from_json(const json& j) {
  check_indices(j.at("examples"), "examples");
  std::deque<scm::PoolEntry> entries;
  for (const auto& e : j.at("examples")) {
    scm::PoolEntry entry;
    entry.id = e.at("id").get<std::uint64_t>();
    entry.example.parent_values = e.at("parent_values").get<std::map<std::string, std::string>>();
    entry.example.child_value = e.at("child_value").get<std::string>();
    entry.example.reasoning = e.at("reasoning").get<std::string>();
    entry.example.link.parents = e.at("link").at("parents").get<std::vector<std::string>>();
    entry.example.link.child = e.at("link").at("child").get<std::string>();
    if (entry.example.link.parents.empty() || entry.example.parent_values.empty()) {
      throw ArchiveError("example-parents", "example " + std::to_string(entry.id) + " has no parents");
    }
    if (entry.example.link.child.empty()) throw ArchiveError("example-link", "example without a child label");
    entries.push_back(std::move(entry));
  }
  std::optional<std::size_t> capacity;
  if (!j.at("capacity").is_null()) capacity = j.at("capacity").get<std::size_t>();
  try {
    return scm::ExamplePool::from_parts(j.at("opponent").get<std::string>(), capacity, std::move(entries),
                                        j.at("next_id").get<std::uint64_t>());
  } catch (const std::invalid_argument& e) {
    throw ArchiveError("pool-ids", e.what());
  }
}

}  // namespace

std::string save_model(const ModelArchive& archive, const SaveOptions& options) {
  const auto& m = archive.model;
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["game"] = game::to_string(m.game);
  doc["pool_capacity"] = m.pool_capacity ? json(*m.pool_capacity) : json(nullptr);
  doc["graph"] = options.include_graph ? graph_to_json(m.graph) : json(nullptr);
  json pools = json::array();
  if (options.include_pools) {
    std::size_t i = 0;
    for (const auto& [id, pool] : m.pools) pools.push_back(pool_to_json(i++, pool));
  }
  doc["pools"] = pools;
  doc["provenance"] = {{"builder", archive.provenance.builder},
                       {"backend", archive.provenance.backend},
                       {"game", archive.provenance.game},
                       {"created", archive.provenance.created}};
  return std::string(kMagic) + " " + std::to_string(kFormatVersion) + "\n" + doc.dump(2) + "\n";
}

ModelArchive load_model(std::string_view bytes) {
  const auto newline = bytes.find('\n');
  if (newline == std::string_view::npos) throw ArchiveError("format", "missing header line");
  const std::string_view header = bytes.substr(0, newline);
  const std::string expected = std::string(kMagic) + " ";
  if (header.substr(0, expected.size()) != expected) throw ArchiveError("format", "not a model archive");
  if (header.substr(expected.size()) != std::to_string(kFormatVersion)) {
    throw ArchiveError("version", "unsupported archive version '" + std::string(header.substr(expected.size())) + "'");
  }
  json doc;
  try {
    doc = json::parse(bytes.substr(newline + 1));
  } catch (const json::exception& e) {
    throw ArchiveError("format", e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != kFormatVersion) throw ArchiveError("version", "payload version mismatch");
    ModelArchive a;
    try {
      a.model.game = game::parse_game_kind(doc.at("game").get<std::string>());
    } catch (const game::GameError& e) {
      throw ArchiveError("game", e.what());
    }
    if (!doc.at("pool_capacity").is_null()) a.model.pool_capacity = doc.at("pool_capacity").get<std::size_t>();
    else a.model.pool_capacity.reset();
    if (doc.at("graph").is_null()) {
      a.model.graph = agents::OpponentModel::fresh(a.model.game).graph;
    } else {
      a.model.graph = graph_from_json(doc.at("graph"));
      const auto keys = a.model.graph.observation_keys();
      const auto want = agents::graph_keys(a.model.game);
      if (std::set<std::string>(keys.begin(), keys.end()) != std::set<std::string>(want.begin(), want.end())) {
        throw ArchiveError("observation-keys", "graph roots do not match the game's observation keys");
      }
    }
    check_indices(doc.at("pools"), "pools");
    for (const auto& p : doc.at("pools")) {
      auto pool = pool_from_json(p);
      const std::string id = pool.opponent_id();
      if (!a.model.pools.emplace(id, std::move(pool)).second) throw ArchiveError("unique-pools", "duplicate pool for " + id);
    }
    const auto& prov = doc.at("provenance");
    a.provenance = {prov.at("builder").get<std::string>(), prov.at("backend").get<std::string>(),
                    prov.at("game").get<std::string>(), prov.at("created").get<std::string>()};
    return a;
  } catch (const json::exception& e) {
    throw ArchiveError("format", e.what());
  }
}

void write_archive(const std::filesystem::path& path, const ModelArchive& archive, const SaveOptions& options) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << save_model(archive, options);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ModelArchive read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArchiveError("format", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str());
}

std::string creation_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace som::store
