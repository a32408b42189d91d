#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "som/common/rng.hpp"
#include "som/store/model_store.hpp"
#include "support/fixtures.hpp"
#include "support/scm_generators.hpp"

using namespace som;
using namespace som::store;
using nlohmann::json;

namespace {

Provenance prov() { return {"som", "fixture-a", "g08a", "2024-01-01T00:00:00Z"}; }

/// last-target -> m1 -> m2 -> ACTION on the G0.8A roots, plus one pool.
agents::OpponentModel chain_model() {
  auto m = agents::OpponentModel::fresh(game::GameKind::g08a);
  const std::vector<scm::CausalChain> chains{{{"last-target", "m1", "m2", "ACTION"}}};
  m.graph = scm::apply_chains(m.graph, chains, som::testing::exact_matcher).graph;
  auto& pool = m.pool("p1");
  pool.append({{{"last-target", "40"}}, "32", "scaled", {{"last-target"}, "m1"}});
  pool.append({{{"m1", "32"}}, "30", "", {{"m1"}, "m2"}});
  return m;
}

agents::OpponentModel random_model(Rng& rng) {
  const game::GameKind kinds[] = {game::GameKind::g08a, game::GameKind::sag, game::GameKind::undercover};
  const auto kind = kinds[rng.uniform_index(3)];
  std::optional<std::size_t> cap;
  if (rng.uniform_index(2)) cap = 1 + rng.uniform_index(6);
  auto m = agents::OpponentModel::fresh(kind, cap);
  const auto keys = agents::graph_keys(kind);
  for (int step = 0; step < 3; ++step) {
    auto chains = som::testing::random_chains(rng, keys, 6, 3, 3);
    m.graph = scm::apply_chains(m.graph, chains, som::testing::exact_matcher).graph;
  }
  if (rng.uniform_index(2)) m.graph = scm::prune_top_k(m.graph, 1 + rng.uniform_index(3)).graph;
  const std::size_t opponents = rng.uniform_index(3);
  for (std::size_t o = 0; o < opponents; ++o) {
    auto& pool = m.pool("opp-" + std::to_string(o));
    const std::size_t n = rng.uniform_index(9);
    for (std::size_t i = 0; i < n; ++i) {
      pool.append({{{keys.front(), std::to_string(rng.uniform_index(100))}},
                   std::to_string(rng.uniform_index(100)),
                   i % 2 ? "line one\nline \"two\"" : "",
                   {{keys.front()}, "ACTION"}});
    }
  }
  return m;
}

std::string tamper(const std::string& bytes, const std::function<void(json&)>& edit) {
  const auto nl = bytes.find('\n');
  json doc = json::parse(bytes.substr(nl + 1));
  edit(doc);
  return bytes.substr(0, nl + 1) + doc.dump(2) + "\n";
}

json& node_labelled(json& doc, const std::string& label) {
  for (auto& n : doc["graph"]["nodes"]) {
    if (n["label"] == label) return n;
  }
  throw std::runtime_error("no node " + label);
}

int id_of(json& doc, const std::string& label) { return node_labelled(doc, label)["id"].get<int>(); }

void add_edge(json& doc, int parent, int child) {
  auto& edges = doc["graph"]["edges"];
  edges.push_back({{"index", edges.size()}, {"parent", parent}, {"child", child}});
}

void drop_edge(json& doc, int parent, int child) {
  auto& edges = doc["graph"]["edges"];
  json kept = json::array();
  for (auto& e : edges) {
    if (!(e["parent"] == parent && e["child"] == child)) kept.push_back(e);
  }
  for (std::size_t i = 0; i < kept.size(); ++i) kept[i]["index"] = i;
  edges = kept;
}

std::string rejected_invariant(const std::string& bytes) {
  try {
    load_model(bytes);
  } catch (const ArchiveError& e) {
    return e.invariant();
  }
  return "accepted";
}

}  // namespace

TEST_CASE("store: fresh model archive holds roots, action, direct edges") {
  const auto fresh = agents::OpponentModel::fresh(game::GameKind::g08a);
  const auto bytes = save_model({fresh, prov()});
  CHECK(bytes.rfind("SOMMODEL 1\n", 0) == 0);
  const auto doc = json::parse(bytes.substr(bytes.find('\n') + 1));
  CHECK(doc["graph"]["nodes"].size() == agents::graph_keys(game::GameKind::g08a).size() + 1);
  CHECK(doc["graph"]["edges"].size() == agents::graph_keys(game::GameKind::g08a).size());
  CHECK(doc["pools"].empty());
}

TEST_CASE("store: counts round-trip exactly") {
  auto m = chain_model();
  const std::vector<scm::CausalChain> again{{{"last-target", "m1", "ACTION"}}};
  for (int i = 0; i < 2; ++i) m.graph = scm::apply_chains(m.graph, again, som::testing::exact_matcher).graph;
  REQUIRE(m.graph.find_label("m1")->count == 3);
  const auto loaded = load_model(save_model({m, prov()}));
  CHECK(loaded.model.graph.find_label("m1")->count == 3);
  CHECK(loaded.model == m);
  CHECK(loaded.provenance == prov());
}

TEST_CASE("store: randomized round trip and canonical bytes") {
  Rng rng(404);
  for (int t = 0; t < 300; ++t) {
    const ModelArchive a{random_model(rng), prov()};
    const auto bytes = save_model(a);
    const auto back = load_model(bytes);
    CHECK(back == a);
    CHECK(save_model(back) == bytes);
    CHECK(save_model(a) == bytes);
  }
}

TEST_CASE("store: excluded parts load as defaults") {
  const auto m = chain_model();
  auto no_graph = load_model(save_model({m, prov()}, {false, true}));
  CHECK(no_graph.model.graph == agents::OpponentModel::fresh(game::GameKind::g08a).graph);
  CHECK(no_graph.model.pools == m.pools);
  auto no_pools = load_model(save_model({m, prov()}, {true, false}));
  CHECK(no_pools.model.graph == m.graph);
  CHECK(no_pools.model.pools.empty());
}

TEST_CASE("store: crafted archives are rejected with the invariant named") {
  const auto bytes = save_model({chain_model(), prov()});
  REQUIRE(rejected_invariant(bytes) == "accepted");

  CHECK(rejected_invariant("SOMMODEL 2\n{}") == "version");
  CHECK(rejected_invariant("NOTMODEL 1\n{}") == "format");
  CHECK(rejected_invariant("SOMMODEL 1\n{not json") == "format");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) { d["format_version"] = 7; })) == "version");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) { d.erase("graph"); })) == "format");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) { add_edge(d, id_of(d, "m1"), 999); })) == "edge-endpoints");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) { add_edge(d, id_of(d, "m2"), id_of(d, "m1")); })) == "acyclic");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) { add_edge(d, id_of(d, "m1"), id_of(d, "last-mean")); })) ==
        "observation-roots");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) { drop_edge(d, id_of(d, "m2"), id_of(d, "ACTION")); })) ==
        "intermediate-on-path");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) { drop_edge(d, id_of(d, "last-mean"), id_of(d, "ACTION")); })) ==
        "initial-edges");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) { node_labelled(d, "m2")["label"] = "m1"; })) == "unique-labels");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) { node_labelled(d, "m2")["count"] = 0; })) == "counts");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) {
          node_labelled(d, "m2")["kind"] = "action";
          node_labelled(d, "m2")["count"] = nullptr;
        })) ==
        "single-action");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) { node_labelled(d, "m2")["kind"] = "oracle"; })) == "node-kind");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) { node_labelled(d, "m2")["order"] = 1000; })) ==
        "insertion-order");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) { d["graph"]["nodes"][0]["index"] = 5; })) == "order-indices");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) {
          auto e = d["graph"]["edges"][0];
          e["index"] = d["graph"]["edges"].size();
          d["graph"]["edges"].push_back(e);
        })) == "unique-edges");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) { node_labelled(d, "last-mean")["label"] = "shoe-size"; })) ==
        "observation-keys");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) { d["pools"][0]["examples"][1]["id"] = 0; })) == "pool-ids");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) {
          d["pools"][0]["examples"][0]["link"]["parents"] = json::array();
        })) == "example-parents");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) {
          auto p = d["pools"][0];
          p["index"] = 1;
          d["pools"].push_back(p);
        })) == "unique-pools");
  CHECK(rejected_invariant(tamper(bytes, [](json& d) { d["game"] = "chess"; })) == "game");
}

TEST_CASE("store: archives move across backends without changing predictions") {
  const auto a = som::testing::fixture_backend("learn_a.rules", "fixture-a");
  const auto b = som::testing::fixture_backend("learn_b.rules", "fixture-b");
  const agents::SomParams params;
  const auto model = som::testing::train_against_follower(a, params, 2, 7);
  REQUIRE_FALSE(model.graph.intermediates().empty());

  const auto bytes = save_model({model, prov()});
  const auto imported = load_model(bytes);
  CHECK(save_model(imported) == bytes);
  for (const auto& backend : {a, b}) {
    const auto original = som::testing::predictions_with(model, backend, params);
    const auto transferred = som::testing::predictions_with(imported.model, backend, params);
    CHECK(original == transferred);
  }
}

TEST_CASE("store: files and timestamps") {
  const auto dir = std::filesystem::temp_directory_path() / "som_store_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / (std::string("model") + std::string(kExtension));
  const ModelArchive a{chain_model(), prov()};
  write_archive(path, a);
  CHECK(read_archive(path) == a);
  CHECK_THROWS_AS(read_archive(dir / "missing.somm"), ArchiveError);
  std::filesystem::remove_all(dir);

  setenv("SOURCE_DATE_EPOCH", "86400", 1);
  CHECK(creation_timestamp() == "1970-01-02T00:00:00Z");
  unsetenv("SOURCE_DATE_EPOCH");
}
