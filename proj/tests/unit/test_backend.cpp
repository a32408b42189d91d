#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <set>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "som/backend/http.hpp"
#include "som/backend/prompts.hpp"
#include "som/backend/reasoning.hpp"
#include "som/backend/scripted.hpp"
#include "som/common/rng.hpp"
#include "som/common/text.hpp"

using namespace som;
using namespace som::backend;

namespace {

ScriptedReasoner scripted(std::string_view rules) { return ScriptedReasoner(ScriptedRuleSet::parse(rules)); }

std::string ask(const Reasoner& r, Purpose p, const std::string& user) {
  return r.complete(make_request(p, "", user));
}

/// Local chat-completions stand-in listening on an ephemeral port.
class MockServer {
 public:
  explicit MockServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post(R"(/v1/.*)", handler);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }
  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string completion_body(const std::string& text) {
  nlohmann::json j{{"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", text}}}}}}};
  return j.dump();
}

HttpConfig test_config(const std::string& base, std::vector<std::chrono::milliseconds>* sleeps) {
  HttpConfig c;
  c.base_url = base;
  c.model = "mock-model";
  c.timeout = std::chrono::milliseconds(2000);
  c.sleep = [sleeps](std::chrono::milliseconds d) {
    if (sleeps) sleeps->push_back(d);
  };
  return c;
}

}  // namespace

TEST_CASE("scripted infer rule evaluates template arithmetic") {
  auto r = scripted("@infer\n{round(0.8 × last-target)}\n@end\n");
  CHECK(ask(r, Purpose::infer, "last-target = 40") == "32");
  CHECK(ask(r, Purpose::infer, "last-target: 41") == "33");
}

TEST_CASE("scripted constant rule answers its purpose only") {
  auto r = scripted("@reflect\nThe opponent is cautious.\n@end\n");
  CHECK(ask(r, Purpose::reflect, "anything") == "The opponent is cautious.");
  CHECK_THROWS_AS(ask(r, Purpose::act, "anything"), NoRuleError);
}

TEST_CASE("requests are validated") {
  auto r = scripted("@*\nx\n@end\n");
  BackendRequest empty;
  CHECK_THROWS_AS(r.complete(empty), PreconditionError);
  auto only_system = make_request(Purpose::act, "sys", "u");
  only_system.messages.pop_back();
  CHECK_THROWS_AS(r.complete(only_system), PreconditionError);
  auto hot = make_request(Purpose::act, "", "u", -1.0);
  CHECK_THROWS_AS(r.complete(hot), PreconditionError);
  auto tiny = make_request(Purpose::act, "", "u", 0.0, 0);
  CHECK_THROWS_AS(r.complete(tiny), PreconditionError);
}

TEST_CASE("first applicable rule wins and missing variables fall through") {
  auto r = scripted(
      "@infer Variable: ACTION\n{expects-follow}\n@end\n"
      "@infer Variable: ACTION\n{round(0.8 * last-target)}\n@end\n"
      "@infer\n50\n@end\n");
  CHECK(ask(r, Purpose::infer, "Variable: ACTION\n  expects-follow = 26\n  last-target = 40") == "26");
  CHECK(ask(r, Purpose::infer, "Variable: ACTION\n  last-target = 40") == "32");
  CHECK(ask(r, Purpose::infer, "Variable: ACTION\n  last-target = none") == "50");
  CHECK(ask(r, Purpose::infer, "Variable: other") == "50");
}

TEST_CASE("regex captures are exposed as g1, g2") {
  auto r = scripted("@act pick (\\d+) or (\\w+)\nchoice: {g1 + 1} {g2}\n@end\n");
  CHECK(ask(r, Purpose::act, "please pick 41 or banana") == "choice: 42 banana");
}

TEST_CASE("template arithmetic") {
  const std::map<std::string, std::string> vars{{"x", "2.5"}, {"y", "-2.5"}, {"n", "4"}, {"word", "pear"}};
  auto render = [&](std::string_view t) { return ResponseTemplate::parse(t).render(vars); };
  CHECK(render("{1 + 2 * 3}") == "7");
  CHECK(render("{(1 + 2) * 3}") == "9");
  CHECK(render("{round(x)} {round(y)}") == "3 -3");
  CHECK(render("{floor(y)} {ceil(x)} {abs(y)}") == "-3 3 2.5");
  CHECK(render("{min(n, 3, 9)} {max(n, 3, 9)} {clamp(150, 1, 100)}") == "3 9 100");
  CHECK(render("{n − 1} {n ÷ 8}") == "3 0.5");
  CHECK(render("{-n}") == "-4");
  CHECK(render("{{literal}} {word}") == "{literal} pear");
  CHECK_FALSE(render("{missing + 1}"));
  CHECK_FALSE(render("{word + 1}"));
  CHECK_FALSE(render("{n / 0}"));
}

TEST_CASE("malformed rules are rejected at load") {
  CHECK_THROWS_AS(ScriptedRuleSet::parse("@infer\n{round(}\n@end\n"), RulesError);
  CHECK_THROWS_AS(ScriptedRuleSet::parse("@infer\n{nosuch(1)}\n@end\n"), RulesError);
  CHECK_THROWS_AS(ScriptedRuleSet::parse("@guess\nx\n@end\n"), RulesError);
  CHECK_THROWS_AS(ScriptedRuleSet::parse("@infer\nx\n"), RulesError);
  CHECK_THROWS_AS(ScriptedRuleSet::parse("stray text\n"), RulesError);
  CHECK_THROWS_AS(ScriptedRuleSet::parse("@infer [unclosed\nx\n@end\n"), RulesError);
  try {
    ScriptedRuleSet::parse("# c\n\n@infer\n{round(}\n@end\n");
  } catch (const RulesError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("variable extraction") {
  auto vars = extract_variables("Inputs:\n  last-target = 40\n  - Opponent Last.Choice: 12.5\nlast-target = 99\nnot a var 5\n");
  CHECK(vars.at("last_target") == "40");
  CHECK(vars.at("opponent_last_choice") == "12.5");
  CHECK(vars.size() == 2);
}

TEST_CASE("scripted backend is a pure function") {
  auto r = ScriptedReasoner(ScriptedRuleSet::load(SOM_FIXTURE_DIR "/reflect_fixture.rules"));
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const std::string user = "Variable: ACTION\nlast-target = " + std::to_string(rng.uniform_index(100));
    CHECK(ask(r, Purpose::infer, user) == ask(r, Purpose::infer, user));
  }
}

TEST_CASE("reflect uses the observation and action") {
  auto r = ScriptedReasoner(ScriptedRuleSet::load(SOM_FIXTURE_DIR "/reflect_fixture.rules"));
  PromptContext ctx{"G0.8A", "rules", "choice: <n>", "p1"};
  const auto text = reflect(r, ctx, {"anything", {{"last-target", "32"}}, "26"});
  CHECK(text.find("expects-undercut") != std::string::npos);
  CHECK_THROWS_AS(reflect(r, ctx, {"", {{"last-target", "32"}}, "27"}), NoRuleError);
}

TEST_CASE("extract parses chain lines") {
  auto r = ScriptedReasoner(ScriptedRuleSet::load(SOM_FIXTURE_DIR "/reflect_fixture.rules"));
  const std::vector<std::string> keys{"last-target", "last-mean"};
  auto res = extract(r, "whatever", keys);
  REQUIRE(res.chains.size() == 1);
  CHECK(res.chains[0].labels == std::vector<std::string>{"last-target", "expects-undercut", "ACTION"});

  auto dropped = parse_chains("weather -> ACTION\n", keys);
  CHECK(dropped.chains.empty());
  REQUIRE(dropped.dropped.size() == 1);
  CHECK(dropped.dropped[0].reason.find("unknown observation key") != std::string::npos);

  CHECK(parse_chains("", keys).chains.empty());

  auto decorated = parse_chains(
      "Here are the chains:\n1. last-target -> a -> ACTION\n- `last-mean -> ACTION`\n* last-target -> a -> ACTION\n", keys);
  CHECK(decorated.chains.size() == 2);
}

TEST_CASE("property: extracted chains always satisfy chain invariants") {
  const std::vector<std::string> keys{"k1", "k2"};
  const std::vector<std::string> atoms{"k1", "k2", "ACTION", "m", "n", "->", " -> ", "-", ">", "\n", " ", "`", "1.", "*", "", "k3"};
  Rng rng(11);
  for (int i = 0; i < 3000; ++i) {
    std::string text;
    const std::size_t n = rng.uniform_index(25);
    for (std::size_t j = 0; j < n; ++j) text += rng.pick(atoms);
    auto res = parse_chains(text, keys);
    for (const auto& c : res.chains) CHECK_FALSE(c.problem(keys));
  }
}

TEST_CASE("jaccard similarity") {
  CHECK(jaccard_similarity("last target 40", "last target 40") == 1.0);
  CHECK(jaccard_similarity("a b", "c d") == 0.0);
  CHECK(jaccard_similarity("a b c", "b c d") == 0.5);
  CHECK(jaccard_similarity("", "") == 0.0);
  CHECK(jaccard_similarity("Expects-Undercut", "expects undercut") == 1.0);
}

TEST_CASE("property: similarity is symmetric and bounded") {
  const std::vector<std::string> words{"a", "b", "c", "d", "e", "A", "-", " ", "x1", "9"};
  Rng rng(8);
  for (int i = 0; i < 2000; ++i) {
    std::string s, t;
    for (std::size_t j = rng.uniform_index(6); j > 0; --j) s += rng.pick(words) + " ";
    for (std::size_t j = rng.uniform_index(6); j > 0; --j) t += rng.pick(words) + " ";
    const double st = jaccard_similarity(s, t);
    CHECK(st == jaccard_similarity(t, s));
    CHECK(st >= 0.0);
    CHECK(st <= 1.0);
    if (!tokenize(s).empty()) CHECK(jaccard_similarity(s, s) == 1.0);
  }
}

TEST_CASE("semantic_match by similarity") {
  CHECK(semantic_match("expects undercut", {"expects-undercut"}, jaccard_similarity) == std::optional<std::string>("expects-undercut"));
  CHECK_FALSE(semantic_match("weather", {"expects-undercut"}, jaccard_similarity));
  CHECK_FALSE(semantic_match("weather", {}, jaccard_similarity));
  CHECK(semantic_match("expects big undercut", {"expects", "expects-undercut"}, jaccard_similarity) ==
        std::optional<std::string>("expects-undercut"));
}

TEST_CASE("semantic_match judge mode and fallback") {
  auto judge = scripted("@match A: weather\nyes\n@end\n@match\nno\n@end\n");
  CHECK(semantic_match("weather", {"expects-undercut"}, jaccard_similarity, 0.5, &judge) ==
        std::optional<std::string>("expects-undercut"));
  CHECK_FALSE(semantic_match("expects undercut", {"expects-undercut"}, jaccard_similarity, 0.5, &judge));

  auto broken = scripted("@act\nx\n@end\n");
  CHECK(semantic_match("expects undercut", {"expects-undercut"}, jaccard_similarity, 0.5, &broken) ==
        std::optional<std::string>("expects-undercut"));
  auto matcher = make_node_matcher(jaccard_similarity);
  CHECK(matcher("expects undercut", "expects-undercut"));
  CHECK_FALSE(matcher("weather", "expects-undercut"));
}

TEST_CASE("backend structural function drives inference") {
  auto r = ScriptedReasoner(ScriptedRuleSet::parse(
      "@infer Variable: mid\nmid: {last-target - 10}\nbecause\n@end\n"
      "@infer Variable: ACTION\n{mid}.\n@end\n"));
  std::vector<std::string> keys{"last-target"};
  auto g = scm::init_graph(keys);
  std::vector<scm::CausalChain> chains{{{"last-target", "mid", "ACTION"}}};
  g = scm::apply_chains(g, chains, nullptr).graph;
  auto fn = backend_structural_function(r, {"G0.8A", "", "choice: <n>", "p1"});
  auto trace = scm::infer(g, {{"last-target", "50"}}, nullptr, fn, {});
  REQUIRE(trace.records.size() == 2);
  CHECK(trace.records[0].value == "40");
  CHECK(trace.records[0].reasoning == "because");
  CHECK(trace.predicted_action == "40");
}

TEST_CASE("prompt templates are pinned") {
  const std::map<std::string, std::string> pinned{
      {"act-cot", "8ee14e6548776f0b"},          {"act-direct", "5b7933eca25824b9"},
      {"act-kr", "b54a80c749802ced"},           {"act-reflexion", "47c51f9b441e0ed5"},
      {"extract", "dac3b8ca3ea67208"},          {"format-clue", "cfe355f372685c4a"},
      {"format-g08a", "ecb8e205fc6be9bc"},      {"format-sag", "c7ae207188a43a26"},
      {"format-vote", "89f046eafff6f978"},      {"infer-node", "6815c151d32f8b43"},
      {"match", "a343f21d1ca96dc7"},            {"predict-direct", "fab9787253e8f4e8"},
      {"reflect", "7385b630fd839937"},          {"reflexion-reflect", "dc1f2da751ae5c90"},
      {"rules-g08a", "833a1da69cd86f54"},       {"rules-sag", "2e549ba7b5255ffc"},
      {"rules-undercover", "86f0e096abed1150"}, {"som-act", "b2eb737246ea41d0"},
      {"system", "8cf460bae199c83a"},           {"tot-evaluate", "1c249970bfd53c9f"},
      {"tot-propose", "89d29ca1e23dbfe4"},
  };
  CHECK(prompt_names().size() == pinned.size());
  for (const auto& [name, digest] : pinned) {
    CAPTURE(name);
    CHECK(prompt_digest(name) == digest);
  }
}

TEST_CASE("golden extract prompt") {
  const std::string got = render_prompt("extract", {{"reflection", "It follows the target."}, {"keys", "last-target, last-mean"}});
  const std::string want =
      "Reflection about an opponent:\n"
      "It follows the target.\n"
      "\n"
      "Observation keys: last-target, last-mean\n"
      "\n"
      "Rewrite the reflection as causal chains, one per line, in exactly this form:\n"
      "key -> step-label -> step-label -> ACTION\n"
      "Each chain starts with one observation key, passes through zero or more short hyphenated step labels, and ends "
      "with ACTION. Print only chain lines.";
  CHECK(got == want);
  CHECK_THROWS_AS(render_prompt("extract", {{"reflection", "x"}}), std::invalid_argument);
  CHECK_THROWS_AS(prompt_template("nope"), std::out_of_range);
  CHECK(value_lines({{"b", "2"}, {"a", "x\ny"}}) == "  a = x | y\n  b = 2");
}

TEST_CASE("http backend posts chat completions") {
  std::string seen_auth;
  nlohmann::json seen_body;
  MockServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = nlohmann::json::parse(req.body);
    res.set_content(completion_body("choice: 42"), "application/json");
  });
  setenv("SOM_TEST_KEY", "sk-test", 1);
  auto cfg = test_config(server.base(), nullptr);
  cfg.api_key_env = "SOM_TEST_KEY";
  HttpReasoner r(cfg);
  CHECK(r.complete(make_request(Purpose::act, "sys", "go", 0.3, 64)) == "choice: 42");
  CHECK(seen_auth == "Bearer sk-test");
  CHECK(seen_body["model"] == "mock-model");
  CHECK(seen_body["max_tokens"] == 64);
  CHECK(seen_body["messages"].size() == 2);
  CHECK(seen_body["messages"][1]["content"] == "go");
  unsetenv("SOM_TEST_KEY");
}

TEST_CASE("http backend retries transient failures with backoff") {
  std::atomic<int> calls{0};
  MockServer server([&](const httplib::Request&, httplib::Response& res) {
    if (++calls < 3) {
      res.status = calls == 1 ? 503 : 429;
      return;
    }
    res.set_content(completion_body("ok"), "application/json");
  });
  std::vector<std::chrono::milliseconds> sleeps;
  HttpReasoner r(test_config(server.base(), &sleeps));
  CHECK(r.complete(make_request(Purpose::act, "", "go")) == "ok");
  CHECK(calls == 3);
  CHECK(sleeps == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(500), std::chrono::milliseconds(1000)});
}

TEST_CASE("http backend gives up with a typed error") {
  std::atomic<int> calls{0};
  MockServer server([&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    res.status = req.body.find("bad") != std::string::npos ? 400 : 500;
  });
  HttpReasoner r(test_config(server.base(), nullptr));
  try {
    r.complete(make_request(Purpose::act, "", "go"));
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(e.status() == 500);
    CHECK(e.attempts() == 3);
    CHECK(e.retryable());
  }
  CHECK(calls == 3);
  try {
    r.complete(make_request(Purpose::act, "", "bad"));
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(e.status() == 400);
    CHECK(e.attempts() == 1);
    CHECK_FALSE(e.retryable());
  }
}

TEST_CASE("http backend times out and reports connection failures") {
  MockServer server([&](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(completion_body("late"), "application/json");
  });
  auto cfg = test_config(server.base(), nullptr);
  cfg.timeout = std::chrono::milliseconds(150);
  cfg.max_attempts = 2;
  HttpReasoner slow(cfg);
  const auto start = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(slow.complete(make_request(Purpose::act, "", "go")), TransportError);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(5));

  auto closed = test_config("http://127.0.0.1:1/v1", nullptr);
  closed.timeout = std::chrono::milliseconds(300);
  HttpReasoner refused(closed);
  try {
    refused.complete(make_request(Purpose::act, "", "go"));
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(e.status() == 0);
  }
}

TEST_CASE("http backend rejects malformed responses and configs") {
  MockServer server([&](const httplib::Request&, httplib::Response& res) { res.set_content("{\"choices\":[]}", "application/json"); });
  HttpReasoner r(test_config(server.base(), nullptr));
  CHECK_THROWS_AS(r.complete(make_request(Purpose::act, "", "go")), TransportError);
  CHECK_THROWS_AS(HttpReasoner(test_config("", nullptr)), PreconditionError);
  CHECK_THROWS_AS(HttpReasoner(test_config("no-scheme", nullptr)), PreconditionError);
}

TEST_CASE("embedding similarity over http") {
  MockServer server([&](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    const std::string input = body["input"];
    std::vector<double> v = input == "up" ? std::vector<double>{1, 0} : input == "down" ? std::vector<double>{-1, 0}
                                                                                      : std::vector<double>{0, 1};
    res.set_content(nlohmann::json{{"data", {{{"embedding", v}}}}}.dump(), "application/json");
  });
  HttpEmbeddingSimilarity sim(test_config(server.base(), nullptr), "embed-model");
  CHECK(sim("up", "up") == doctest::Approx(1.0));
  CHECK(sim("up", "down") == doctest::Approx(0.0));
  CHECK(sim("up", "side") == doctest::Approx(0.5));
  CHECK(sim("side", "up") == sim("up", "side"));
}
