#include <doctest.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <set>

#include "som/common/text.hpp"
#include "som/game/config.hpp"
#include "som/game/game.hpp"
#include "som/game/round_log.hpp"
#include "som/game/rules.hpp"

using namespace som;
using namespace som::game;

namespace {

GameState sag_state(int players, int hp = 10, std::int64_t budget = 100) {
  GameState s;
  s.players.assign(static_cast<std::size_t>(players), PlayerStatus{});
  for (auto& p : s.players) {
    p.hp = hp;
    p.budget = budget;
  }
  s.cumulative_reward.assign(static_cast<std::size_t>(players), 0.0);
  s.phase = Phase::bid;
  return s;
}

GameState undercover_state(const std::vector<Role>& roles) {
  GameState s;
  for (auto r : roles) {
    PlayerStatus p;
    p.role = r;
    p.word = r == Role::civilian ? "apple" : "pear";
    s.players.push_back(p);
  }
  s.cumulative_reward.assign(roles.size(), 0.0);
  s.phase = Phase::vote;
  return s;
}

GameSpec spec_of(GameKind kind, int players, int horizon = 10, std::uint64_t seed = 7) {
  GameSpec spec;
  spec.kind = kind;
  spec.num_players = players;
  spec.horizon = horizon;
  spec.seed = seed;
  spec.params = default_params(kind);
  return spec;
}

}  // namespace

TEST_CASE("g08a_step picks the choice nearest 0.8 of the mean") {
  G08AParams params;
  std::vector<std::int64_t> choices{20, 40, 60};
  auto out = g08a_step(choices, params);
  const auto& rec = std::get<G08ARecord>(out.reveal);
  CHECK(rec.mean == doctest::Approx(40.0));
  CHECK(rec.target == doctest::Approx(32.0));
  REQUIRE(out.winners == std::vector<PlayerId>{1});
  CHECK(out.rewards == std::vector<double>{0.0, 1.0, 0.0});
}

TEST_CASE("g08a_step shares reward on ties") {
  G08AParams params;
  std::vector<std::int64_t> same{50, 50, 50};
  auto out = g08a_step(same, params);
  CHECK(std::get<G08ARecord>(out.reveal).target == doctest::Approx(40.0));
  CHECK(out.winners.size() == 3);
  for (double r : out.rewards) CHECK(r == doctest::Approx(1.0 / 3.0));

  std::vector<std::int64_t> ones{1, 1};
  auto low = g08a_step(ones, params);
  CHECK(std::get<G08ARecord>(low.reveal).target == doctest::Approx(0.8));
  CHECK(low.rewards == std::vector<double>{0.5, 0.5});
}

TEST_CASE("g08a_step rejects out-of-range choices naming the player") {
  G08AParams params;
  std::vector<std::int64_t> choices{10, 101, 5};
  try {
    g08a_step(choices, params);
    FAIL("expected InvalidAction");
  } catch (const InvalidAction& e) {
    CHECK(e.player() == 1);
  }
}

TEST_CASE("g08a winners are permutation equivariant and target stays bounded") {
  G08AParams params;
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(5);
    std::vector<std::int64_t> choices(n);
    for (auto& c : choices) c = 1 + static_cast<std::int64_t>(rng.uniform_index(100));
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<std::int64_t> permuted(n);
    for (std::size_t i = 0; i < n; ++i) permuted[i] = choices[perm[i]];

    auto a = g08a_step(choices, params);
    auto b = g08a_step(permuted, params);
    std::set<PlayerId> mapped;
    for (auto w : b.winners) mapped.insert(static_cast<PlayerId>(perm[static_cast<std::size_t>(w)]));
    CHECK(mapped == std::set<PlayerId>(a.winners.begin(), a.winners.end()));

    const double t = std::get<G08ARecord>(a.reveal).target;
    CHECK(t >= 0.8 * params.action_min - 1e-12);
    CHECK(t <= 0.8 * params.action_max + 1e-12);
  }
}

TEST_CASE("sag_step first-price example") {
  auto state = sag_state(3);
  SagParams params;
  Rng rng(1);
  std::vector<std::optional<std::int64_t>> bids{10, 20, 15};
  auto out = sag_step(bids, state, params, 10, rng);
  REQUIRE(out.winners == std::vector<PlayerId>{1});
  CHECK(state.players[1].budget == 80);
  CHECK(state.players[0].budget == 100);
  CHECK(state.players[0].hp == 8);
  CHECK(state.players[1].hp == 10);
  CHECK(state.players[2].hp == 8);
  const auto& rec = std::get<SagRecord>(out.reveal);
  CHECK(rec.price == 20);
  CHECK_FALSE(out.terminal);
}

TEST_CASE("sag_step all-zero bids resolve by seeded draw") {
  SagParams params;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto state = sag_state(2);
    Rng rng(seed);
    Rng expected(seed);
    std::vector<std::optional<std::int64_t>> bids{0, 0};
    auto out = sag_step(bids, state, params, 10, rng);
    const PlayerId pick = expected.pick(std::vector<PlayerId>{0, 1});
    REQUIRE(out.winners.size() == 1);
    CHECK(out.winners[0] == pick);
    CHECK(state.players[static_cast<std::size_t>(1 - pick)].hp == 8);
  }
}

TEST_CASE("sag_step single survivor wins and ends the episode") {
  auto state = sag_state(2);
  state.players[0].alive = false;
  state.players[0].hp = 0;
  SagParams params;
  Rng rng(3);
  std::vector<std::optional<std::int64_t>> bids{std::nullopt, 5};
  auto out = sag_step(bids, state, params, 10, rng);
  CHECK(out.winners == std::vector<PlayerId>{1});
  CHECK(state.players[1].budget == 95);
  CHECK(out.terminal);
}

TEST_CASE("sag_step rejects bids above budget") {
  auto state = sag_state(2, 10, 15);
  SagParams params;
  Rng rng(3);
  std::vector<std::optional<std::int64_t>> bids{16, 1};
  CHECK_THROWS_AS(sag_step(bids, state, params, 10, rng), InvalidAction);
}

TEST_CASE("sag conservation over random rounds") {
  SagParams params;
  Rng rng(99);
  for (int ep = 0; ep < 50; ++ep) {
    auto state = sag_state(4);
    Rng game_rng(static_cast<std::uint64_t>(ep));
    while (!state.terminal) {
      auto before = state.players;
      std::vector<std::optional<std::int64_t>> bids(4);
      for (std::size_t i = 0; i < 4; ++i) {
        if (state.players[i].alive)
          bids[i] = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::size_t>(state.players[i].budget) + 1));
      }
      auto out = sag_step(bids, state, params, 10, game_rng);
      int changed = 0;
      for (std::size_t i = 0; i < 4; ++i) {
        if (state.players[i].budget != before[i].budget) {
          ++changed;
          CHECK(before[i].budget - state.players[i].budget == std::get<SagRecord>(out.reveal).price);
        }
        CHECK(state.players[i].hp <= params.hp_cap);
        CHECK(state.players[i].budget >= 0);
      }
      CHECK(changed <= 1);  // a zero winning bid changes nothing
    }
  }
}

TEST_CASE("undercover plurality vote eliminates the undercover") {
  auto state = undercover_state({Role::civilian, Role::civilian, Role::civilian, Role::undercover});
  UndercoverParams params;
  params.max_clue_rounds = 3;
  Rng rng(1);
  VotePhase votes;
  votes.votes = {{0, 3}, {1, 3}, {2, 3}, {3, 0}};
  auto out = undercover_step(votes, state, params, 10, rng);
  CHECK_FALSE(state.players[3].alive);
  CHECK(out.terminal);
  CHECK(state.winning_team == Role::civilian);
  CHECK(out.winners == std::vector<PlayerId>{0, 1, 2});
}

TEST_CASE("undercover parity win") {
  auto state = undercover_state({Role::civilian, Role::civilian, Role::undercover, Role::civilian});
  state.players[3].alive = false;
  UndercoverParams params;
  Rng rng(1);
  VotePhase votes;
  votes.votes = {{0, 1}, {1, 2}, {2, 1}};
  auto out = undercover_step(votes, state, params, 10, rng);
  CHECK_FALSE(state.players[1].alive);
  CHECK(out.terminal);
  CHECK(state.winning_team == Role::undercover);
  CHECK(out.winners == std::vector<PlayerId>{2});
}

TEST_CASE("undercover three-way vote tie is a seeded draw") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto state = undercover_state({Role::civilian, Role::civilian, Role::civilian, Role::undercover});
    state.players[3].alive = false;
    state.players[3].role = Role::civilian;
    state.players[2].role = Role::undercover;
    UndercoverParams params;
    Rng rng(seed);
    Rng expected(seed);
    VotePhase votes;
    votes.votes = {{0, 1}, {1, 2}, {2, 0}};
    auto out = undercover_step(votes, state, params, 10, rng);
    const auto& rec = std::get<UndercoverRecord>(out.reveal);
    REQUIRE(rec.eliminated);
    CHECK(*rec.eliminated == expected.pick(std::vector<PlayerId>{0, 1, 2}));
  }
}

TEST_CASE("undercover rejects votes for self or the dead") {
  auto state = undercover_state({Role::civilian, Role::civilian, Role::undercover});
  UndercoverParams params;
  Rng rng(1);
  VotePhase self_vote;
  self_vote.votes = {{0, 0}, {1, 2}, {2, 1}};
  CHECK_THROWS_AS(undercover_step(self_vote, state, params, 10, rng), InvalidAction);
}

TEST_CASE("undercover rounds exhausted hands the win to a surviving undercover") {
  auto state = undercover_state({Role::civilian, Role::civilian, Role::civilian, Role::civilian, Role::undercover});
  UndercoverParams params;
  params.max_clue_rounds = 1;
  Rng rng(1);
  VotePhase votes;
  votes.votes = {{0, 1}, {1, 0}, {2, 1}, {3, 1}, {4, 1}};
  auto out = undercover_step(votes, state, params, 10, rng);
  CHECK(out.terminal);
  CHECK(state.winning_team == Role::undercover);
}

TEST_CASE("observation_for reveals g08a choices and target after a round") {
  Game game(spec_of(GameKind::g08a, 3));
  auto first = game.observation_for(0);
  CHECK_FALSE(first.get("last-target"));
  CHECK_FALSE(first.get("history"));
  game.step({{0, std::int64_t{20}}, {1, std::int64_t{40}}, {2, std::int64_t{60}}});
  auto obs = game.observation_for(2);
  CHECK(obs.get("last-target") == "32");
  CHECK(obs.get("last-choice.0") == "20");
  CHECK(obs.get("last-choice.1") == "40");
  CHECK(obs.get("last-choice.2") == "60");
  CHECK(obs.get("own-last-choice") == "60");
  CHECK(obs.round_index == 1);
}

TEST_CASE("observation_for hides losing SAG bids") {
  Game game(spec_of(GameKind::sag, 3));
  auto start = game.observation_for(1);
  CHECK(start.get("own-hp") == "10");
  CHECK(start.get("own-budget") == "100");
  CHECK_FALSE(start.get("history"));
  game.step({{0, std::int64_t{13}}, {1, std::int64_t{20}}, {2, std::int64_t{17}}});
  auto obs = game.observation_for(0);
  CHECK(obs.get("last-winner") == "1");
  CHECK(obs.get("last-price") == "20");
  const auto text = obs.serialize();
  CHECK(text.find("13") == std::string::npos);
  CHECK(text.find("17") == std::string::npos);
}

TEST_CASE("observation privacy across all games") {
  for (auto kind : {GameKind::g08a, GameKind::sag, GameKind::undercover}) {
    Game game(spec_of(kind, 5, 6, 21));
    Rng rng(5);
    while (!game.terminal()) {
      // Each player's view: no other player's private keys or secret word.
      for (PlayerId i = 0; i < 5; ++i) {
        auto obs = game.observation_for(i);
        for (const auto& [key, value] : obs.fields) {
          CHECK(key.rfind("budget.", 0) != 0);
          CHECK(key.rfind("word.", 0) != 0);
          CHECK(key.rfind("role", 0) != 0);
          CHECK(key.rfind("bid.", 0) != 0);
        }
        if (kind == GameKind::undercover) {
          const auto& me = game.state().players[static_cast<std::size_t>(i)];
          const auto text = obs.serialize();
          for (const auto& other : game.state().players) {
            if (other.word != me.word) CHECK(text.find(other.word) == std::string::npos);
          }
        }
      }
      std::map<PlayerId, Action> joint;
      for (auto pid : game.active_players()) {
        if (game.phase() == Phase::clue) {
          joint[pid] = std::string("clue") + std::to_string(pid);
        } else if (game.phase() == Phase::vote) {
          joint[pid] = std::int64_t{(pid + 1) % 5};
        } else {
          joint[pid] = static_cast<std::int64_t>(1 + rng.uniform_index(30));
        }
      }
      game.step(joint);
    }
  }
}

TEST_CASE("game engine is deterministic under a fixed seed") {
  for (auto kind : {GameKind::g08a, GameKind::sag, GameKind::undercover}) {
    auto run = [&](std::uint64_t seed) {
      Game game(spec_of(kind, 4, 8, seed));
      Rng rng(123);
      std::string log;
      while (!game.terminal()) {
        std::map<PlayerId, Action> joint;
        for (auto pid : game.active_players()) {
          if (game.phase() == Phase::clue) {
            joint[pid] = std::string("c");
          } else if (game.phase() == Phase::vote) {
            joint[pid] = std::int64_t{0};
          } else {
            joint[pid] = static_cast<std::int64_t>(rng.uniform_index(3));
          }
        }
        auto rep = game.step(joint);
        if (rep.outcome) log += to_json(*rep.outcome).dump();
        for (PlayerId p = 0; p < 4; ++p) log += game.observation_for(p).serialize();
      }
      return log;
    };
    CHECK(run(42) == run(42));
  }
}

TEST_CASE("terminal games reject further steps") {
  Game game(spec_of(GameKind::g08a, 2, 1));
  game.step({{0, std::int64_t{10}}, {1, std::int64_t{20}}});
  CHECK(game.terminal());
  CHECK_THROWS_AS(game.step({{0, std::int64_t{10}}, {1, std::int64_t{20}}}), TerminalStateError);
}

TEST_CASE("invalid actions are clamped and reported") {
  Game game(spec_of(GameKind::g08a, 2));
  auto rep = game.step({{0, std::int64_t{150}}, {1, std::string("nonsense")}});
  REQUIRE(rep.violations.size() == 2);
  CHECK(std::get<std::int64_t>(rep.applied.at(0)) == 100);
  CHECK(std::get<std::int64_t>(rep.applied.at(1)) == 1);

  Game sag(spec_of(GameKind::sag, 2));
  auto srep = sag.step({{0, std::int64_t{500}}, {1, std::int64_t{-3}}});
  CHECK(std::get<std::int64_t>(srep.applied.at(0)) == 100);
  CHECK(std::get<std::int64_t>(srep.applied.at(1)) == 0);
  CHECK(srep.violations.size() == 2);
}

TEST_CASE("undercover engine substitutes invalid votes with a valid target") {
  Game game(spec_of(GameKind::undercover, 4, 3, 8));
  std::map<PlayerId, Action> clues;
  for (auto p : game.active_players()) clues[p] = std::string("something");
  auto clue_rep = game.step(clues);
  CHECK_FALSE(clue_rep.round_completed);
  CHECK(game.phase() == Phase::vote);
  CHECK(game.observation_for(0).get("clue.2") == "something");
  std::map<PlayerId, Action> votes{{0, std::int64_t{0}}, {1, std::int64_t{9}}, {2, std::int64_t{0}}, {3, std::int64_t{0}}};
  auto rep = game.step(votes);
  CHECK(rep.round_completed);
  REQUIRE(rep.violations.size() == 2);
  for (const auto& v : rep.violations) {
    const auto target = std::get<std::int64_t>(v.substituted);
    CHECK(target != v.player);
  }
}

TEST_CASE("episode_return sums discounted rewards") {
  CHECK(episode_return(std::vector<double>{1, 0, 1}, 1.0) == doctest::Approx(2.0));
  CHECK(episode_return(std::vector<double>{1, 1}, 0.5) == doctest::Approx(1.5));
  CHECK(episode_return(std::vector<double>{}, 1.0) == 0.0);

  Trajectory t;
  t.append({1, {}, {std::int64_t{3}}, 1.0});
  t.append({2, {}, {std::int64_t{3}}, 0.0});
  CHECK_THROWS_AS(t.append({2, {}, {std::int64_t{3}}, 1.0}), std::invalid_argument);
  CHECK(episode_return(t) == doctest::Approx(1.0));
}

TEST_CASE("episode summaries") {
  SUBCASE("g08a constant players") {
    Game game(spec_of(GameKind::g08a, 2, 3));
    while (!game.terminal()) game.step({{0, std::int64_t{42}}, {1, std::int64_t{10}}});
    auto s = game.summary();
    CHECK(s.rounds_played == 3);
    CHECK(s.win_share == std::vector<double>{0.0, 1.0});
  }
  SUBCASE("sag last survivor gets the full horizon") {
    Game game(spec_of(GameKind::sag, 2, 10));
    while (!game.terminal()) {
      std::map<PlayerId, Action> joint;
      for (auto p : game.active_players()) joint[p] = std::int64_t{p == 0 ? 1 : 0};
      game.step(joint);
    }
    auto s = game.summary();
    CHECK(s.rounds_played == 5);
    CHECK(s.survival_rounds == std::vector<int>{10, 4});
    CHECK(s.win_share == std::vector<double>{1.0, 0.0});
  }
}

TEST_CASE("game spec loads from yaml with defaults") {
  auto node = YAML::Load(R"(
kind: sag
players: 3
horizon: 10
seed: 9
params:
  round_hp_loss: 3
)");
  auto spec = parse_game_spec(node);
  CHECK(spec.kind == GameKind::sag);
  CHECK(spec.num_players == 3);
  CHECK(spec.sag().round_hp_loss == 3);
  CHECK(spec.sag().initial_hp == 10);
  CHECK(spec.seed == 9);

  CHECK_THROWS_AS(parse_game_spec(YAML::Load("kind: g08a\nplayers: 1\n")), ConfigError);
  CHECK_THROWS_AS(parse_game_spec(YAML::Load("kind: chess\n")), ConfigError);
  CHECK_THROWS_AS(parse_game_spec(YAML::Load("kind: g08a\ndiscount: 1.5\n")), ConfigError);
}

TEST_CASE("round log record carries private joint actions") {
  Game game(spec_of(GameKind::sag, 2));
  auto rep = game.step({{0, std::int64_t{3}}, {1, std::int64_t{4}}});
  RoundLogRecord rec;
  rec.round_index = rep.round_index;
  rec.joint_action["bid"] = rep.applied;
  rec.outcome = *rep.outcome;
  rec.observation_digests[0] = hex_digest(game.observation_for(0).serialize());
  auto j = rec.to_json();
  CHECK(j["joint_action"]["bid"]["0"] == 3);
  CHECK(j["outcome"]["reveal"]["price"] == 4);
  CHECK(j["observation_digests"]["0"].get<std::string>().size() == 16);
}
