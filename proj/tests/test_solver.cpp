#include <doctest.h>

#include <cmath>

#include "csvx/envs.hpp"
#include "csvx/solver.hpp"

using namespace csvx;

namespace {

// Three-cell corridor: move right toward a terminal goal. Each move costs 1
// and entering the goal adds 10, so the optimal values are V = [8, 9].
EnvSpec corridor() {
  EnvSpec env;
  env.id = "corridor";
  env.space = FeatureSpace({{"x", 3}});
  env.actions = {"left", "right"};
  env.gamma = 1.0;
  env.is_terminal = [](const State& s) { return s[0] == 2; };
  env.transition = [](const State& s, int a) -> std::vector<Outcome> {
    if (s[0] == 2) return {{s, 1.0, 0.0}};
    State next{a == 1 ? s[0] + 1 : std::max(0, s[0] - 1)};
    return {{next, 1.0, next[0] == 2 ? 9.0 : -1.0}};
  };
  env.initial_states = {{0}, {1}};
  return env;
}

TrainConfig quick_cfg() {
  TrainConfig cfg;
  cfg.episodes = 20000;
  return cfg;
}

}  // namespace

TEST_CASE("value iteration solves the corridor to the hand oracle") {
  const CompiledEnv env(corridor());
  const auto art = value_iteration(env);

  CHECK(art.diag.exact);
  CHECK(art.v(0) == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(art.v(1) == doctest::Approx(9.0).epsilon(1e-9));

  // Terminal convention: V = 0, Q(. , a) = 0.
  CHECK(art.v(2) == 0.0);
  for (int a = 0; a < 2; ++a) CHECK(art.q(2, a) == 0.0);
}

TEST_CASE("value iteration satisfies its Bellman fixed point") {
  const auto spec = build_gridworld1();
  const CompiledEnv env(spec);
  const auto art = value_iteration(env, 1e-10);

  const auto full = Coalition::full(spec.space.size());
  double worst = 0.0;
  for (int idx = 0; idx < env.num_states(); ++idx) {
    if (env.terminal(idx)) continue;
    const ObsIndex obs = obs_index(spec.space, full, env.state(idx));
    for (int a = 0; a < env.num_actions(); ++a) {
      double backup = 0.0;
      for (const auto& out : env.outcomes(idx, a)) {
        const ObsIndex nxt = env.terminal(out.next)
                                 ? kTerminalObs
                                 : obs_index(spec.space, full, env.state(out.next));
        backup += out.prob * (out.reward + env.gamma() * art.v(nxt));
      }
      worst = std::max(worst, std::abs(backup - art.q(obs, a)));
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("V(o) is the max over Q(o, a) for every artifact") {
  const CompiledEnv env(build_gridworld1());
  for (const auto& c : {Coalition({0}), Coalition({0, 1})}) {
    const auto art = q_learning_masked(env, c, quick_cfg(), 1);
    for (const auto& [obs, row] : art.rows) {
      double best = row.actions[0].q;
      for (const auto& a : row.actions) best = std::max(best, a.q);
      CHECK(art.v(obs) == best);
    }
  }
}

TEST_CASE("masked training covers the coalition's observation space") {
  const CompiledEnv env(build_gridworld1());
  const auto art = q_learning_masked(env, Coalition({0}), quick_cfg(), 1);

  // Row-only observations: 3 keys, one Q row of 4 actions each.
  CHECK(art.rows.size() == 3);
  for (const auto& [obs, row] : art.rows) {
    CHECK(obs >= 0);
    CHECK(obs < 3);
    CHECK(row.actions.size() == 4);
  }
  CHECK(art.diag.episodes == 20000);
  CHECK(art.coalition == Coalition({0}));
}

TEST_CASE("q-learning on the full coalition approaches value iteration") {
  const CompiledEnv env(build_gridworld1());
  const auto exact = value_iteration(env);
  const auto learned = q_learning_masked(env, Coalition({0, 1}), TrainConfig{}, 1);

  for (const auto& [obs, row] : exact.rows) {
    if (!learned.rows.count(obs)) continue;  // terminal states carry no Q row
    for (size_t a = 0; a < row.actions.size(); ++a) {
      CAPTURE(obs);
      CAPTURE(a);
      CHECK(std::abs(row.actions[a].q - learned.q(obs, static_cast<int>(a))) <= 0.05);
    }
  }
}

TEST_CASE("q-learning is deterministic per (env, coalition, config, seed)") {
  const CompiledEnv env(build_gridworld1());
  const auto a = q_learning_masked(env, Coalition({1}), quick_cfg(), 42);
  const auto b = q_learning_masked(env, Coalition({1}), quick_cfg(), 42);
  CHECK(a.serialize() == b.serialize());

  const auto c = q_learning_masked(env, Coalition({1}), quick_cfg(), 43);
  CHECK(a.serialize() != c.serialize());
}

TEST_CASE("per-coalition streams are derived from the master seed") {
  const auto s1 = artifact_stream_seed(1, Coalition({0}));
  const auto s2 = artifact_stream_seed(1, Coalition({1}));
  const auto s3 = artifact_stream_seed(2, Coalition({0}));
  CHECK(s1 != s2);
  CHECK(s1 != s3);
  CHECK(s1 == artifact_stream_seed(1, Coalition({0})));
}

TEST_CASE("greedy action and ranking use the lowest-id tie rule") {
  PolicyArtifact art;
  art.num_actions = 4;
  art.rows[0].actions.resize(4);
  const double qs[4] = {1.0, 5.0, 5.0, 0.0};
  for (int a = 0; a < 4; ++a) art.rows[0].actions[a].q = qs[a];

  CHECK(greedy_action(art, 0) == 1);
  CHECK(rank_actions(art, 0) == std::vector<int>{1, 2, 0, 3});

  art.rows[1].actions.assign(4, ActionStats{3.0, 1.0, {}});
  CHECK(greedy_action(art, 1) == 0);
  CHECK(rank_actions(art, 1) == std::vector<int>{0, 1, 2, 3});

  CHECK_THROWS_AS(greedy_action(art, 99), LookupError);
  CHECK_THROWS_AS(rank_actions(art, 99), LookupError);
}

TEST_CASE("greedy action equals the top of the ranking everywhere") {
  const CompiledEnv env(build_gridworld1());
  const auto art = q_learning_masked(env, Coalition({0, 1}), quick_cfg(), 1);
  for (const auto& [obs, row] : art.rows)
    CHECK(greedy_action(art, obs) == rank_actions(art, obs)[0]);
}

TEST_CASE("abstract successor expectation") {
  const auto spec = build_gridworld1();
  const CompiledEnv env(spec);

  // Column-only coalition: moving right from column 0 lands in column 1
  // regardless of the invisible row.
  const auto art = q_learning_masked(env, Coalition({1}), quick_cfg(), 1);
  const auto dist = abstract_successor_expectation(art, 0, kRight);
  REQUIRE(dist.size() == 1);
  CHECK(dist[0].first == 1);
  CHECK(dist[0].second == doctest::Approx(1.0));

  // Full coalition on a deterministic env: point mass on the true successor.
  const auto full = value_iteration(env);
  const auto c = Coalition::full(2);
  const auto from = obs_index(spec.space, c, {1, 0});
  const auto to = obs_index(spec.space, c, {1, 1});
  const auto point = abstract_successor_expectation(full, from, kRight);
  REQUIRE(point.size() == 1);
  CHECK(point[0].first == to);
  CHECK(point[0].second == doctest::Approx(1.0));

  // Unobserved (obs, action) pairs fail loudly.
  PolicyArtifact empty;
  empty.num_actions = 1;
  empty.rows[0].actions.resize(1);
  CHECK_THROWS_AS(abstract_successor_expectation(empty, 0, 0), EvalError);
}

TEST_CASE("exact masked backend agrees with q-learning on Markov coalitions") {
  const CompiledEnv env(build_gridworld1());
  const Coalition col({1});  // column dynamics are independent of the row

  const auto exact = exact_masked(env, col);
  CHECK(exact.diag.exact);

  const auto learned = q_learning_masked(env, col, TrainConfig{}, 1);
  for (const auto& [obs, row] : exact.rows)
    for (size_t a = 0; a < row.actions.size(); ++a)
      CHECK(std::abs(row.actions[a].q - learned.q(obs, static_cast<int>(a))) <= 0.05);
}

TEST_CASE("train_artifact dispatches on the configured backend") {
  const CompiledEnv env(build_gridworld1());

  TrainConfig cfg = quick_cfg();
  cfg.backend = TrainBackend::exact;
  const auto exact = train_artifact(env, Coalition({0}), cfg, 1);
  CHECK(exact.diag.exact);
  // The exact full-coalition artifact comes straight from value iteration
  // (only the cache key differs).
  auto full = train_artifact(env, Coalition({0, 1}), cfg, 1);
  auto vi = value_iteration(env);
  full.config_hash = vi.config_hash;
  CHECK(full.serialize() == vi.serialize());

  cfg.backend = TrainBackend::q_learning;
  const auto learned = train_artifact(env, Coalition({0}), cfg, 1);
  CHECK_FALSE(learned.diag.exact);
  CHECK(learned.converged(cfg.convergence_threshold));
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.episodes = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = TrainConfig{};
  cfg.alpha0 = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  // The cache key covers config fields and the master seed.
  TrainConfig a, b;
  b.episodes = 12345;
  CHECK(a.hash_key(1) != b.hash_key(1));
  CHECK(a.hash_key(1) != a.hash_key(2));
  CHECK(a.hash_key(1) == TrainConfig{}.hash_key(1));
}
