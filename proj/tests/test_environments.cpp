#include <doctest.h>

#include <cmath>
#include <deque>
#include <random>
#include <set>

#include "csvx/envs.hpp"
#include "csvx/solver.hpp"

using namespace csvx;

namespace {

// Single-outcome deterministic step.
Outcome step1(const EnvSpec& env, const State& s, int a) {
  const auto outs = env.step(s, a);
  REQUIRE(outs.size() == 1);
  return outs[0];
}

ObsIndex full_obs(const EnvSpec& env, const State& s) {
  return obs_index(env.space, Coalition::full(env.space.size()), s);
}

// Breadth-first shortest-path move count on the 5x5 taxi grid.
int bfs_moves(std::pair<int, int> from, std::pair<int, int> to) {
  std::set<std::pair<int, int>> seen{from};
  std::deque<std::pair<std::pair<int, int>, int>> queue{{from, 0}};
  while (!queue.empty()) {
    auto [cell, d] = queue.front();
    queue.pop_front();
    if (cell == to) return d;
    const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      std::pair<int, int> nxt{cell.first + dr[k], cell.second + dc[k]};
      if (nxt.first < 0 || nxt.first > 4 || nxt.second < 0 || nxt.second > 4) continue;
      if (seen.insert(nxt).second) queue.push_back({nxt, d + 1});
    }
  }
  FAIL("unreachable cell");
  return -1;
}

}  // namespace

TEST_CASE("every built environment passes the MDP validator") {
  for (const char* name :
       {"gridworld1", "gridworld2", "frozenlake", "taxi", "minesweeper", "pendulum"}) {
    CAPTURE(name);
    CHECK_NOTHROW(validate_env(build_env_by_name(name)));
  }
}

TEST_CASE("gridworld1 dynamics and optimal policy") {
  const auto env = build_gridworld1();
  CHECK(env.space.size() == 2);
  CHECK(env.gamma == 1.0);

  auto right = step1(env, {0, 0}, kRight);
  CHECK(right.next == State{0, 1});
  CHECK(right.reward == -1.0);

  auto up = step1(env, {0, 0}, kUp);
  CHECK(up.next == State{0, 0});  // wall self-loop
  CHECK(up.reward == -1.0);

  auto goal = step1(env, {1, 2}, kRight);
  CHECK(env.is_terminal(goal.next));
  CHECK(goal.reward == 9.0);  // -1 move cost plus +10 goal bonus

  const CompiledEnv compiled(env);
  const auto art = value_iteration(compiled);
  for (int idx : compiled.nonterminal_indices()) {
    const State& s = compiled.state(idx);
    CAPTURE(s[0]);
    CAPTURE(s[1]);
    CHECK(greedy_action(art, full_obs(env, s)) == kRight);
  }
}

TEST_CASE("gridworld2 has symmetric goals and multi-optimal states") {
  const auto env = build_gridworld2();
  const CompiledEnv compiled(env);
  const auto art = value_iteration(compiled);

  // Wall self-loop at the start cell.
  auto wall = step1(env, {1, 0}, kLeft);
  CHECK(wall.next == State{1, 0});
  CHECK(wall.reward == -1.0);

  // Both vertical moves are greedy-optimal between the two goals.
  const auto& row = art.row(full_obs(env, {1, 3}));
  const double best = art.v(full_obs(env, {1, 3}));
  CHECK(row.actions[kUp].q == doctest::Approx(best).epsilon(1e-9));
  CHECK(row.actions[kDown].q == doctest::Approx(best).epsilon(1e-9));

  // Row mirror: the Q-row at (0,2) maps onto (2,2) with up/down swapped.
  const auto& top = art.row(full_obs(env, {0, 2}));
  const auto& bottom = art.row(full_obs(env, {2, 2}));
  CHECK(top.actions[kUp].q == doctest::Approx(bottom.actions[kDown].q).epsilon(1e-9));
  CHECK(top.actions[kDown].q == doctest::Approx(bottom.actions[kUp].q).epsilon(1e-9));
  CHECK(top.actions[kLeft].q == doctest::Approx(bottom.actions[kLeft].q).epsilon(1e-9));
  CHECK(top.actions[kRight].q == doctest::Approx(bottom.actions[kRight].q).epsilon(1e-9));
}

TEST_CASE("frozenlake rewards match the stated scheme") {
  const auto env = build_frozenlake();

  // Features are (x, y); the first hole sits at x=3 on the top row.
  auto hole = step1(env, {2, 0}, kRight);
  CHECK(env.is_terminal(hole.next));
  CHECK(hole.reward == -10.0);

  auto goal = step1(env, {2, 2}, kDown);
  CHECK(env.is_terminal(goal.next));
  CHECK(goal.reward == 10.0);

  auto move = step1(env, {0, 0}, kDown);
  CHECK_FALSE(env.is_terminal(move.next));
  CHECK(move.reward == -1.0);
  CHECK(move.next == State{0, 1});  // y grows southwards
}

TEST_CASE("taxi rewards match the stated scheme") {
  const auto env = build_taxi();
  CHECK(env.space.size() == 4);

  // Successful delivery: passenger in taxi, taxi at destination depot G(0,4).
  auto deliver = step1(env, {0, 4, kPassengerInTaxi, 1}, kDropoff);
  CHECK(deliver.reward == 20.0);
  CHECK(env.is_terminal(deliver.next));

  // Failed pickup: no passenger at the taxi's cell.
  auto bad_pickup = step1(env, {2, 2, 0, 1}, kPickup);
  CHECK(bad_pickup.reward == -10.0);
  CHECK_FALSE(env.is_terminal(bad_pickup.next));

  // Failed dropoff away from the destination depot.
  auto bad_dropoff = step1(env, {2, 2, kPassengerInTaxi, 1}, kDropoff);
  CHECK(bad_dropoff.reward == -10.0);

  auto move = step1(env, {2, 2, 0, 1}, kUp);
  CHECK(move.reward == -1.0);
  CHECK(move.next == State{1, 2, 0, 1});
}

TEST_CASE("taxi optimal episode reward matches a shortest-path oracle") {
  const std::pair<int, int> depots[4] = {{0, 0}, {0, 4}, {4, 0}, {4, 3}};
  const auto env = build_taxi();
  const CompiledEnv compiled(env);
  const auto art = value_iteration(compiled);

  std::mt19937_64 rng(7);
  const auto& starts = compiled.nonterminal_indices();
  for (int trial = 0; trial < 10; ++trial) {
    State s = compiled.state(starts[rng() % starts.size()]);
    CAPTURE(s[0]);
    CAPTURE(s[1]);
    CAPTURE(s[2]);
    CAPTURE(s[3]);

    // Oracle: walk to the passenger (if not aboard), pick up, walk to the
    // destination; each move and the pickup cost 1, delivery pays +20.
    int moves = 0, pickups = 0;
    std::pair<int, int> taxi{s[0], s[1]};
    if (s[2] != kPassengerInTaxi) {
      moves += bfs_moves(taxi, depots[s[2]]);
      taxi = depots[s[2]];
      pickups = 1;
    }
    moves += bfs_moves(taxi, depots[s[3]]);
    const double oracle = 20.0 - moves - pickups;

    double total = 0.0;
    State cur = s;
    for (int step = 0; step < 100 && !env.is_terminal(cur); ++step) {
      const int a = greedy_action(art, full_obs(env, cur));
      const auto out = step1(env, cur, a);
      total += out.reward;
      cur = out.next;
    }
    REQUIRE(env.is_terminal(cur));
    CHECK(total == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("minesweeper counts, rewards, and termination") {
  const auto grid = default_minesweeper_grid();
  const auto env = build_minesweeper(grid);
  const State hidden(16, kCellHidden);

  std::vector<bool> mine(16, false);
  for (auto [r, c] : grid.find('M')) mine[r * 4 + c] = true;

  int revealed_checks = 0;
  for (int a = 0; a < 16; ++a) {
    const auto out = step1(env, hidden, a);
    if (mine[a]) {
      CHECK(out.reward == -20.0);
      CHECK(env.is_terminal(out.next));
    } else {
      CHECK(out.reward == 0.0);
      // Revealed count equals a direct recount of adjacent mines.
      int k = 0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          int rr = a / 4 + dr, cc = a % 4 + dc;
          if ((dr || dc) && rr >= 0 && rr < 4 && cc >= 0 && cc < 4 && mine[rr * 4 + cc])
            ++k;
        }
      CHECK(out.next[a] == k);
      ++revealed_checks;
    }
  }
  CHECK(revealed_checks == 14);

  // Revealing every safe cell ends the episode with cumulative reward 0.
  State cur = hidden;
  double total = 0.0;
  for (int a = 0; a < 16; ++a) {
    if (mine[a]) continue;
    const auto out = step1(env, cur, a);
    total += out.reward;
    cur = out.next;
  }
  CHECK(env.is_terminal(cur));
  CHECK(total == 0.0);

  // Re-revealing an already revealed cell is a no-op.
  State one = step1(env, hidden, 0).next;
  const auto again = step1(env, one, 0);
  CHECK(again.next == one);
  CHECK(again.reward == 0.0);

  CHECK_THROWS_AS(build_minesweeper(parse_grid("....\n....\n....\n....\n")),
                  ValidationError);
}

TEST_CASE("pendulum discretization") {
  const auto& torques = pendulum_torques();
  REQUIRE(torques.size() == 11);
  CHECK(torques.front() == doctest::Approx(-2.0));
  CHECK(torques.back() == doctest::Approx(2.0));
  for (size_t k = 1; k < torques.size(); ++k)
    CHECK(torques[k] - torques[k - 1] == doctest::Approx(0.4).epsilon(1e-12));

  // [-0.707, -0.707] is theta = 225 degrees -> bin 10 of 16.
  CHECK(pendulum_angle_bin(-0.707, -0.707, 16) == 10);
  CHECK(pendulum_angle_bin(1.0, 0.0, 16) == 0);

  // Upright, (near) zero velocity, zero torque: cost minimum.
  const auto env = build_pendulum();
  const int zero_torque = 5;
  const double r7 = step1(env, {0, 7}, zero_torque).reward;
  const double r8 = step1(env, {0, 8}, zero_torque).reward;
  CHECK(std::max(r7, r8) > -0.1);
  CHECK(std::max(r7, r8) <= 0.0);

  CHECK_THROWS_AS(build_pendulum({2, 16}), ValidationError);
}

TEST_CASE("constant-feature augmentation preserves dynamics") {
  const auto base = build_gridworld1();
  const auto env = augment_with_constant_feature(base, "dummy");
  CHECK(env.space.size() == 3);
  CHECK(env.space.dim(2).name == "dummy");
  CHECK(env.space.dim(2).size == 1);
  CHECK_NOTHROW(validate_env(env));

  const auto out = step1(env, {0, 0, 0}, kRight);
  CHECK(out.next == State{0, 1, 0});
  CHECK(out.reward == -1.0);
}
