#include "csvx/envs.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace csvx {

namespace {

constexpr int kMoveDelta[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};  // up down left right

const std::vector<std::string> kMoveNames = {"up", "down", "left", "right"};

constexpr const char* kGridworld2Layout =
    "...G\n"
    "S...\n"
    "...G\n";

constexpr const char* kFrozenLakeLayout =
    "S..H\n"
    "...H\n"
    "...H\n"
    "..G.\n";

constexpr const char* kMinesweeperLayout =
    "...M\n"
    "....\n"
    "....\n"
    "M...\n";

std::vector<State> all_nonterminal_states(const EnvSpec& env) {
  std::vector<State> out;
  for (long long i = 0; i < env.space.num_states(); ++i) {
    State s = env.space.unpack(i);
    if (!env.is_terminal(s)) out.push_back(s);
  }
  return out;
}

// Shared builder for the goal-grid environments: deterministic moves,
// off-grid moves self-loop, entering a goal adds +10 to the -1 step cost.
EnvSpec build_goal_grid(std::string id, const Grid& grid) {
  auto goals = grid.find('G');
  if (goals.empty()) throw ValidationError(id + ": layout has no goal cell");
  auto starts = grid.find('S');
  for (const auto& s : starts)
    if (grid.at(s.first, s.second) == 'G')
      throw ValidationError(id + ": start cell coincides with a goal");

  EnvSpec env;
  env.id = std::move(id);
  env.space = FeatureSpace({{"row", grid.rows}, {"col", grid.cols}});
  env.actions = kMoveNames;
  env.gamma = 1.0;
  auto is_goal = [grid](int r, int c) { return grid.at(r, c) == 'G'; };
  env.is_terminal = [is_goal](const State& s) { return is_goal(s[0], s[1]); };
  env.transition = [grid, is_goal](const State& s, int a) -> std::vector<Outcome> {
    if (is_goal(s[0], s[1])) return {{s, 1.0, 0.0}};
    int r = s[0] + kMoveDelta[a][0];
    int c = s[1] + kMoveDelta[a][1];
    if (r < 0 || r >= grid.rows || c < 0 || c >= grid.cols) {
      r = s[0];
      c = s[1];
    }
    double reward = -1.0 + (is_goal(r, c) ? 10.0 : 0.0);
    return {{State{r, c}, 1.0, reward}};
  };
  env.initial_states = all_nonterminal_states(env);
  return env;
}

}  // namespace

EnvSpec build_gridworld1() {
  // 3x3 walkable cells; column 3 is the absorbing goal column.
  Grid grid = parse_grid(
      "...G\n"
      "...G\n"
      "...G\n");
  return build_goal_grid("gridworld1", grid);
}

EnvSpec build_gridworld2(const Grid* layout) {
  Grid grid = layout ? *layout : parse_grid(kGridworld2Layout);
  return build_goal_grid("gridworld2", grid);
}

EnvSpec build_frozenlake(const Grid* layout) {
  Grid grid = layout ? *layout : parse_grid(kFrozenLakeLayout);
  if (grid.find('G').empty()) throw ValidationError("frozenlake: layout has no goal");

  EnvSpec env;
  env.id = "frozenlake";
  // Features are (x, y): x the column, y the row, matching the S_k = 3y+x
  // cell labels; y grows southwards so "up" decrements y.
  env.space = FeatureSpace({{"x", grid.cols}, {"y", grid.rows}});
  env.actions = kMoveNames;
  env.gamma = 1.0;
  auto cell = [grid](const State& s) { return grid.at(s[1], s[0]); };
  env.is_terminal = [cell](const State& s) {
    char ch = cell(s);
    return ch == 'G' || ch == 'H';
  };
  env.transition = [grid, cell](const State& s, int a) -> std::vector<Outcome> {
    char here = cell(s);
    if (here == 'G' || here == 'H') return {{s, 1.0, 0.0}};
    int x = s[0] + kMoveDelta[a][1];
    int y = s[1] + kMoveDelta[a][0];
    if (x < 0 || x >= grid.cols || y < 0 || y >= grid.rows) {
      x = s[0];
      y = s[1];
    }
    char dest = grid.at(y, x);
    double reward = dest == 'G' ? 10.0 : dest == 'H' ? -10.0 : -1.0;
    return {{State{x, y}, 1.0, reward}};
  };
  env.initial_states = all_nonterminal_states(env);
  return env;
}

EnvSpec build_taxi() {
  // Depot order: 0=R(0,0) 1=G(0,4) 2=Y(4,0) 3=B(4,3).
  static const std::array<std::pair<int, int>, 4> depots = {
      {{0, 0}, {0, 4}, {4, 0}, {4, 3}}};

  EnvSpec env;
  env.id = "taxi";
  env.space = FeatureSpace(
      {{"taxi_row", 5}, {"taxi_col", 5}, {"passenger", 5}, {"destination", 4}});
  env.actions = {"up", "down", "left", "right", "pickup", "dropoff"};
  // Masked-coalition abstractions of taxi terminate rarely, so an undiscounted
  // objective would blow their values up; 0.95 keeps every abstraction bounded.
  env.gamma = 0.95;
  env.is_terminal = [](const State& s) {
    return s[2] != kPassengerInTaxi && s[2] == s[3];
  };
  env.transition = [this_terminal = env.is_terminal](const State& s,
                                                     int a) -> std::vector<Outcome> {
    if (this_terminal(s)) return {{s, 1.0, 0.0}};
    State next = s;
    double reward = -1.0;
    if (a < 4) {
      int r = s[0] + kMoveDelta[a][0];
      int c = s[1] + kMoveDelta[a][1];
      if (r >= 0 && r < 5 && c >= 0 && c < 5) {
        next[0] = r;
        next[1] = c;
      }
    } else if (a == kPickup) {
      if (s[2] != kPassengerInTaxi && depots[s[2]] == std::make_pair(s[0], s[1])) {
        next[2] = kPassengerInTaxi;
      } else {
        reward = -10.0;
      }
    } else {  // dropoff
      if (s[2] == kPassengerInTaxi && depots[s[3]] == std::make_pair(s[0], s[1])) {
        next[2] = s[3];
        reward = 20.0;
      } else {
        reward = -10.0;
      }
    }
    return {{std::move(next), 1.0, reward}};
  };
  env.initial_states = all_nonterminal_states(env);
  return env;
}

Grid default_minesweeper_grid() { return parse_grid(kMinesweeperLayout); }

EnvSpec build_minesweeper(const Grid& layout) {
  if (layout.rows != 4 || layout.cols != 4)
    throw ValidationError("minesweeper: layout must be 4x4");
  const int n = 16;
  std::vector<bool> mine(n, false);
  int mine_count = 0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (layout.at(r, c) == 'M') {
        mine[r * 4 + c] = true;
        ++mine_count;
      }
  if (mine_count == 0) throw ValidationError("minesweeper: layout needs at least one mine");
  if (mine_count == n) throw ValidationError("minesweeper: layout has no safe cells");

  std::vector<int> count(n, 0);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      int k = 0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          int rr = r + dr, cc = c + dc;
          if (rr >= 0 && rr < 4 && cc >= 0 && cc < 4 && mine[rr * 4 + cc]) ++k;
        }
      if (k > kCellHidden - 1)
        throw ValidationError("minesweeper: a cell borders more than 2 mines");
      count[r * 4 + c] = k;
    }

  EnvSpec env;
  env.id = "minesweeper";
  std::vector<FeatureDim> dims;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      dims.push_back({"cell_" + std::to_string(r) + "_" + std::to_string(c), 4});
  env.space = FeatureSpace(std::move(dims));
  for (int i = 0; i < n; ++i)
    env.actions.push_back("reveal_" + std::to_string(i / 4) + "_" + std::to_string(i % 4));
  env.gamma = 1.0;
  env.is_terminal = [mine](const State& s) {
    bool all_safe_revealed = true;
    for (int i = 0; i < 16; ++i) {
      if (mine[i] && s[i] != kCellHidden) return true;  // a mine was revealed
      if (!mine[i] && s[i] == kCellHidden) all_safe_revealed = false;
    }
    return all_safe_revealed;
  };
  env.transition = [mine, count, terminal = env.is_terminal](
                       const State& s, int a) -> std::vector<Outcome> {
    if (terminal(s)) return {{s, 1.0, 0.0}};
    if (s[a] != kCellHidden) return {{s, 1.0, 0.0}};  // re-reveal is a no-op
    State next = s;
    next[a] = count[a];
    return {{std::move(next), 1.0, mine[a] ? -20.0 : 0.0}};
  };
  env.initial_states = {State(n, kCellHidden)};
  return env;
}

const std::vector<double>& pendulum_torques() {
  static const std::vector<double> torques = {-2.0, -1.6, -1.2, -0.8, -0.4, 0.0,
                                              0.4,  0.8,  1.2,  1.6,  2.0};
  return torques;
}

int pendulum_angle_bin(double cos_theta, double sin_theta, int angle_bins) {
  double theta = std::atan2(sin_theta, cos_theta);
  if (theta < 0) theta += 2.0 * M_PI;
  double width = 2.0 * M_PI / angle_bins;
  int bin = static_cast<int>(std::floor(theta / width + 1e-9));
  return ((bin % angle_bins) + angle_bins) % angle_bins;
}

EnvSpec build_pendulum(const PendulumDiscretization& disc) {
  if (disc.angle_bins < 3 || disc.velocity_bins < 3)
    throw ValidationError("pendulum: need at least 3 bins per dimension");

  constexpr double kMaxSpeed = 8.0, kDt = 0.05, kGravity = 10.0;
  const int na = disc.angle_bins, nv = disc.velocity_bins;
  const double aw = 2.0 * M_PI / na;           // angle bin width, theta in [0, 2pi)
  const double vw = 2.0 * kMaxSpeed / nv;      // velocity bin width

  auto angle_center = [aw](int k) { return (k + 0.5) * aw; };
  auto vel_center = [vw, kMaxSpeed](int j) { return -kMaxSpeed + (j + 0.5) * vw; };
  auto normalize = [](double th) {  // to [-pi, pi)
    th = std::fmod(th + M_PI, 2.0 * M_PI);
    if (th < 0) th += 2.0 * M_PI;
    return th - M_PI;
  };

  EnvSpec env;
  env.id = "pendulum";
  env.space = FeatureSpace({{"angle_bin", na}, {"velocity_bin", nv}});
  for (double tau : pendulum_torques()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "torque_%+.1f", tau);
    env.actions.push_back(buf);
  }
  env.gamma = 0.95;
  env.is_terminal = [](const State&) { return false; };
  env.transition = [=](const State& s, int a) -> std::vector<Outcome> {
    double theta = angle_center(s[0]);
    double omega = vel_center(s[1]);
    double tau = pendulum_torques()[a];
    double cost = normalize(theta) * normalize(theta) + 0.1 * omega * omega +
                  0.001 * tau * tau;
    double new_omega = omega + (1.5 * kGravity * std::sin(theta) + 3.0 * tau) * kDt;
    new_omega = std::clamp(new_omega, -kMaxSpeed, kMaxSpeed);
    double new_theta = std::fmod(theta + new_omega * kDt, 2.0 * M_PI);
    if (new_theta < 0) new_theta += 2.0 * M_PI;
    int ab = std::min(na - 1, static_cast<int>(new_theta / aw));
    int vb = std::clamp(static_cast<int>((new_omega + kMaxSpeed) / vw), 0, nv - 1);
    return {{State{ab, vb}, 1.0, -cost}};
  };
  for (int a = 0; a < na; ++a)
    for (int v = 0; v < nv; ++v) env.initial_states.push_back(State{a, v});
  return env;
}

EnvSpec augment_with_constant_feature(const EnvSpec& env, const std::string& name) {
  EnvSpec out;
  out.id = env.id + "_" + name;
  auto dims = env.space.dims();
  dims.push_back({name, 1});
  out.space = FeatureSpace(std::move(dims));
  out.actions = env.actions;
  out.gamma = env.gamma;
  const int n = env.space.size();
  auto strip = [n](const State& s) { return State(s.begin(), s.begin() + n); };
  out.is_terminal = [term = env.is_terminal, strip](const State& s) {
    return term(strip(s));
  };
  out.transition = [trans = env.transition, strip](const State& s,
                                                   int a) -> std::vector<Outcome> {
    auto outs = trans(strip(s), a);
    for (auto& o : outs) o.next.push_back(0);
    return outs;
  };
  for (const auto& s : env.initial_states) {
    State aug = s;
    aug.push_back(0);
    out.initial_states.push_back(std::move(aug));
  }
  return out;
}

EnvSpec build_env_by_name(const std::string& name,
                          const std::optional<std::string>& fixture_path) {
  std::optional<Grid> fixture;
  if (fixture_path) fixture = load_grid(*fixture_path);
  if (name == "gridworld1") return build_gridworld1();
  if (name == "gridworld2") return build_gridworld2(fixture ? &*fixture : nullptr);
  if (name == "frozenlake") return build_frozenlake(fixture ? &*fixture : nullptr);
  if (name == "taxi") return build_taxi();
  if (name == "minesweeper")
    return build_minesweeper(fixture ? *fixture : default_minesweeper_grid());
  if (name == "pendulum") return build_pendulum();
  throw ValidationError("unknown environment '" + name + "'");
}

}  // namespace csvx
