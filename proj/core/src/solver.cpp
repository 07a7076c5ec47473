#include "csvx/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "csvx/hash.hpp"

namespace csvx {

CompiledEnv::CompiledEnv(const EnvSpec& spec) : spec_(spec) {
  validate_env(spec_);
  states_ = reachable_states(spec_);
  index_.reserve(states_.size());
  for (int i = 0; i < num_states(); ++i) index_[spec_.space.pack(states_[i])] = i;
  terminal_.resize(states_.size());
  table_.resize(states_.size() * spec_.num_actions());
  for (int i = 0; i < num_states(); ++i) {
    terminal_[i] = spec_.is_terminal(states_[i]);
    if (!terminal_[i]) nonterminal_.push_back(i);
    for (int a = 0; a < num_actions(); ++a) {
      auto& row = table_[static_cast<size_t>(i) * num_actions() + a];
      for (const auto& o : spec_.transition(states_[i], a)) {
        if (o.prob <= 0.0) continue;
        row.push_back({index_.at(spec_.space.pack(o.next)), o.prob, o.reward});
      }
    }
  }
}

int CompiledEnv::index_of(const State& s) const {
  auto it = index_.find(spec_.space.pack(s));
  if (it == index_.end())
    throw LookupError("state not reachable in environment " + spec_.id);
  return it->second;
}

std::span<const CompiledOutcome> CompiledEnv::outcomes(int s, int a) const {
  return table_[static_cast<size_t>(s) * num_actions() + a];
}

std::vector<ObsIndex> CompiledEnv::obs_map(const Coalition& c) const {
  std::vector<ObsIndex> map(states_.size());
  for (int i = 0; i < num_states(); ++i) map[i] = obs_index(spec_.space, c, states_[i]);
  return map;
}

std::uint64_t artifact_stream_seed(std::uint64_t master_seed, const Coalition& c) {
  return master_seed ^ fnv1a64(c.key());
}

namespace {

// Deterministic helpers independent of stdlib distribution internals.
double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
std::size_t next_below(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

int sample_outcome(std::span<const CompiledOutcome> outs, std::mt19937_64& rng) {
  if (outs.size() == 1) return 0;
  double u = next_unit(rng);
  double acc = 0.0;
  for (size_t i = 0; i < outs.size(); ++i) {
    acc += outs[i].prob;
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(outs.size() - 1);
}

int greedy_of_row(const std::vector<double>& q, int offset, int num_actions) {
  int best = 0;
  for (int a = 1; a < num_actions; ++a)
    if (q[offset + a] > q[offset + best]) best = a;
  return best;
}

}  // namespace

PolicyArtifact value_iteration(const CompiledEnv& env, double tol, long long max_iter) {
  if (tol <= 0.0) throw ValidationError("value iteration tolerance must be positive");
  const int S = env.num_states(), A = env.num_actions();
  const double gamma = env.gamma();
  std::vector<double> value(S, 0.0);
  double residual = 0.0;
  int worst = 0;
  for (long long iter = 0;; ++iter) {
    if (iter >= max_iter)
      throw ConvergenceError(
          "value iteration did not converge; largest residual at state index " +
          std::to_string(worst) + " of " + env.spec().id +
          " (reward cycle under gamma=1?)");
    residual = 0.0;
    for (int s : env.nonterminal_indices()) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        double q = 0.0;
        for (const auto& o : env.outcomes(s, a))
          q += o.prob * (o.reward + gamma * (env.terminal(o.next) ? 0.0 : value[o.next]));
        best = std::max(best, q);
      }
      double delta = std::abs(best - value[s]);
      if (delta > residual) {
        residual = delta;
        worst = s;
      }
      value[s] = best;
    }
    if (residual <= tol) break;
  }

  PolicyArtifact art;
  art.env_id = env.spec().id;
  art.coalition = Coalition::full(env.spec().space.size());
  art.config_hash = "exact-vi";
  art.num_actions = A;
  art.gamma = gamma;
  art.diag.exact = true;
  art.diag.max_residual = residual;
  for (int s = 0; s < S; ++s) {
    ObsIndex obs = env.spec().space.pack(env.state(s));
    ObsRow row;
    row.actions.resize(A);
    for (int a = 0; a < A; ++a) {
      auto& as = row.actions[a];
      as.visits = 1.0;
      if (env.terminal(s)) {
        as.successors[kTerminalObs] = {1.0, 0.0};
        continue;
      }
      double q = 0.0;
      for (const auto& o : env.outcomes(s, a)) {
        q += o.prob * (o.reward + gamma * (env.terminal(o.next) ? 0.0 : value[o.next]));
        ObsIndex next = env.terminal(o.next)
                            ? kTerminalObs
                            : env.spec().space.pack(env.state(o.next));
        auto& stat = as.successors[next];
        stat.weight += o.prob;
        stat.reward_sum += o.prob * o.reward;
      }
      as.q = q;
    }
    art.rows[obs] = std::move(row);
  }
  return art;
}

PolicyArtifact q_learning_masked(const CompiledEnv& env, const Coalition& c,
                                 const TrainConfig& cfg, std::uint64_t master_seed) {
  cfg.validate();
  for (int m : c.members())
    if (m >= env.spec().space.size())
      throw ValidationError("coalition member out of range for env " + env.spec().id);

  const int A = env.num_actions();
  const auto obs_of = env.obs_map(c);

  // Dense observation table over observations of non-terminal states.
  std::vector<ObsIndex> obs_keys;
  for (int s : env.nonterminal_indices()) obs_keys.push_back(obs_of[s]);
  std::sort(obs_keys.begin(), obs_keys.end());
  obs_keys.erase(std::unique(obs_keys.begin(), obs_keys.end()), obs_keys.end());
  std::unordered_map<ObsIndex, int> obs_row;
  obs_row.reserve(obs_keys.size());
  for (size_t i = 0; i < obs_keys.size(); ++i) obs_row[obs_keys[i]] = static_cast<int>(i);
  const int R = static_cast<int>(obs_keys.size());

  std::vector<double> q(static_cast<size_t>(R) * A, 0.0);
  std::vector<double> visits(static_cast<size_t>(R) * A, 0.0);
  std::vector<std::map<ObsIndex, SuccessorStat>> succ(static_cast<size_t>(R) * A);

  const auto& starts = env.nonterminal_indices();
  std::mt19937_64 rng(artifact_stream_seed(master_seed, c));

  // max |alpha * td_error| per episode, over a trailing 100-episode window
  std::vector<double> window(100, 0.0);

  for (long long ep = 0; ep < cfg.episodes; ++ep) {
    double eps = cfg.episodes > 1
                     ? cfg.eps_start + (cfg.eps_end - cfg.eps_start) *
                                           (static_cast<double>(ep) / (cfg.episodes - 1))
                     : cfg.eps_end;
    int s = starts[next_below(rng, starts.size())];
    double ep_max = 0.0;
    for (int step = 0; step < cfg.max_steps; ++step) {
      int r = obs_row.at(obs_of[s]);
      int base = r * A;
      int a = next_unit(rng) < eps ? static_cast<int>(next_below(rng, A))
                                   : greedy_of_row(q, base, A);
      const auto outs = env.outcomes(s, a);
      const auto& o = outs[sample_outcome(outs, rng)];
      bool done = env.terminal(o.next);
      ObsIndex next_key = done ? kTerminalObs : obs_of[o.next];
      double next_v = 0.0;
      if (!done) {
        int nb = obs_row.at(next_key) * A;
        next_v = q[nb + greedy_of_row(q, nb, A)];
      }
      visits[base + a] += 1.0;
      double alpha = cfg.alpha0 / std::sqrt(visits[base + a]);
      double delta = o.reward + env.gamma() * next_v - q[base + a];
      q[base + a] += alpha * delta;
      ep_max = std::max(ep_max, std::abs(alpha * delta));
      auto& stat = succ[base + a][next_key];
      stat.weight += 1.0;
      stat.reward_sum += o.reward;
      if (done) break;
      s = o.next;
    }
    window[ep % 100] = ep_max;
  }

  PolicyArtifact art;
  art.env_id = env.spec().id;
  art.coalition = c;
  art.seed = artifact_stream_seed(master_seed, c);
  art.config_hash = cfg.hash_key(master_seed);
  art.num_actions = A;
  art.gamma = env.gamma();
  art.diag.episodes = cfg.episodes;
  art.diag.max_residual =
      *std::max_element(window.begin(),
                        window.begin() + std::min<long long>(100, cfg.episodes));
  for (int r = 0; r < R; ++r) {
    ObsRow row;
    row.actions.resize(A);
    for (int a = 0; a < A; ++a) {
      auto& as = row.actions[a];
      as.q = q[r * A + a];
      as.visits = visits[r * A + a];
      as.successors = std::move(succ[r * A + a]);
      if (as.visits == 0.0) ++art.diag.unvisited_pairs;
    }
    art.rows[obs_keys[r]] = std::move(row);
  }
  return art;
}

PolicyArtifact exact_masked(const CompiledEnv& env, const Coalition& c, double tol,
                            long long max_iter) {
  const int A = env.num_actions();
  const double gamma = env.gamma();
  const auto obs_of = env.obs_map(c);

  std::map<ObsIndex, std::vector<int>> members;  // obs -> non-terminal states
  for (int s : env.nonterminal_indices()) members[obs_of[s]].push_back(s);

  // Abstract transition model under a uniform occupancy per observation;
  // terminal underlying successors route to the absorbing kTerminalObs.
  std::map<ObsIndex, ObsRow> rows;
  for (const auto& [obs, group] : members) {
    ObsRow row;
    row.actions.resize(A);
    double w = 1.0 / static_cast<double>(group.size());
    for (int a = 0; a < A; ++a) {
      auto& as = row.actions[a];
      as.visits = static_cast<double>(group.size());
      for (int s : group) {
        for (const auto& o : env.outcomes(s, a)) {
          ObsIndex next = env.terminal(o.next) ? kTerminalObs : obs_of[o.next];
          auto& stat = as.successors[next];
          stat.weight += w * o.prob;
          stat.reward_sum += w * o.prob * o.reward;
        }
      }
    }
    rows[obs] = std::move(row);
  }

  std::map<ObsIndex, double> value;
  for (const auto& [obs, _] : rows) value[obs] = 0.0;
  double residual = 0.0;
  ObsIndex worst = 0;
  for (long long iter = 0;; ++iter) {
    if (iter >= max_iter)
      throw ConvergenceError("abstract value iteration did not converge at observation " +
                             std::to_string(worst) + " of " + env.spec().id + "/" +
                             c.key());
    residual = 0.0;
    for (auto& [obs, v] : value) {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& as : rows[obs].actions) {
        double q = 0.0;
        for (const auto& [next, stat] : as.successors)
          q += stat.reward_sum +
               stat.weight * gamma * (next == kTerminalObs ? 0.0 : value[next]);
        best = std::max(best, q);
      }
      double delta = std::abs(best - v);
      if (delta > residual) {
        residual = delta;
        worst = obs;
      }
      v = best;
    }
    if (residual <= tol) break;
  }
  for (auto& [obs, row] : rows) {
    for (auto& as : row.actions) {
      double q = 0.0;
      for (const auto& [next, stat] : as.successors)
        q += stat.reward_sum +
             stat.weight * gamma * (next == kTerminalObs ? 0.0 : value[next]);
      as.q = q;
    }
  }

  PolicyArtifact art;
  art.env_id = env.spec().id;
  art.coalition = c;
  art.config_hash = "exact-abstract";
  art.num_actions = A;
  art.gamma = gamma;
  art.diag.exact = true;
  art.diag.max_residual = residual;
  art.rows = std::move(rows);
  return art;
}

PolicyArtifact train_artifact(const CompiledEnv& env, const Coalition& c,
                              const TrainConfig& cfg, std::uint64_t master_seed) {
  PolicyArtifact art;
  if (cfg.backend == TrainBackend::exact) {
    art = c.is_full(env.spec().space.size()) ? value_iteration(env) : exact_masked(env, c);
  } else {
    return q_learning_masked(env, c, cfg, master_seed);
  }
  art.config_hash = cfg.hash_key(master_seed);
  return art;
}

int greedy_action(const PolicyArtifact& art, ObsIndex obs) {
  const ObsRow& row = art.row(obs);
  int best = 0;
  for (int a = 1; a < art.num_actions; ++a)
    if (row.actions[a].q > row.actions[best].q) best = a;
  return best;
}

std::vector<int> rank_actions(const PolicyArtifact& art, ObsIndex obs) {
  const ObsRow& row = art.row(obs);
  std::vector<int> order(art.num_actions);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (row.actions[a].q != row.actions[b].q) return row.actions[a].q > row.actions[b].q;
    return a < b;
  });
  return order;
}

std::vector<std::pair<ObsIndex, double>> abstract_successor_expectation(
    const PolicyArtifact& art, ObsIndex obs, int action) {
  const ObsRow& row = art.row(obs);
  if (action < 0 || action >= art.num_actions)
    throw LookupError("action out of range in abstract_successor_expectation");
  const auto& succ = row.actions[action].successors;
  double total = 0.0;
  for (const auto& [_, stat] : succ) total += stat.weight;
  if (succ.empty() || total <= 0.0)
    throw EvalError("unobserved transition: coalition " + art.coalition.key() +
                    ", observation " + std::to_string(obs) + ", action " +
                    std::to_string(action) + " has no recorded successors");
  std::vector<std::pair<ObsIndex, double>> out;
  out.reserve(succ.size());
  for (const auto& [next, stat] : succ) out.emplace_back(next, stat.weight / total);
  return out;
}

}  // namespace csvx
