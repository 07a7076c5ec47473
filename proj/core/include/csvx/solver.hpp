#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "csvx/artifact.hpp"
#include "csvx/env.hpp"

namespace csvx {

struct CompiledOutcome {
  int next = 0;
  double prob = 1.0;
  double reward = 0.0;
};

/// Reachable-state index tables for an EnvSpec; every solver runs on these
/// dense indices instead of factored states.
class CompiledEnv {
 public:
  explicit CompiledEnv(const EnvSpec& spec);

  const EnvSpec& spec() const { return spec_; }
  int num_states() const { return static_cast<int>(states_.size()); }
  int num_actions() const { return spec_.num_actions(); }
  double gamma() const { return spec_.gamma; }

  const State& state(int idx) const { return states_[idx]; }
  int index_of(const State& s) const;
  bool terminal(int idx) const { return terminal_[idx]; }
  std::span<const CompiledOutcome> outcomes(int s, int a) const;
  const std::vector<int>& nonterminal_indices() const { return nonterminal_; }

  /// Masked-observation index of every reachable state under a coalition.
  std::vector<ObsIndex> obs_map(const Coalition& c) const;

 private:
  EnvSpec spec_;
  std::vector<State> states_;
  std::unordered_map<long long, int> index_;  // packed full state -> dense index
  std::vector<bool> terminal_;
  std::vector<int> nonterminal_;
  std::vector<std::vector<CompiledOutcome>> table_;  // [s * A + a]
};

/// Per-coalition RNG stream derivation (master seed XOR coalition key hash).
std::uint64_t artifact_stream_seed(std::uint64_t master_seed, const Coalition& c);

/// Bellman-optimal Q over the full feature set; artifact marked exact.
PolicyArtifact value_iteration(const CompiledEnv& env, double tol = 1e-10,
                               long long max_iter = 200000);

/// Tabular Q-learning over the coalition's masked observation space with
/// exploring starts and epsilon-greedy behavior. Deterministic per
/// (env, coalition, config, seed).
PolicyArtifact q_learning_masked(const CompiledEnv& env, const Coalition& c,
                                 const TrainConfig& cfg, std::uint64_t master_seed);

/// Value iteration on the abstract MDP induced by the coalition, with a
/// uniform occupancy over the non-terminal states behind each observation.
/// Exact for coalitions whose masked process is Markov.
PolicyArtifact exact_masked(const CompiledEnv& env, const Coalition& c,
                            double tol = 1e-10, long long max_iter = 200000);

/// Dispatches on cfg.backend; the full coalition always uses value_iteration
/// when the backend is exact.
PolicyArtifact train_artifact(const CompiledEnv& env, const Coalition& c,
                              const TrainConfig& cfg, std::uint64_t master_seed);

/// argmax_a Q(obs, a); ties broken by lowest action id.
int greedy_action(const PolicyArtifact& art, ObsIndex obs);

/// Actions sorted by Q descending, ties by ascending id; position 0 is a*.
std::vector<int> rank_actions(const PolicyArtifact& art, ObsIndex obs);

/// Normalized successor-observation distribution recorded for (obs, action).
/// Throws EvalError if the pair was never observed.
std::vector<std::pair<ObsIndex, double>> abstract_successor_expectation(
    const PolicyArtifact& art, ObsIndex obs, int action);

}  // namespace csvx
