#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "csvx/coalition.hpp"
#include "csvx/errors.hpp"

#include <json.hpp>

namespace csvx {

using ObsIndex = long long;

/// Successor recorded for a terminal underlying state; its value is 0.
inline constexpr ObsIndex kTerminalObs = -1;

enum class TrainBackend { q_learning, exact };

struct TrainConfig {
  long long episodes = 200000;
  int max_steps = 200;
  double alpha0 = 0.1;        // decays as alpha0 / sqrt(visits)
  double eps_start = 0.3;     // linear schedule over episodes
  double eps_end = 0.05;
  double convergence_threshold = 0.05;
  TrainBackend backend = TrainBackend::q_learning;

  void validate() const;
  /// Canonical cache-key hash over all fields plus the master seed.
  std::string hash_key(std::uint64_t master_seed) const;
};

struct SuccessorStat {
  double weight = 0.0;      // visit count (empirical) or probability mass (exact)
  double reward_sum = 0.0;  // weight-accumulated rewards
};

struct ActionStats {
  double q = 0.0;
  double visits = 0.0;
  std::map<ObsIndex, SuccessorStat> successors;
};

struct ObsRow {
  std::vector<ActionStats> actions;
};

struct Diagnostics {
  double max_residual = 0.0;  // max Q-update magnitude over the last 100
                              // episodes, or the final Bellman residual
  long long episodes = 0;
  bool exact = false;
  long long unvisited_pairs = 0;
};

/// Frozen Q-table (plus empirical abstract transition counts) for one
/// (environment, coalition, seed) triple.
struct PolicyArtifact {
  static constexpr int kSchemaVersion = 1;

  std::string env_id;
  Coalition coalition;
  std::uint64_t seed = 0;
  std::string config_hash;
  int num_actions = 0;
  double gamma = 1.0;
  std::map<ObsIndex, ObsRow> rows;
  Diagnostics diag;

  double q(ObsIndex obs, int action) const;
  /// V(obs) = max_a Q(obs, a); V(kTerminalObs) = 0.
  double v(ObsIndex obs) const;
  const ObsRow& row(ObsIndex obs) const;
  bool has_obs(ObsIndex obs) const { return obs == kTerminalObs || rows.count(obs) > 0; }

  bool converged(double threshold) const {
    return diag.exact || diag.max_residual <= threshold;
  }

  /// Serialization is canonical: identical artifacts give identical bytes.
  nlohmann::json to_json() const;
  std::string serialize() const;
  static PolicyArtifact from_json(const nlohmann::json& j, bool verify_hash = true);
};

/// Derived state-value table, keyed like the Q-table.
using VTable = std::map<ObsIndex, double>;
VTable v_table(const PolicyArtifact& art);

}  // namespace csvx
