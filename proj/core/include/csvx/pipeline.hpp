#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "csvx/cache.hpp"
#include "csvx/envs.hpp"
#include "csvx/report.hpp"

namespace csvx {

/// One run's worth of configuration; mirrors the CLI flags and the JSON
/// config file.
struct RunConfig {
  std::string env = "gridworld1";
  std::optional<std::string> fixture;
  std::optional<State> state;
  std::uint64_t master_seed = 1;
  TrainConfig train;
  std::vector<Method> methods = {Method::vanilla, Method::cd, Method::acd};
  Source source = Source::q;
  ActionBinding binding = ActionBinding::fixed;
  std::string cache_dir = "cache";
  std::string format = "json";
  bool force = false;

  void validate() const;
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Explanation features for an environment: identity everywhere except
/// minesweeper, where all revealed cells collapse into one feature. The
/// minesweeper grouping is state-dependent.
FeatureGrouping explanation_grouping(const EnvSpec& env,
                                     const std::optional<State>& state);

struct TrainEntry {
  std::string coalition;
  bool cached = false;
  bool exact = false;
  double max_residual = 0.0;
  long long episodes = 0;
  long long unvisited_pairs = 0;
  bool gate_ok = true;
};

struct TrainSummary {
  int trained = 0;
  int cached = 0;
  std::vector<TrainEntry> entries;
  bool gate_failed = false;
};

/// Trains (or loads from cache) artifacts for every nonempty coalition plus
/// the exact full-feature artifact. Idempotent via cache keys. Throws
/// ConvergenceError on gate failures unless cfg.force.
TrainSummary cmd_train(const RunConfig& cfg, const EnvSpec& env, std::ostream& log);

/// Loads the artifact store cmd_train produced; the full coalition is backed
/// by the exact value-iteration artifact.
ArtifactStore load_store(const RunConfig& cfg, const EnvSpec& env,
                         const FeatureGrouping& grouping);

ExplanationReport cmd_explain(const RunConfig& cfg, const EnvSpec& env,
                              const State& state);

struct AxiomSuiteResult {
  struct Entry {
    std::string env;
    std::string state;
    std::string method;
    std::string axiom;
    double value = 0.0;
    bool pass = false;
  };
  std::vector<Entry> entries;
  bool ok = true;
  nlohmann::json to_json() const;
};

/// Efficiency / antisymmetry / dummy / symmetry checks across states and
/// methods; for gridworld1 this also sweeps a dummy-feature variant.
AxiomSuiteResult cmd_axioms(const RunConfig& cfg, const EnvSpec& env, std::ostream& log);

/// Builds one report row (CVF -> exact Shapley) for a bound query.
ReportRow explain_row(const CvfQuery& query, const FeatureSpace& space,
                      const ArtifactStore& store, const FeatureGrouping& grouping,
                      double convergence_threshold, bool force);

}  // namespace csvx
