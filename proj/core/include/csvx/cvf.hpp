#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "csvx/artifact.hpp"
#include "csvx/solver.hpp"

namespace csvx {

enum class Method { vanilla, cd, acd };
enum class Source { q, v };
enum class ActionBinding { fixed, per_coalition };

std::string method_name(Method m);
std::string source_name(Source s);
Method parse_method(const std::string& name);
Source parse_source(const std::string& name);
ActionBinding parse_binding(const std::string& name);

/// One explanation query: which state, which CVF recipe, which action ranks.
/// rank_i / rank_j index into rank_actions of the full-feature artifact.
struct CvfQuery {
  std::string env_id;
  State state;
  Method method = Method::acd;
  Source source = Source::q;
  int rank_i = 0;
  int rank_j = 1;
  ActionBinding binding = ActionBinding::fixed;
};

/// Per-coalition policy artifacts for one environment.
class ArtifactStore {
 public:
  void put(std::shared_ptr<const PolicyArtifact> art);
  bool has(const Coalition& c) const { return by_coalition_.count(c) > 0; }
  const PolicyArtifact& at(const Coalition& c) const;
  const std::map<Coalition, std::shared_ptr<const PolicyArtifact>>& all() const {
    return by_coalition_;
  }

 private:
  std::map<Coalition, std::shared_ptr<const PolicyArtifact>> by_coalition_;
};

/// Maps explanation features onto underlying state features. The identity
/// grouping is one group per feature; minesweeper aggregates all revealed
/// cells into a single group.
struct FeatureGrouping {
  std::vector<std::string> labels;
  std::vector<Coalition> groups;  // underlying feature indices per group

  static FeatureGrouping identity(const FeatureSpace& space);
  int size() const { return static_cast<int>(groups.size()); }
  Coalition expand(const Coalition& group_coalition) const;
};

// Raw counterfactual-difference diagnostics.
double delta_q(const PolicyArtifact& art, ObsIndex obs, int a_star, int a);
double delta_v(const VTable& v, ObsIndex obs_star, ObsIndex obs_prime);
/// Mean of Q(obs,a*) - Q(obs,a) over ALL actions (the a = a* term is zero).
/// a_star must be the greedy action.
double avg_delta_q(const PolicyArtifact& art, ObsIndex obs, int a_star);
/// Mean of V(s*) - V(s') over recorded successors of obs under every action,
/// with s* the expected-best successor under the greedy action.
double avg_delta_v(const PolicyArtifact& art, ObsIndex obs);

/// A total map Coalition -> real with v(empty) = 0, bound to one query.
class CharacteristicFn {
 public:
  double operator()(const Coalition& c) const;
  int num_features() const;
  const CvfQuery& query() const;
  const FeatureGrouping& grouping() const;
  int action_i() const;  // concrete ids resolved from the full-feature ranking
  int action_j() const;

 private:
  friend CharacteristicFn build_cvf(const CvfQuery&, const FeatureSpace&,
                                    const ArtifactStore&, const FeatureGrouping&,
                                    double, bool);
  friend CharacteristicFn synthetic_cvf(int, std::function<double(const Coalition&)>);
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// Wraps an arbitrary total map Coalition -> real as a characteristic
/// function over n features, with v(empty) forced to 0. For synthetic games
/// (axiom/oracle tests, benchmarks); carries no artifact bindings.
CharacteristicFn synthetic_cvf(int n, std::function<double(const Coalition&)> value);

/// Binds a query to the artifact store. Requires a converged artifact for
/// every nonempty (expanded) coalition; action identities are fixed once
/// from the full-feature ranking unless per-coalition binding is requested.
CharacteristicFn build_cvf(const CvfQuery& query, const FeatureSpace& space,
                           const ArtifactStore& store, const FeatureGrouping& grouping,
                           double convergence_threshold = 0.05, bool force = false);
CharacteristicFn build_cvf(const CvfQuery& query, const FeatureSpace& space,
                           const ArtifactStore& store,
                           double convergence_threshold = 0.05, bool force = false);

/// Materializes all 2^n coalition values, ordered by size then lexicographic.
std::vector<std::pair<Coalition, double>> cvf_table(const CharacteristicFn& fn);

}  // namespace csvx
