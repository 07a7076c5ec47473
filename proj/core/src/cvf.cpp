#include "csvx/cvf.hpp"

#include <algorithm>

namespace csvx {

std::string method_name(Method m) {
  switch (m) {
    case Method::vanilla: return "vanilla";
    case Method::cd: return "cd";
    case Method::acd: return "acd";
  }
  return "?";
}

std::string source_name(Source s) { return s == Source::q ? "q" : "v"; }

Method parse_method(const std::string& name) {
  if (name == "vanilla") return Method::vanilla;
  if (name == "cd") return Method::cd;
  if (name == "acd") return Method::acd;
  throw ValidationError("unknown method '" + name + "' (expected vanilla|cd|acd)");
}

Source parse_source(const std::string& name) {
  if (name == "q") return Source::q;
  if (name == "v") return Source::v;
  throw ValidationError("unknown value source '" + name + "' (expected q|v)");
}

ActionBinding parse_binding(const std::string& name) {
  if (name == "fixed") return ActionBinding::fixed;
  if (name == "per-coalition") return ActionBinding::per_coalition;
  throw ValidationError("unknown action binding '" + name +
                        "' (expected fixed|per-coalition)");
}

void ArtifactStore::put(std::shared_ptr<const PolicyArtifact> art) {
  if (!art) throw ValidationError("null artifact");
  by_coalition_[art->coalition] = std::move(art);
}

const PolicyArtifact& ArtifactStore::at(const Coalition& c) const {
  auto it = by_coalition_.find(c);
  if (it == by_coalition_.end())
    throw LookupError("no artifact for coalition " + c.key() +
                      "; run the train command first");
  return *it->second;
}

FeatureGrouping FeatureGrouping::identity(const FeatureSpace& space) {
  FeatureGrouping g;
  for (int i = 0; i < space.size(); ++i) {
    g.labels.push_back(space.dim(i).name);
    g.groups.push_back(Coalition({i}));
  }
  return g;
}

Coalition FeatureGrouping::expand(const Coalition& group_coalition) const {
  std::vector<int> members;
  for (int g : group_coalition.members()) {
    if (g < 0 || g >= size())
      throw ValidationError("group index " + std::to_string(g) + " out of range");
    for (int i : groups[g].members()) members.push_back(i);
  }
  return Coalition(std::move(members));
}

double delta_q(const PolicyArtifact& art, ObsIndex obs, int a_star, int a) {
  return art.q(obs, a_star) - art.q(obs, a);
}

double delta_v(const VTable& v, ObsIndex obs_star, ObsIndex obs_prime) {
  auto lookup = [&v](ObsIndex o) {
    if (o == kTerminalObs) return 0.0;
    auto it = v.find(o);
    if (it == v.end())
      throw LookupError("observation " + std::to_string(o) + " missing from V-table");
    return it->second;
  };
  return lookup(obs_star) - lookup(obs_prime);
}

namespace {

// The v-source works on calibrated one-step returns, r + gamma*V(s'), rather
// than bare successor values: with episodic termination V(terminal) is 0, so
// bare V would rate a goal-entering transition below an ordinary move and
// invert every comparison adjacent to a goal. Including the transition reward
// keeps successor values on the same scale as the Q entries.
double expected_return(const PolicyArtifact& art, ObsIndex obs, int a) {
  const auto& succ = art.row(obs).actions[a].successors;
  double total = 0.0, acc = 0.0;
  for (const auto& [next, stat] : succ) {
    if (stat.weight <= 0.0) continue;
    total += stat.weight;
    acc += stat.reward_sum + stat.weight * art.gamma * art.v(next);
  }
  if (total <= 0.0)
    throw EvalError("no recorded successors for observation " + std::to_string(obs) +
                    " action " + std::to_string(a) + " in coalition " +
                    art.coalition.key());
  return acc / total;
}

// Entering value of one successor observation: mean reward collected on any
// recorded transition into it, plus the discounted value there.
double successor_return(const PolicyArtifact& art, ObsIndex obs, ObsIndex next) {
  double total = 0.0, rewards = 0.0;
  const ObsRow& row = art.row(obs);
  for (int a = 0; a < art.num_actions; ++a) {
    auto it = row.actions[a].successors.find(next);
    if (it != row.actions[a].successors.end() && it->second.weight > 0.0) {
      total += it->second.weight;
      rewards += it->second.reward_sum;
    }
  }
  if (total <= 0.0)
    throw EvalError("successor " + std::to_string(next) + " never recorded from " +
                    std::to_string(obs) + " in coalition " + art.coalition.key());
  return rewards / total + art.gamma * art.v(next);
}

// Union of recorded successor observations over every action.
std::vector<ObsIndex> successor_union(const PolicyArtifact& art, ObsIndex obs) {
  std::vector<ObsIndex> keys;
  const ObsRow& row = art.row(obs);
  for (int a = 0; a < art.num_actions; ++a)
    for (const auto& [next, stat] : row.actions[a].successors)
      if (stat.weight > 0.0) keys.push_back(next);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  if (keys.empty())
    throw EvalError("no recorded successors for observation " + std::to_string(obs) +
                    " in coalition " + art.coalition.key());
  return keys;
}

double avg_delta_return(const PolicyArtifact& art, ObsIndex obs, int a_star) {
  double v_star = expected_return(art, obs, a_star);
  auto keys = successor_union(art, obs);
  double sum = 0.0;
  for (ObsIndex next : keys) sum += v_star - successor_return(art, obs, next);
  return sum / static_cast<double>(keys.size());
}

}  // namespace

double avg_delta_q(const PolicyArtifact& art, ObsIndex obs, int a_star) {
  if (a_star != greedy_action(art, obs))
    throw ValidationError("avg_delta_q is defined for the greedy action only");
  double sum = 0.0;
  for (int a = 0; a < art.num_actions; ++a) sum += art.q(obs, a_star) - art.q(obs, a);
  return sum / static_cast<double>(art.num_actions);
}

double avg_delta_v(const PolicyArtifact& art, ObsIndex obs) {
  // Raw Eq. 5 diagnostic over bare successor values.
  const int a_star = greedy_action(art, obs);
  double v_star = 0.0;
  for (const auto& [next, p] : abstract_successor_expectation(art, obs, a_star))
    v_star += p * art.v(next);
  auto keys = successor_union(art, obs);
  double sum = 0.0;
  for (ObsIndex next : keys) sum += v_star - art.v(next);
  return sum / static_cast<double>(keys.size());
}

struct CharacteristicFn::Impl {
  CvfQuery query;
  FeatureSpace space;
  FeatureGrouping grouping;
  std::map<Coalition, std::shared_ptr<const PolicyArtifact>> artifacts;
  int action_i = 0;
  int action_j = 0;

  const PolicyArtifact& artifact(const Coalition& c) const {
    auto it = artifacts.find(c);
    if (it == artifacts.end())
      throw LookupError("no artifact for coalition " + c.key());
    return *it->second;
  }

  // Counterfactual-difference payoffs (cd, acd) are baselined against the
  // feature-blind artifact (empty coalition) so that a feature carrying no
  // information gets exactly zero attribution: with the bare v(empty)=0
  // convention, even a constant feature would be credited with the whole
  // advantage a blind policy assigns to the bound actions. Vanilla payoffs
  // measure absolute restricted values and stay unbaselined.
  double blind_value = 0.0;

  // Direct coalition-value map; set only by synthetic_cvf, bypasses artifacts.
  std::function<double(const Coalition&)> direct;

  double evaluate(const Coalition& group_coalition) const {
    if (group_coalition.is_empty()) return 0.0;
    if (direct) return direct(group_coalition);
    Coalition c = grouping.expand(group_coalition);
    return raw(artifact(c), obs_index(space, c, query.state), c) - blind_value;
  }

  double raw(const PolicyArtifact& art, ObsIndex obs, const Coalition& c) const {
    int ai = action_i, aj = action_j;
    if (query.binding == ActionBinding::per_coalition) {
      auto ranks = rank_actions(art, obs);
      ai = ranks[query.rank_i];
      aj = ranks[query.rank_j];
    }
    int a_star = query.binding == ActionBinding::per_coalition
                     ? greedy_action(art, obs)
                     : action_star;

    try {
      switch (query.method) {
        case Method::vanilla:
          return query.source == Source::q ? art.q(obs, ai)
                                           : expected_return(art, obs, ai);
        case Method::cd:
          return query.source == Source::q
                     ? delta_q(art, obs, ai, aj)
                     : expected_return(art, obs, ai) - expected_return(art, obs, aj);
        case Method::acd: {
          if (query.source == Source::q) {
            double sum = 0.0;
            for (int a = 0; a < art.num_actions; ++a)
              sum += art.q(obs, a_star) - art.q(obs, a);
            return sum / static_cast<double>(art.num_actions);
          }
          return avg_delta_return(art, obs, a_star);
        }
      }
    } catch (const EvalError& e) {
      throw EvalError(std::string(e.what()) + " [coalition " + c.key() + ", state obs " +
                      std::to_string(obs) + "]");
    }
    throw ValidationError("unreachable CVF method");
  }

  int action_star = 0;  // rank-0 action of the full-feature artifact
};

CharacteristicFn build_cvf(const CvfQuery& query, const FeatureSpace& space,
                           const ArtifactStore& store, const FeatureGrouping& grouping,
                           double convergence_threshold, bool force) {
  auto impl = std::make_shared<CharacteristicFn::Impl>();
  impl->query = query;
  impl->space = space;
  impl->grouping = grouping;
  space.require_valid(query.state);

  const int n = grouping.size();
  if (n < 1) throw ValidationError("feature grouping is empty");

  // Collect and vet every artifact the query can touch; the empty coalition's
  // blind artifact anchors the baseline.
  std::string missing, unconverged;
  auto coalitions = all_coalitions(n);
  for (const auto& gc : coalitions) {
    Coalition c = grouping.expand(gc);
    if (!store.has(c)) {
      missing += (missing.empty() ? "" : ", ") + c.key();
      continue;
    }
    const PolicyArtifact& art = store.at(c);
    if (!art.converged(convergence_threshold) && !force)
      unconverged += (unconverged.empty() ? "" : ", ") + c.key();
    impl->artifacts[c] = store.all().at(c);
  }
  if (!missing.empty())
    throw LookupError("missing artifacts for coalitions: " + missing +
                      "; run the train command first");
  if (!unconverged.empty())
    throw ConvergenceError("artifacts failed the convergence gate: " + unconverged +
                           " (rerun training or pass --force)");

  const Coalition full = grouping.expand(Coalition::full(n));
  const PolicyArtifact& full_art = impl->artifact(full);
  const int A = full_art.num_actions;
  if (query.rank_i < 0 || query.rank_i >= A || query.rank_j < 0 || query.rank_j >= A)
    throw ValidationError("action rank out of range for this environment");
  if (query.method == Method::cd && query.rank_i == query.rank_j)
    throw ValidationError("cd requires two distinct action ranks");

  auto ranks = rank_actions(full_art, obs_index(space, full, query.state));
  impl->action_i = ranks[query.rank_i];
  impl->action_j = ranks[query.rank_j];
  impl->action_star = ranks[0];
  if (query.method != Method::vanilla) {
    const Coalition blind;
    impl->blind_value = impl->raw(impl->artifact(blind), 0, blind);
  }

  CharacteristicFn fn;
  fn.impl_ = std::move(impl);
  return fn;
}

CharacteristicFn build_cvf(const CvfQuery& query, const FeatureSpace& space,
                           const ArtifactStore& store, double convergence_threshold,
                           bool force) {
  return build_cvf(query, space, store, FeatureGrouping::identity(space),
                   convergence_threshold, force);
}

CharacteristicFn synthetic_cvf(int n, std::function<double(const Coalition&)> value) {
  if (n < 1) throw ValidationError("synthetic_cvf needs at least one feature");
  if (!value) throw ValidationError("synthetic_cvf needs a value function");
  auto impl = std::make_shared<CharacteristicFn::Impl>();
  impl->direct = std::move(value);
  for (int i = 0; i < n; ++i) {
    impl->grouping.labels.push_back("f" + std::to_string(i));
    impl->grouping.groups.push_back(Coalition(std::vector<int>{i}));
  }
  CharacteristicFn fn;
  fn.impl_ = std::move(impl);
  return fn;
}

double CharacteristicFn::operator()(const Coalition& c) const { return impl_->evaluate(c); }
int CharacteristicFn::num_features() const { return impl_->grouping.size(); }
const CvfQuery& CharacteristicFn::query() const { return impl_->query; }
const FeatureGrouping& CharacteristicFn::grouping() const { return impl_->grouping; }
int CharacteristicFn::action_i() const { return impl_->action_i; }
int CharacteristicFn::action_j() const { return impl_->action_j; }

std::vector<std::pair<Coalition, double>> cvf_table(const CharacteristicFn& fn) {
  std::vector<std::pair<Coalition, double>> out;
  for (const auto& c : all_coalitions(fn.num_features())) {
    try {
      out.emplace_back(c, fn(c));
    } catch (const EvalError& e) {
      throw EvalError(std::string(e.what()) + " [while tabulating coalition " + c.key() +
                      "]");
    }
  }
  return out;
}

}  // namespace csvx
