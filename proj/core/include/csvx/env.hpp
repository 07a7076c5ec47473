#pragma once

#include <functional>
#include <string>
#include <vector>

#include "csvx/coalition.hpp"
#include "csvx/feature_space.hpp"

namespace csvx {

struct Outcome {
  State next;
  double prob = 1.0;
  double reward = 0.0;
};

/// A finite factored MDP. Terminal states must self-loop with reward 0.
struct EnvSpec {
  std::string id;
  FeatureSpace space;
  std::vector<std::string> actions;
  double gamma = 1.0;
  std::function<std::vector<Outcome>(const State&, int)> transition;
  std::function<bool(const State&)> is_terminal;
  std::vector<State> initial_states;

  int num_actions() const { return static_cast<int>(actions.size()); }
  std::vector<Outcome> step(const State& s, int action) const;
};

/// All states reachable from the initial states under any action sequence.
/// Deterministic order: breadth-first, outcomes in declaration order.
std::vector<State> reachable_states(const EnvSpec& env);

/// Checks distribution sums (1 within 1e-12) and terminal self-loops over
/// the reachable set. Throws ValidationError on the first violation.
void validate_env(const EnvSpec& env);

/// { s' : exists a with P(s'|s,a) > 0 }, sorted by packed index.
std::vector<State> successor_set(const EnvSpec& env, const State& s);

}  // namespace csvx
