#include "csvx/env.hpp"

#include <cmath>
#include <deque>
#include <set>
#include <unordered_set>

namespace csvx {

std::vector<Outcome> EnvSpec::step(const State& s, int action) const {
  space.require_valid(s);
  if (action < 0 || action >= num_actions())
    throw ValidationError("action " + std::to_string(action) + " out of range for env " + id);
  return transition(s, action);
}

std::vector<State> reachable_states(const EnvSpec& env) {
  std::vector<State> out;
  std::unordered_set<long long> seen;
  std::deque<long long> frontier;
  for (const auto& s : env.initial_states) {
    long long idx = env.space.pack(s);
    if (seen.insert(idx).second) {
      out.push_back(s);
      frontier.push_back(idx);
    }
  }
  while (!frontier.empty()) {
    State s = env.space.unpack(frontier.front());
    frontier.pop_front();
    for (int a = 0; a < env.num_actions(); ++a) {
      for (const auto& o : env.transition(s, a)) {
        if (o.prob <= 0.0) continue;
        long long idx = env.space.pack(o.next);
        if (seen.insert(idx).second) {
          out.push_back(o.next);
          frontier.push_back(idx);
        }
      }
    }
  }
  return out;
}

void validate_env(const EnvSpec& env) {
  if (env.num_actions() < 1) throw ValidationError("env " + env.id + " has no actions");
  if (env.gamma < 0.0 || env.gamma > 1.0)
    throw ValidationError("env " + env.id + " has discount outside [0,1]");
  if (env.initial_states.empty())
    throw ValidationError("env " + env.id + " has no initial states");
  for (const auto& s : reachable_states(env)) {
    bool terminal = env.is_terminal(s);
    for (int a = 0; a < env.num_actions(); ++a) {
      double total = 0.0;
      for (const auto& o : env.transition(s, a)) {
        env.space.require_valid(o.next);
        if (o.prob < 0.0) throw ValidationError("negative transition probability in " + env.id);
        total += o.prob;
        if (terminal && o.prob > 0.0 &&
            (env.space.pack(o.next) != env.space.pack(s) || o.reward != 0.0))
          throw ValidationError("terminal state in " + env.id +
                                " does not self-loop with reward 0");
      }
      if (std::abs(total - 1.0) > 1e-12)
        throw ValidationError("transition distribution does not sum to 1 in " + env.id);
    }
  }
}

std::vector<State> successor_set(const EnvSpec& env, const State& s) {
  std::set<long long> next;
  for (int a = 0; a < env.num_actions(); ++a)
    for (const auto& o : env.transition(s, a))
      if (o.prob > 0.0) next.insert(env.space.pack(o.next));
  std::vector<State> out;
  out.reserve(next.size());
  for (long long idx : next) out.push_back(env.space.unpack(idx));
  return out;
}

}  // namespace csvx
