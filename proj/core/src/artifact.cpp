#include "csvx/artifact.hpp"

#include <cmath>
#include <cstdio>

#include "csvx/hash.hpp"

namespace csvx {

namespace {
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

void TrainConfig::validate() const {
  if (episodes < 1 || max_steps < 1)
    throw ValidationError("train config: episode and step counts must be positive");
  if (alpha0 <= 0.0 || alpha0 > 1.0)
    throw ValidationError("train config: learning rate must be in (0,1]");
  if (eps_start <= 0.0 || eps_start > 1.0 || eps_end <= 0.0 || eps_end > 1.0)
    throw ValidationError("train config: exploration rates must be in (0,1]");
  if (convergence_threshold <= 0.0)
    throw ValidationError("train config: convergence threshold must be positive");
}

std::string TrainConfig::hash_key(std::uint64_t master_seed) const {
  std::string s = "episodes=" + std::to_string(episodes) +
                  ";max_steps=" + std::to_string(max_steps) +
                  ";alpha0=" + fmt_double(alpha0) +
                  ";eps=" + fmt_double(eps_start) + ".." + fmt_double(eps_end) +
                  ";thresh=" + fmt_double(convergence_threshold) +
                  ";backend=" + (backend == TrainBackend::exact ? "exact" : "q") +
                  ";seed=" + std::to_string(master_seed);
  return hex64(fnv1a64(s));
}

double PolicyArtifact::q(ObsIndex obs, int action) const {
  const ObsRow& r = row(obs);
  if (action < 0 || action >= num_actions)
    throw LookupError("action " + std::to_string(action) + " out of range");
  return r.actions[action].q;
}

double PolicyArtifact::v(ObsIndex obs) const {
  if (obs == kTerminalObs) return 0.0;
  const ObsRow& r = row(obs);
  double best = r.actions.empty() ? 0.0 : r.actions[0].q;
  for (const auto& a : r.actions) best = std::max(best, a.q);
  return best;
}

const ObsRow& PolicyArtifact::row(ObsIndex obs) const {
  auto it = rows.find(obs);
  if (it == rows.end())
    throw LookupError("unknown observation " + std::to_string(obs) +
                      " in artifact " + env_id + "/" + coalition.key());
  return it->second;
}

nlohmann::json PolicyArtifact::to_json() const {
  nlohmann::json j;
  j["schema"] = kSchemaVersion;
  j["env"] = env_id;
  j["coalition"] = coalition.key();
  j["coalition_members"] = coalition.members();
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["num_actions"] = num_actions;
  j["gamma"] = gamma;
  j["diagnostics"] = {{"max_residual", diag.max_residual},
                      {"episodes", diag.episodes},
                      {"exact", diag.exact},
                      {"unvisited_pairs", diag.unvisited_pairs}};
  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& [obs, row] : rows) {
    nlohmann::json jactions = nlohmann::json::array();
    for (const auto& a : row.actions) {
      nlohmann::json jsucc = nlohmann::json::array();
      for (const auto& [next, stat] : a.successors)
        jsucc.push_back({next, stat.weight, stat.reward_sum});
      jactions.push_back({{"q", a.q}, {"visits", a.visits}, {"succ", jsucc}});
    }
    jrows.push_back({obs, jactions});
  }
  j["rows"] = std::move(jrows);
  j["content_hash"] = hex64(fnv1a64(j.dump()));
  return j;
}

std::string PolicyArtifact::serialize() const { return to_json().dump(); }

PolicyArtifact PolicyArtifact::from_json(const nlohmann::json& j, bool verify_hash) {
  try {
    if (j.at("schema").get<int>() != kSchemaVersion)
      throw CacheError("artifact schema version mismatch");
    if (verify_hash) {
      nlohmann::json body = j;
      std::string stored = body.at("content_hash").get<std::string>();
      body.erase("content_hash");
      if (hex64(fnv1a64(body.dump())) != stored)
        throw CacheError("artifact content hash mismatch (corrupted cache file)");
    }
    PolicyArtifact art;
    art.env_id = j.at("env").get<std::string>();
    art.coalition = Coalition(j.at("coalition_members").get<std::vector<int>>());
    art.seed = j.at("seed").get<std::uint64_t>();
    art.config_hash = j.at("config_hash").get<std::string>();
    art.num_actions = j.at("num_actions").get<int>();
    art.gamma = j.at("gamma").get<double>();
    const auto& d = j.at("diagnostics");
    art.diag.max_residual = d.at("max_residual").get<double>();
    art.diag.episodes = d.at("episodes").get<long long>();
    art.diag.exact = d.at("exact").get<bool>();
    art.diag.unvisited_pairs = d.at("unvisited_pairs").get<long long>();
    for (const auto& jrow : j.at("rows")) {
      ObsIndex obs = jrow.at(0).get<ObsIndex>();
      ObsRow row;
      for (const auto& ja : jrow.at(1)) {
        ActionStats a;
        a.q = ja.at("q").get<double>();
        a.visits = ja.at("visits").get<double>();
        for (const auto& js : ja.at("succ"))
          a.successors[js.at(0).get<ObsIndex>()] = {js.at(1).get<double>(),
                                                    js.at(2).get<double>()};
        row.actions.push_back(std::move(a));
      }
      art.rows[obs] = std::move(row);
    }
    return art;
  } catch (const nlohmann::json::exception& e) {
    throw CacheError(std::string("malformed artifact file: ") + e.what());
  }
}

VTable v_table(const PolicyArtifact& art) {
  VTable v;
  for (const auto& [obs, row] : art.rows) v[obs] = art.v(obs);
  return v;
}

}  // namespace csvx
