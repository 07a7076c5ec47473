#include "csvx/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "csvx/shapley.hpp"
#include "csvx/solver.hpp"

namespace fs = std::filesystem;

namespace csvx {
namespace {

constexpr const char* kExactFullHash = "exact-vi";

Coalition full_coalition(const FeatureSpace& space) {
  std::vector<int> all(space.size());
  std::iota(all.begin(), all.end(), 0);
  return Coalition(std::move(all));
}

std::string coalition_label(const Coalition& c) {
  std::string out = "{";
  for (size_t i = 0; i < c.members().size(); ++i) {
    if (i) out += ",";
    out += std::to_string(c.members()[i]);
  }
  return out + "}";
}

std::string state_label(const State& s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out;
}

/// Underlying coalitions the grouping can produce, deduplicated. Includes the
/// empty coalition: its feature-blind artifact is the payoff baseline.
std::set<Coalition> training_coalitions(const FeatureGrouping& grouping) {
  const int n = grouping.size();
  if (n > kMaxExactFeatures) {
    throw CapacityError("explanation has " + std::to_string(n) + " features; exact enumeration caps at " +
                        std::to_string(kMaxExactFeatures));
  }
  std::set<Coalition> out;
  for (const auto& gc : all_coalitions(n)) out.insert(grouping.expand(gc));
  return out;
}

std::vector<Method> parse_methods(const nlohmann::json& j) {
  std::vector<Method> out;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "all") return {Method::vanilla, Method::cd, Method::acd};
    return {parse_method(s)};
  }
  for (const auto& m : j) out.push_back(parse_method(m.get<std::string>()));
  return out;
}

nlohmann::json train_config_json(const TrainConfig& t) {
  nlohmann::json j;
  j["episodes"] = t.episodes;
  j["max_steps"] = t.max_steps;
  j["alpha0"] = t.alpha0;
  j["eps_start"] = t.eps_start;
  j["eps_end"] = t.eps_end;
  j["convergence_threshold"] = t.convergence_threshold;
  j["backend"] = t.backend == TrainBackend::exact ? "exact" : "q_learning";
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig t;
  t.episodes = j.value("episodes", t.episodes);
  t.max_steps = j.value("max_steps", t.max_steps);
  t.alpha0 = j.value("alpha0", t.alpha0);
  t.eps_start = j.value("eps_start", t.eps_start);
  t.eps_end = j.value("eps_end", t.eps_end);
  t.convergence_threshold = j.value("convergence_threshold", t.convergence_threshold);
  const auto backend = j.value("backend", std::string("q_learning"));
  if (backend == "exact") {
    t.backend = TrainBackend::exact;
  } else if (backend == "q_learning") {
    t.backend = TrainBackend::q_learning;
  } else {
    throw ValidationError("unknown train backend: " + backend);
  }
  return t;
}

}  // namespace

void RunConfig::validate() const {
  static const std::array<std::string_view, 6> known_envs = {
      "gridworld1", "gridworld2", "frozenlake", "taxi", "minesweeper", "pendulum"};
  if (std::find(known_envs.begin(), known_envs.end(), env) == known_envs.end()) {
    throw ValidationError("unknown environment '" + env + "'");
  }
  train.validate();
  if (methods.empty()) throw ValidationError("method list is empty");
  if (format != "json" && format != "csv" && format != "markdown") {
    throw ValidationError("unknown output format: " + format);
  }
  if (cache_dir.empty()) throw ValidationError("cache directory is empty");
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  static const std::array<std::string_view, 11> known_keys = {
      "env",     "fixture",        "state",     "master_seed", "train", "methods",
      "source",  "action_binding", "cache_dir", "format",      "force"};
  for (const auto& [key, unused] : j.items()) {
    if (std::find(known_keys.begin(), known_keys.end(), key) == known_keys.end()) {
      throw ValidationError("unknown config field '" + key + "'");
    }
  }
  RunConfig cfg;
  cfg.env = j.value("env", cfg.env);
  if (j.contains("fixture") && !j.at("fixture").is_null()) {
    cfg.fixture = j.at("fixture").get<std::string>();
  }
  if (j.contains("state") && !j.at("state").is_null()) {
    cfg.state = j.at("state").get<State>();
  }
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  if (j.contains("train")) cfg.train = train_config_from_json(j.at("train"));
  if (j.contains("methods")) cfg.methods = parse_methods(j.at("methods"));
  cfg.source = parse_source(j.value("source", "q"));
  cfg.binding = parse_binding(j.value("action_binding", "fixed"));
  cfg.cache_dir = j.value("cache_dir", cfg.cache_dir);
  cfg.format = j.value("format", cfg.format);
  cfg.force = j.value("force", cfg.force);
  cfg.validate();
  return cfg;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["env"] = env;
  if (fixture) j["fixture"] = *fixture;
  if (state) j["state"] = *state;
  j["master_seed"] = master_seed;
  j["train"] = train_config_json(train);
  nlohmann::json ms = nlohmann::json::array();
  for (Method m : methods) ms.push_back(method_name(m));
  j["methods"] = ms;
  j["source"] = source_name(source);
  j["action_binding"] = binding == ActionBinding::fixed ? "fixed" : "per-coalition";
  j["cache_dir"] = cache_dir;
  j["format"] = format;
  j["force"] = force;
  return j;
}

FeatureGrouping explanation_grouping(const EnvSpec& env,
                                     const std::optional<State>& state) {
  if (env.id.rfind("minesweeper", 0) != 0) {
    return FeatureGrouping::identity(env.space);
  }
  if (!state) {
    throw ValidationError("minesweeper explanations are state-specific; pass --state");
  }
  env.space.require_valid(*state);
  FeatureGrouping g;
  std::vector<int> revealed;
  for (int i = 0; i < env.space.size(); ++i) {
    if ((*state)[i] == kCellHidden) {
      g.labels.push_back(env.space.dim(i).name);
      g.groups.push_back(Coalition({i}));
    } else {
      revealed.push_back(i);
    }
  }
  if (!revealed.empty()) {
    g.labels.push_back("revealed");
    g.groups.push_back(Coalition(std::move(revealed)));
  }
  if (g.groups.empty()) throw ValidationError("minesweeper state has no cells to explain");
  return g;
}

TrainSummary cmd_train(const RunConfig& cfg, const EnvSpec& env, std::ostream& log) {
  cfg.validate();
  CompiledEnv compiled(env);
  const auto grouping = explanation_grouping(env, cfg.state);
  const auto coalitions = training_coalitions(grouping);
  const fs::path cache(cfg.cache_dir);
  const std::string key = cfg.train.hash_key(cfg.master_seed);

  TrainSummary summary;
  std::vector<std::string> failures;
  auto record = [&](const PolicyArtifact& art, bool cached, const std::string& tag) {
    TrainEntry e;
    e.coalition = tag;
    e.cached = cached;
    e.exact = art.diag.exact;
    e.max_residual = art.diag.max_residual;
    e.episodes = art.diag.episodes;
    e.unvisited_pairs = art.diag.unvisited_pairs;
    e.gate_ok = art.converged(cfg.train.convergence_threshold);
    log << (cached ? "cached  " : "trained ") << tag
        << (art.diag.exact ? "  exact" : "") << "  residual=" << art.diag.max_residual
        << "  unvisited=" << art.diag.unvisited_pairs
        << (e.gate_ok ? "" : "  GATE FAILED") << "\n";
    if (!e.gate_ok) {
      summary.gate_failed = true;
      failures.push_back(tag);
    }
    (cached ? summary.cached : summary.trained) += 1;
    summary.entries.push_back(std::move(e));
  };

  for (const auto& c : coalitions) {
    const auto path = artifact_path(cache, env.id, c, key);
    if (fs::exists(path)) {
      record(load_artifact(path), true, c.key());
    } else {
      auto art = train_artifact(compiled, c, cfg.train, cfg.master_seed);
      save_artifact(cache, art);
      record(art, false, c.key());
    }
  }

  const Coalition full = full_coalition(env.space);
  const auto exact_path = artifact_path(cache, env.id, full, kExactFullHash);
  if (fs::exists(exact_path)) {
    record(load_artifact(exact_path), true, full.key() + " (exact)");
  } else {
    auto art = value_iteration(compiled);
    save_artifact(cache, art);
    record(art, false, full.key() + " (exact)");
  }

  log << "trained: " << summary.trained << "  cached: " << summary.cached << "\n";
  if (summary.gate_failed && !cfg.force) {
    std::string msg = "convergence gate failed for:";
    for (const auto& f : failures) msg += " " + f;
    throw ConvergenceError(msg + " (rerun with --force to override)");
  }
  return summary;
}

ArtifactStore load_store(const RunConfig& cfg, const EnvSpec& env,
                         const FeatureGrouping& grouping) {
  ArtifactStore store;
  const fs::path cache(cfg.cache_dir);
  const std::string key = cfg.train.hash_key(cfg.master_seed);
  const Coalition full = full_coalition(env.space);

  auto load_into = [&](const Coalition& c, const std::string& config_hash) {
    const auto path = artifact_path(cache, env.id, c, config_hash);
    if (!fs::exists(path)) {
      throw LookupError("no artifact for " + env.id + " coalition " + c.key() +
                        " at " + path.string() + "; run `csvx train --env " + cfg.env + "` first");
    }
    store.put(std::make_shared<const PolicyArtifact>(load_artifact(path)));
  };

  for (const auto& c : training_coalitions(grouping)) {
    if (c == full) continue;  // the full coalition binds to the exact artifact
    load_into(c, key);
  }
  load_into(full, kExactFullHash);
  return store;
}

ReportRow explain_row(const CvfQuery& query, const FeatureSpace& space,
                      const ArtifactStore& store, const FeatureGrouping& grouping,
                      double convergence_threshold, bool force) {
  const auto fn = build_cvf(query, space, store, grouping, convergence_threshold, force);
  const auto attr = shapley_exact(fn);

  ReportRow row;
  row.method = query.method;
  row.rank_i = query.rank_i;
  row.rank_j = query.rank_j;
  row.phi = attr.phi;
  row.v_full = attr.v_full;
  row.efficiency_residual =
      std::accumulate(attr.phi.begin(), attr.phi.end(), 0.0) - attr.v_full;
  switch (query.method) {
    case Method::vanilla:
      row.label = "Vani(" + std::to_string(query.rank_i) + ")";
      break;
    case Method::cd:
      row.label = "CD(" + std::to_string(query.rank_i) + "," + std::to_string(query.rank_j) + ")";
      break;
    case Method::acd:
      row.label = "ACD";
      break;
  }
  for (const auto& [c, value] : cvf_table(fn)) {
    row.cvf.emplace_back(coalition_label(c), value);
  }
  return row;
}

ExplanationReport cmd_explain(const RunConfig& cfg, const EnvSpec& env,
                              const State& state) {
  cfg.validate();
  env.space.require_valid(state);
  if (env.is_terminal(state)) {
    throw ValidationError("state " + state_label(state) + " is terminal; nothing to explain");
  }
  const auto grouping = explanation_grouping(env, state);
  const auto store = load_store(cfg, env, grouping);
  const Coalition full = full_coalition(env.space);
  const auto& full_art = store.at(full);
  const ObsIndex full_obs = obs_index(env.space, full, state);

  ExplanationReport rep;
  rep.env_id = env.id;
  rep.state = state;
  rep.source = cfg.source;
  rep.binding = cfg.binding;
  rep.feature_labels = grouping.labels;
  rep.action_names = env.actions;
  rep.action_ranking = rank_actions(full_art, full_obs);

  const int num_actions = env.num_actions();
  auto add_row = [&](Method m, int rank_i, int rank_j) {
    CvfQuery query{env.id, state, m, cfg.source, rank_i, rank_j, cfg.binding};
    rep.rows.push_back(explain_row(query, env.space, store, grouping,
                                   cfg.train.convergence_threshold, cfg.force));
  };
  for (Method m : cfg.methods) {
    switch (m) {
      case Method::vanilla:
        for (int i = 0; i < num_actions; ++i) add_row(m, i, 0);
        break;
      case Method::cd:
        for (int j = 1; j < num_actions; ++j) add_row(m, 0, j);
        break;
      case Method::acd:
        add_row(m, 0, 1);
        break;
    }
  }

  nlohmann::json prov;
  prov["master_seed"] = cfg.master_seed;
  prov["config_hash"] = cfg.train.hash_key(cfg.master_seed);
  prov["convergence_threshold"] = cfg.train.convergence_threshold;
  nlohmann::json arts;
  for (const auto& [c, art] : store.all()) {
    nlohmann::json a;
    a["seed"] = art->seed;
    a["exact"] = art->diag.exact;
    a["episodes"] = art->diag.episodes;
    a["max_residual"] = art->diag.max_residual;
    a["unvisited_pairs"] = art->diag.unvisited_pairs;
    a["content_hash"] = art->to_json().at("content_hash");
    arts[c.key()] = std::move(a);
  }
  prov["artifacts"] = std::move(arts);
  rep.provenance = std::move(prov);
  return rep;
}

nlohmann::json AxiomSuiteResult::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : entries) {
    rows.push_back({{"env", e.env},
                    {"state", e.state},
                    {"method", e.method},
                    {"axiom", e.axiom},
                    {"value", e.value},
                    {"pass", e.pass}});
  }
  return nlohmann::json{{"ok", ok}, {"checks", rows}};
}

namespace {

/// Axiom sweep over one environment whose artifacts are already cached.
void sweep_env(const RunConfig& cfg, const EnvSpec& env,
               const std::vector<State>& states, AxiomSuiteResult& out,
               std::ostream& log) {
  const auto grouping = explanation_grouping(env, cfg.state);
  const auto store = load_store(cfg, env, grouping);
  // Structural-zero detection tolerance is exact; the phi bound depends on
  // whether the coalition artifacts came from a stochastic trainer.
  const double phi_tol = cfg.train.backend == TrainBackend::exact ? 1e-9 : 1e-2;

  auto push = [&](const State& s, const std::string& method, const std::string& axiom,
                  double value, bool pass) {
    out.entries.push_back({env.id, state_label(s), method, axiom, value, pass});
    out.ok = out.ok && pass;
    log << env.id << " [" << state_label(s) << "] " << method << " " << axiom << " = "
        << value << (pass ? "  pass" : "  FAIL") << "\n";
  };

  for (const auto& s : states) {
    for (Method m : cfg.methods) {
      CvfQuery q{env.id, s, m, cfg.source, 0, 1, cfg.binding};
      const auto fn = build_cvf(q, env.space, store, grouping,
                                cfg.train.convergence_threshold, cfg.force);
      const auto attr = shapley_exact(fn);
      const auto rep = check_axioms(fn, attr);
      const std::string name = method_name(m);
      push(s, name, "efficiency", std::abs(rep.efficiency_residual),
           std::abs(rep.efficiency_residual) <= 1e-9);
      for (size_t i = 0; i < rep.dummy_features.size(); ++i) {
        push(s, name, "dummy(f" + std::to_string(rep.dummy_features[i]) + ")",
             rep.dummy_violations[i], rep.dummy_violations[i] <= phi_tol);
      }
      for (size_t i = 0; i < rep.symmetric_pairs.size(); ++i) {
        const auto& [a, b] = rep.symmetric_pairs[i];
        push(s, name, "symmetry(f" + std::to_string(a) + ",f" + std::to_string(b) + ")",
             rep.symmetry_violations[i], rep.symmetry_violations[i] <= phi_tol);
      }
      if (m == Method::cd && env.num_actions() >= 2) {
        CvfQuery rq = q;
        rq.rank_i = 1;
        rq.rank_j = 0;
        const auto rattr = shapley_exact(build_cvf(rq, env.space, store, grouping,
                                                   cfg.train.convergence_threshold, cfg.force));
        double worst = 0.0;
        for (size_t i = 0; i < attr.phi.size(); ++i) {
          worst = std::max(worst, std::abs(attr.phi[i] + rattr.phi[i]));
        }
        push(s, name, "cd_antisymmetry", worst, worst <= 1e-12);
      }
    }
  }
}

std::vector<State> pick_states(const RunConfig& cfg, const EnvSpec& env,
                               size_t limit) {
  if (cfg.state) return {*cfg.state};
  std::vector<State> states;
  for (const auto& s : reachable_states(env)) {
    if (!env.is_terminal(s)) states.push_back(s);
  }
  if (states.size() > limit) {
    std::mt19937_64 rng(cfg.master_seed);
    for (size_t i = 0; i < limit; ++i) {
      const size_t j = i + static_cast<size_t>(rng() % (states.size() - i));
      std::swap(states[i], states[j]);
    }
    states.resize(limit);
  }
  return states;
}

}  // namespace

AxiomSuiteResult cmd_axioms(const RunConfig& cfg, const EnvSpec& env, std::ostream& log) {
  cfg.validate();
  AxiomSuiteResult out;
  sweep_env(cfg, env, pick_states(cfg, env, 8), out, log);

  // A constant extra feature must receive zero attribution: train the
  // augmented variant's coalitions on the fly and re-run the sweep on it.
  if (env.id == "gridworld1") {
    const EnvSpec dummy_env = augment_with_constant_feature(env, "dummy");
    RunConfig dcfg = cfg;
    if (dcfg.state) dcfg.state->push_back(0);
    std::ostringstream sink;
    cmd_train(dcfg, dummy_env, sink);
    const auto states = pick_states(dcfg, dummy_env, 4);
    sweep_env(dcfg, dummy_env, states, out, log);

    // The structural dummy detector can miss a constant feature when the
    // coalition trainer is stochastic, so check its attribution directly.
    const auto grouping = explanation_grouping(dummy_env, dcfg.state);
    const auto store = load_store(dcfg, dummy_env, grouping);
    const double phi_tol = dcfg.train.backend == TrainBackend::exact ? 1e-9 : 1e-2;
    for (const auto& s : states) {
      for (Method m : dcfg.methods) {
        if (m == Method::vanilla) continue;
        CvfQuery q{dummy_env.id, s, m, dcfg.source, 0, 1, dcfg.binding};
        const auto attr = shapley_exact(build_cvf(q, dummy_env.space, store, grouping,
                                                  dcfg.train.convergence_threshold, dcfg.force));
        const double phi_dummy = std::abs(attr.phi.back());
        out.entries.push_back({dummy_env.id, state_label(s), method_name(m),
                               "dummy_attribution", phi_dummy, phi_dummy <= phi_tol});
        out.ok = out.ok && phi_dummy <= phi_tol;
        log << dummy_env.id << " [" << state_label(s) << "] " << method_name(m)
            << " dummy_attribution = " << phi_dummy
            << (phi_dummy <= phi_tol ? "  pass" : "  FAIL") << "\n";
      }
    }
  }
  return out;
}

}  // namespace csvx
