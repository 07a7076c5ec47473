#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "csvx/pipeline.hpp"
#include "csvx/solver.hpp"

namespace {

csvx::State parse_state(const std::string& text) {
  csvx::State s;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      s.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw csvx::ValidationError("bad state component: '" + tok + "'");
    }
  }
  if (s.empty()) throw csvx::ValidationError("empty --state");
  return s;
}

struct Cli {
  csvx::RunConfig cfg;
  std::string state_text;
  std::string method_text = "all";
  std::string actions_text;
  std::string config_path;

  void resolve(const CLI::App* sub) {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw csvx::ValidationError("cannot open config file: " + config_path);
      nlohmann::json j;
      in >> j;
      auto base = csvx::RunConfig::from_json(j);
      // Flags given on the command line win over the config file.
      if (sub->count("--env")) base.env = cfg.env;
      if (sub->count("--fixture")) base.fixture = cfg.fixture;
      if (sub->count("--seed")) base.master_seed = cfg.master_seed;
      if (sub->count("--cache")) base.cache_dir = cfg.cache_dir;
      if (sub->count("--format")) base.format = cfg.format;
      if (sub->count("--episodes")) base.train.episodes = cfg.train.episodes;
      if (sub->count("--backend")) base.train.backend = cfg.train.backend;
      if (sub->count("--source")) base.source = cfg.source;
      if (sub->count("--action-binding")) base.binding = cfg.binding;
      if (cfg.force) base.force = true;
      cfg = std::move(base);
    }
    if (!state_text.empty()) cfg.state = parse_state(state_text);
    if (sub->count("--method") || config_path.empty()) {
      if (method_text == "all") {
        cfg.methods = {csvx::Method::vanilla, csvx::Method::cd, csvx::Method::acd};
      } else {
        cfg.methods = {csvx::parse_method(method_text)};
      }
    }
    cfg.validate();
  }

  std::pair<int, int> action_ranks() const {
    if (actions_text.empty()) return {0, 1};
    auto v = parse_state(actions_text);
    if (v.size() != 2) throw csvx::ValidationError("--actions wants two ranks, e.g. 0,1");
    return {v[0], v[1]};
  }
};

int dispatch(const std::string& cmd, Cli& cli, const CLI::App* sub) {
  cli.resolve(sub);
  const auto env = csvx::build_env_by_name(cli.cfg.env, cli.cfg.fixture);

  if (cmd == "train") {
    csvx::cmd_train(cli.cfg, env, std::cout);
    return 0;
  }
  if (cmd == "explain" || cmd == "table") {
    if (!cli.cfg.state) throw csvx::ValidationError("explain needs --state");
    auto [ri, rj] = cli.action_ranks();
    auto report = csvx::cmd_explain(cli.cfg, env, *cli.cfg.state);
    if (!cli.actions_text.empty()) {
      // restrict CD rows to the requested action-rank pair
      const auto grouping = csvx::explanation_grouping(env, cli.cfg.state);
      const auto store = csvx::load_store(cli.cfg, env, grouping);
      std::vector<csvx::ReportRow> rows;
      for (auto& row : report.rows) {
        if (row.method != csvx::Method::cd) {
          rows.push_back(std::move(row));
          continue;
        }
        if (row.rank_i == ri && row.rank_j == rj) rows.push_back(std::move(row));
      }
      if (std::none_of(rows.begin(), rows.end(), [](const auto& r) {
            return r.method == csvx::Method::cd;
          }) &&
          std::find(cli.cfg.methods.begin(), cli.cfg.methods.end(), csvx::Method::cd) !=
              cli.cfg.methods.end()) {
        csvx::CvfQuery q{env.id, *cli.cfg.state, csvx::Method::cd,
                         cli.cfg.source, ri, rj, cli.cfg.binding};
        rows.push_back(csvx::explain_row(q, env.space, store, grouping,
                                         cli.cfg.train.convergence_threshold, cli.cfg.force));
      }
      report.rows = std::move(rows);
    }
    std::cout << csvx::render_report(report, cli.cfg.format) << "\n";
    return 0;
  }
  if (cmd == "axioms") {
    const auto result = csvx::cmd_axioms(cli.cfg, env, std::cerr);
    std::cout << result.to_json().dump(2) << "\n";
    return result.ok ? 0 : 1;
  }
  if (cmd == "bench") {
    csvx::CompiledEnv compiled(env);
    const auto t0 = std::chrono::steady_clock::now();
    const auto art = csvx::value_iteration(compiled);
    const auto ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    nlohmann::json j;
    j["env"] = env.id;
    j["states"] = compiled.num_states();
    j["actions"] = compiled.num_actions();
    j["value_iteration_ms"] = ms;
    j["max_residual"] = art.diag.max_residual;
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  throw csvx::ValidationError("unknown command: " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual-Shapley explanations for tabular RL"};
  app.require_subcommand(1);

  Cli cli;
  std::string train_backend = "q_learning";
  std::vector<CLI::App*> subs;
  for (const char* name : {"train", "explain", "table", "axioms", "bench"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--env", cli.cfg.env, "environment name");
    sub->add_option("--fixture", cli.cfg.fixture, "grid layout file override");
    sub->add_option("--state", cli.state_text, "comma-separated feature values");
    sub->add_option("--method", cli.method_text, "vanilla|cd|acd|all");
    sub->add_option("--source", [&cli](const std::vector<std::string>& v) {
      cli.cfg.source = csvx::parse_source(v.back());
      return true;
    }, "q|v");
    sub->add_option("--actions", cli.actions_text, "action-rank pair i,j for CD");
    sub->add_option("--seed", cli.cfg.master_seed, "master seed");
    sub->add_option("--cache", cli.cfg.cache_dir, "artifact cache directory");
    sub->add_option("--format", cli.cfg.format, "json|csv|markdown");
    sub->add_option("--action-binding", [&cli](const std::vector<std::string>& v) {
      cli.cfg.binding = csvx::parse_binding(v.back());
      return true;
    }, "fixed|per-coalition");
    sub->add_option("--episodes", cli.cfg.train.episodes, "training episodes per coalition");
    sub->add_option("--backend", [&cli](const std::vector<std::string>& v) {
      if (v.back() == "exact") {
        cli.cfg.train.backend = csvx::TrainBackend::exact;
      } else if (v.back() == "q_learning") {
        cli.cfg.train.backend = csvx::TrainBackend::q_learning;
      } else {
        throw CLI::ValidationError("--backend", "q_learning|exact");
      }
      return true;
    }, "q_learning|exact coalition trainer");
    sub->add_option("--config", cli.config_path, "JSON run configuration file");
    sub->add_flag("--force", cli.cfg.force, "proceed past convergence-gate failures");
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const auto* sub = app.get_subcommands().front();
    return dispatch(sub->get_name(), cli, sub);
  } catch (const csvx::ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return 3;
  } catch (const csvx::CacheError& e) {
    std::cerr << "cache error: " << e.what() << "\n";
    return 4;
  } catch (const csvx::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const csvx::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}
