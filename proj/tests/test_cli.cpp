#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(CSVX_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  std::array<char, 4096> buf;
  while (size_t n = fread(buf.data(), 1, buf.size(), pipe)) res.output.append(buf.data(), n);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("csvx_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("validation failures exit with code 2") {
  CHECK(run("train --env not-an-env").exit_code == 2);
  CHECK(run("explain --env gridworld1 --state 9,9").exit_code == 2);
  CHECK(run("explain --env gridworld1 --state 0,0 --format xml").exit_code == 2);
  CHECK(run("explain --env gridworld1 --state 0,0 --method bogus").exit_code == 2);
}

TEST_CASE("cold cache points at the train command and exits 2") {
  const auto dir = fresh_dir("cold");
  const auto res =
      run("explain --env gridworld1 --state 0,0 --cache " + dir.string());
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("train") != std::string::npos);
}

TEST_CASE("train, idempotence, explain, table, axioms") {
  const auto dir = fresh_dir("flow");
  const std::string base = " --env gridworld1 --backend exact --cache " + dir.string();

  const auto first = run("train" + base);
  CHECK(first.exit_code == 0);
  CHECK(first.output.find("trained: 5  cached: 0") != std::string::npos);

  const auto second = run("train" + base);
  CHECK(second.exit_code == 0);
  CHECK(second.output.find("trained: 0  cached: 5") != std::string::npos);

  // Identical invocations render byte-identical JSON reports.
  const std::string explain = "explain --state 0,0 --format json" + base;
  const auto r1 = run(explain);
  const auto r2 = run(explain);
  CHECK(r1.exit_code == 0);
  CHECK(r1.output == r2.output);

  const auto j = nlohmann::json::parse(r1.output);
  CHECK(j["env"] == "gridworld1");
  CHECK(j["rows"].size() == 8);  // Vani(0..3), CD(0,1..3), ACD
  CHECK(j.contains("provenance"));

  const auto md = run("table --state 0,0 --format markdown" + base);
  CHECK(md.exit_code == 0);
  CHECK(md.output.find("| method | row | col |") != std::string::npos);

  const auto csv = run("table --state 0,0 --format csv" + base);
  CHECK(csv.exit_code == 0);
  CHECK(csv.output.find("method,row,col") != std::string::npos);

  // A specific action pair creates the matching CD row.
  const auto cd = run("explain --state 0,0 --method cd --actions 0,2 --format json" + base);
  CHECK(cd.exit_code == 0);
  CHECK(cd.output.find("CD(0,2)") != std::string::npos);

  const auto ax = run("axioms" + base);
  CHECK(ax.exit_code == 0);
  // Per-check log lines go to stderr ahead of the JSON summary on stdout.
  const auto brace = ax.output.find('{');
  REQUIRE(brace != std::string::npos);
  const auto aj = nlohmann::json::parse(ax.output.substr(brace));
  CHECK(aj["ok"].get<bool>());
}

TEST_CASE("cache corruption exits with code 4") {
  const auto dir = fresh_dir("corrupt");
  const std::string base = " --env gridworld1 --backend exact --cache " + dir.string();
  REQUIRE(run("train" + base).exit_code == 0);

  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) std::ofstream(entry.path()) << "{\"garbage\": true}";
  }
  CHECK(run("explain --state 0,0" + base).exit_code == 4);
  CHECK(run("train" + base).exit_code == 4);
}

TEST_CASE("convergence-gate failures exit with code 3 unless forced") {
  const auto dir = fresh_dir("gate");
  const std::string base =
      " --env gridworld1 --episodes 120 --cache " + dir.string();

  const auto failed = run("train" + base);
  CHECK(failed.exit_code == 3);
  CHECK(failed.output.find("GATE FAILED") != std::string::npos);

  // Artifacts were cached; --force overrides the gate downstream too.
  CHECK(run("train --force" + base).exit_code == 0);
  CHECK(run("explain --state 0,0" + base).exit_code == 3);
  CHECK(run("explain --state 0,0 --force" + base).exit_code == 0);
}

TEST_CASE("config file merges with flags") {
  const auto dir = fresh_dir("config");
  const fs::path cfg_path = dir / "run.json";
  std::ofstream(cfg_path) << nlohmann::json{{"env", "gridworld1"},
                                            {"cache_dir", dir.string()},
                                            {"train", {{"backend", "exact"}}}}
                                 .dump();

  CHECK(run("train --config " + cfg_path.string()).exit_code == 0);
  const auto res =
      run("explain --config " + cfg_path.string() + " --state 0,0 --format csv");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("method,row,col") != std::string::npos);

  std::ofstream(cfg_path) << "{\"no_such_field\": 1}";
  CHECK(run("train --config " + cfg_path.string()).exit_code == 2);
}

TEST_CASE("fixture layouts load from grid files") {
  const auto dir = fresh_dir("fixture");
  const auto res = run("train --env frozenlake --backend exact --fixture " +
                       std::string(CSVX_FIXTURES) + "/frozenlake.grid --cache " +
                       dir.string());
  CHECK(res.exit_code == 0);
}

TEST_CASE("bench subcommand reports value-iteration timing") {
  const auto res = run("bench --env gridworld1");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("value_iteration") != std::string::npos);
}
