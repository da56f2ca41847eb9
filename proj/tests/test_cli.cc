#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "restoro/network.h"
#include "restoro/scenario.h"
#include "restoro/solver.h"
#include "restoro/text_util.h"

#ifndef RESTORO_CLI_PATH
#error "RESTORO_CLI_PATH must name the restoro binary"
#endif

using namespace restoro;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const fs::path& dir, const std::string& args) {
  const fs::path log = dir / "stdout.txt";
  const std::string cmd = "cd '" + dir.string() + "' && " RESTORO_CLI_PATH " " +
                          args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') rows.push_back(split_fields(line));
  }
  return rows;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("gen-network") {
  const fs::path dir = fresh_dir("restoro_cli_gen");
  CHECK(run(dir, "gen-network --layers 2 --sizes 3,3 --seed 4 --out a.net").code == 0);
  CHECK(Network(load_network(dir / "a.net")).node_count() == 6);
  CHECK(run(dir, "gen-network --layers 2 --sizes 3,3 --seed 4 --out b.net").code == 0);
  std::ifstream a(dir / "a.net"), b(dir / "b.net");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(run(dir, "gen-network --preset shelby-like --out t.net").code == 0);
  CHECK(Network(load_network(dir / "t.net")).node_count() == 125);
  CHECK(run(dir, "gen-network --layers 3 --sizes 3,3 --out c.net").code == 2);
  CHECK(run(dir, "gen-network --preset nope --out c.net").code == 2);
  CHECK(run(dir, "--version").out.find("surrogate-v1") != std::string::npos);
}

TEST_CASE("solve: exit codes and cost recomputation") {
  const fs::path dir = fresh_dir("restoro_cli_solve");
  REQUIRE(run(dir, "gen-network --sizes 3,3 --seed 2 --out toy.net").code == 0);
  REQUIRE(run(dir, "gen-scenarios --network toy.net --magnitude 9 --count 3 "
                   "--seed 8 --out s.txt").code == 0);
  const Run ok = run(dir, "solve --network toy.net --scenario s.txt --index 1 "
                          "--rc 1 --tmax 4 --mode exact --out plan.csv --costs cost.csv");
  REQUIRE(ok.code == 0);

  // Rebuild the assignment from the plan file and price it independently.
  const Network net(load_network(dir / "toy.net"));
  const auto entries = read_scenarios(dir / "s.txt", net);
  std::vector<int> times(net.element_count(), kUnassigned);
  const auto plan_rows = read_csv(dir / "plan.csv");
  for (std::size_t i = 1; i < plan_rows.size(); ++i) {
    times[std::stoi(plan_rows[i][0])] =
        plan_rows[i][2] == "never" ? kNever : std::stoi(plan_rows[i][2]);
  }
  const CostBreakdown c = plan_cost(net, entries[1].scenario, times, 1, 4);
  double file_total = 0.0;
  const auto cost_rows = read_csv(dir / "cost.csv");
  CHECK(cost_rows.size() == 6);
  for (std::size_t i = 1; i < cost_rows.size(); ++i) {
    for (int k = 1; k <= 4; ++k) file_total += std::stod(cost_rows[i][k]);
  }
  CHECK(file_total == doctest::Approx(c.total).epsilon(1e-12));

  REQUIRE(run(dir, "gen-network --preset shelby-like --out big.net").code == 0);
  REQUIRE(run(dir, "gen-scenarios --network big.net --magnitude 9 --count 1 "
                   "--out big.txt").code == 0);
  const Run over = run(dir, "solve --network big.net --scenario big.txt --rc 5 "
                            "--mode exact --out p.csv");
  CHECK(over.code == 3);
  CHECK(over.out.find("exact mode") != std::string::npos);
  CHECK(run(dir, "solve --network missing.net --scenario s.txt --out p.csv").code == 1);
  CHECK(run(dir, "solve --network toy.net --scenario s.txt --index 9 --out p.csv").code == 2);
}

TEST_CASE("train over R_c 2..8 and evaluate") {
  const fs::path dir = fresh_dir("restoro_cli_train");
  REQUIRE(run(dir, "gen-network --sizes 4,4 --seed 3 --out toy.net").code == 0);
  REQUIRE(run(dir, "gen-scenarios --network toy.net --magnitude 9 --count 30 "
                   "--out s.txt").code == 0);
  REQUIRE(run(dir, "build-dataset --network toy.net --scenarios s.txt --rc 2..8 "
                   "--tmax 6 --jobs 2 --out ds_{rc}.csv").code == 0);
  REQUIRE(run(dir, "train --dataset ds_{rc}.csv --rc 2..8 --hidden 6 --epochs 5 "
                   "--tmax 6 --out model_{rc}.txt").code == 0);
  for (int rc = 2; rc <= 8; ++rc) {
    CHECK(fs::exists(dir / ("model_" + std::to_string(rc) + ".txt")));
  }
  const Run ev = run(dir, "evaluate --model model_3.txt --dataset ds_3.csv "
                          "--ar 0,1,2,3 --out acc.csv");
  REQUIRE(ev.code == 0);
  const auto rows = read_csv(dir / "acc.csv");
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 2; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][1]) >= std::stod(rows[i - 1][1]));
  }
}

TEST_CASE("config file and seed overrides") {
  const fs::path dir = fresh_dir("restoro_cli_cfg");
  std::ofstream(dir / "run.ini") << "seed = 17\n[gen-network]\nsizes = 3,2\n";
  REQUIRE(run(dir, "--config run.ini gen-network --out a.net").code == 0);
  REQUIRE(run(dir, "--seed 17 gen-network --sizes 3,2 --out b.net").code == 0);
  setenv("RESTORO_SEED", "17", 1);
  const int env_code = run(dir, "gen-network --sizes 3,2 --out c.net").code;
  unsetenv("RESTORO_SEED");
  REQUIRE(env_code == 0);
  REQUIRE(run(dir, "gen-network --sizes 3,2 --out d.net").code == 0);
  CHECK(load_network(dir / "a.net") == load_network(dir / "b.net"));
  CHECK(load_network(dir / "c.net") == load_network(dir / "b.net"));
  CHECK_FALSE(load_network(dir / "d.net") == load_network(dir / "b.net"));
  CHECK(load_network(dir / "b.net").nodes.size() == 5);
}

}  // TEST_SUITE
