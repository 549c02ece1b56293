#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#ifndef ARCLQN_CLI_PATH
#error "ARCLQN_CLI_PATH must point at the arclqn binary"
#endif

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(ARCLQN_CLI_PATH) + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  RunResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.output.append(buf.data(), got);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("bench-subproblem emits one verified row per cell") {
  const RunResult res =
      run_cli("bench-subproblem --dims 100,1000 --kinds pd --methods dense,naive,normtrick "
              "--seed 7 --repeats 3 --m 3");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("method,kind,n,m,median_seconds,newton_iters,verified") !=
        std::string::npos);
  int rows = 0;
  std::stringstream ss(res.output);
  std::string line;
  while (std::getline(ss, line))
    if (line.rfind("dense,", 0) == 0 || line.rfind("naive,", 0) == 0 ||
        line.rfind("normtrick,", 0) == 0)
      ++rows;
  CHECK(rows == 6);
  CHECK(res.output.find("false") == std::string::npos);
}

TEST_CASE("unknown method exits 2 with usage") {
  const RunResult res = run_cli("bench-subproblem --dims 40 --methods warp --kinds pd");
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("unknown method") != std::string::npos);
  CHECK(res.output.find("Usage") != std::string::npos);
}

TEST_CASE("unknown problem exits 2") {
  const RunResult res = run_cli("train --problem banana --iters 5");
  CHECK(res.exit_code == 2);
}

TEST_CASE("train runs are byte-identical") {
  const std::string t1 = std::string(ARCLQN_CLI_PATH) + "_trace1.csv";
  const std::string t2 = std::string(ARCLQN_CLI_PATH) + "_trace2.csv";
  const std::string cmd = "train --problem rosenbrock --n 8 --iters 60 --seed 3 --trace-out ";
  const RunResult r1 = run_cli(cmd + t1 + " --summary-out " + t1 + ".json");
  const RunResult r2 = run_cli(cmd + t2 + " --summary-out " + t2 + ".json");
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  const std::string a = slurp(t1), b = slurp(t2);
  CHECK_FALSE(a.empty());
  CHECK(a == b);
  std::remove(t1.c_str());
  std::remove(t2.c_str());
  std::remove((t1 + ".json").c_str());
  std::remove((t2 + ".json").c_str());
}

TEST_CASE("train quadratic reaches a tiny gradient") {
  const RunResult res = run_cli(
      "train --problem quadratic --n 6 --iters 50 --sigma0 0.001 --trace-out - --seed 1");
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.find("\"final_grad_norm_inf\"") != std::string::npos);
  // summary lands on stdout after the trace
  const size_t pos = res.output.find("\"final_f_full\"");
  REQUIRE(pos != std::string::npos);
}

TEST_CASE("env seed overrides the flag") {
  const std::string t1 = std::string(ARCLQN_CLI_PATH) + "_env1.csv";
  const std::string t2 = std::string(ARCLQN_CLI_PATH) + "_env2.csv";
  const std::string base =
      " train --problem logistic --n-features 6 --N 60 --batch 8 --iters 20 --trace-out ";
  const std::string cmd1 = "ARCLQN_SEED=5 " + std::string(ARCLQN_CLI_PATH) + base + t1 +
                           " --seed 1 --summary-out /dev/null 2>&1";
  const std::string cmd2 = "ARCLQN_SEED=5 " + std::string(ARCLQN_CLI_PATH) + base + t2 +
                           " --seed 2 --summary-out /dev/null 2>&1";
  REQUIRE(std::system(cmd1.c_str()) == 0);
  REQUIRE(std::system(cmd2.c_str()) == 0);
  CHECK(slurp(t1) == slurp(t2));  // same env seed wins over different flags
  std::remove(t1.c_str());
  std::remove(t2.c_str());
}

TEST_CASE("verify --only filters the suites") {
  const RunResult res = run_cli("verify --only hardcase --seed 11 --instances 10");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("hard_case_optimality") != std::string::npos);
  CHECK(res.output.find("oracle_equivalence") == std::string::npos);
}

TEST_CASE("verify runs a reduced battery clean") {
  const RunResult res = run_cli("verify --seed 11 --instances 25 --only newton");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("PASS newton_fd") != std::string::npos);
}

}  // TEST_SUITE
