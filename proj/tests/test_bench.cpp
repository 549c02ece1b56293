#include <doctest.h>

#include <sstream>

#include "arclqn/bench.hpp"

using namespace arclqn;

TEST_SUITE("bench") {

TEST_CASE("scientific formatting in table style") {
  CHECK(bench::format_sci(1.90e-2) == "1.90e-2");
  CHECK(bench::format_sci(7.41) == "7.41e0");
  CHECK(bench::format_sci(1.03e2) == "1.03e2");
  CHECK(bench::format_sci(2.74e2) == "2.74e2");
  CHECK(bench::format_sci(4.47e-4) == "4.47e-4");
}

TEST_CASE("mini benchmark produces verified rows with a stable schema") {
  bench::BenchOptions opt;
  opt.dims = {40, 80};
  opt.kinds = {CaseKind::PositiveDefinite};
  opt.methods = {bench::Method::DenseSR1, bench::Method::NaiveLqn, bench::Method::NormTrick};
  opt.m = 3;
  opt.repeats = 3;
  opt.seed = 7;
  const std::vector<bench::BenchRow> rows = bench::run_bench(opt);
  REQUIRE(rows.size() == 6);
  for (const bench::BenchRow& r : rows) {
    CHECK_FALSE(r.skipped);
    CHECK(r.verified);
    CHECK(r.median_seconds >= 0.0);
  }

  std::ostringstream os;
  bench::write_csv(os, rows, false);
  const std::string text = os.str();
  CHECK(text.find("method,kind,n,m,median_seconds,newton_iters,verified") == 0);
  CHECK(text.find("dense,pd,40,3,") != std::string::npos);
}

TEST_CASE("dense rows above the size limit are skipped with a sentinel") {
  bench::BenchOptions opt;
  opt.dims = {64};
  opt.kinds = {CaseKind::Indefinite};
  opt.methods = {bench::Method::DenseSR1};
  opt.m = 2;
  opt.repeats = 1;
  opt.dense_max_n = 50;
  const std::vector<bench::BenchRow> rows = bench::run_bench(opt);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].skipped);

  std::ostringstream os;
  bench::write_csv(os, rows, false);
  CHECK(os.str().find("dense,indefinite,64,2,-,-,-") != std::string::npos);
}

}  // TEST_SUITE
