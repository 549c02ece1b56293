#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "arclqn/problems.hpp"
#include "arclqn/subproblem.hpp"

namespace arclqn::bench {

enum class Method { DenseSR1, NaiveLqn, NormTrick };

const char* method_name(Method m);
bool parse_method(const std::string& text, Method* out);

struct BenchRow {
  Method method = Method::NormTrick;
  CaseKind kind = CaseKind::PositiveDefinite;
  long n = 0;
  int m = 0;
  bool skipped = false;  // dense size limit or timeout: printed as "-"
  double median_seconds = 0.0;
  double mean_seconds = 0.0;
  int newton_iters = 0;
  bool verified = false;
};

struct BenchOptions {
  std::vector<long> dims{100, 1000, 10000, 100000, 1000000};
  std::vector<CaseKind> kinds{CaseKind::Hard, CaseKind::Indefinite,
                              CaseKind::PositiveDefinite};
  std::vector<Method> methods{Method::DenseSR1, Method::NaiveLqn, Method::NormTrick};
  int m = 5;
  int repeats = 10;
  double timeout_seconds = 300.0;
  std::uint64_t seed = 0;
  double sigma = 1.0;
  bool use_mean = false;   // reported aggregate: median by default
  long dense_max_n = 2000; // DenseSR1 rows above this print "-"
  int threads = 1;         // parallelism across instances, never within a timed solve
};

// Runs each (method, kind, n) cell: the instance is generated outside the
// timed region, the solution is KKT-verified once untimed, then `repeats`
// solves are timed. A first repeat over the timeout marks the row "-".
std::vector<BenchRow> run_bench(const BenchOptions& opt, std::ostream* log = nullptr);

// Exact header: method,kind,n,m,median_seconds,newton_iters,verified
void write_csv(std::ostream& os, const std::vector<BenchRow>& rows, bool use_mean);

// Scientific notation without exponent padding, e.g. 1.90e-2 / 7.41e0.
std::string format_sci(double v, int digits = 2);

bool kkt_verified(const LqnState& state, const Vector& g, double sigma,
                  const SubproblemSolution& sol, double nu);
bool kkt_verified_dense(const Matrix& b, const Vector& g, double sigma,
                        const SubproblemSolution& sol, double nu);

}  // namespace arclqn::bench
