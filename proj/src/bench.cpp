#include "arclqn/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "arclqn/dense_reference.hpp"
#include "arclqn/rng.hpp"

namespace arclqn::bench {

const char* method_name(Method m) {
  switch (m) {
    case Method::DenseSR1:
      return "dense";
    case Method::NaiveLqn:
      return "naive";
    case Method::NormTrick:
      return "normtrick";
  }
  return "?";
}

bool parse_method(const std::string& text, Method* out) {
  if (text == "dense") {
    *out = Method::DenseSR1;
  } else if (text == "naive") {
    *out = Method::NaiveLqn;
  } else if (text == "normtrick") {
    *out = Method::NormTrick;
  } else {
    return false;
  }
  return true;
}

std::string format_sci(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*e", digits, v);
  std::string s(buf);
  const size_t e = s.find('e');
  if (e == std::string::npos) return s;
  const int exp = std::atoi(s.c_str() + e + 1);
  char out[64];
  std::snprintf(out, sizeof(out), "%.*se%d", static_cast<int>(e), s.c_str(), exp);
  return out;
}

bool kkt_verified(const LqnState& state, const Vector& g, double sigma,
                  const SubproblemSolution& sol, double nu) {
  if (sol.failed()) return false;
  const Vector resid = state.bmul(sol.s_star) + sol.lambda_star * sol.s_star + g;
  if (resid.norm() > 1e-6 * std::max(1.0, g.norm())) return false;
  const double ratio = sol.lambda_star / sigma;
  return std::abs(sol.s_star.norm() - ratio) <= nu * std::max(1.0, ratio);
}

bool kkt_verified_dense(const Matrix& b, const Vector& g, double sigma,
                        const SubproblemSolution& sol, double nu) {
  if (sol.failed()) return false;
  const Vector resid = b * sol.s_star + sol.lambda_star * sol.s_star + g;
  if (resid.norm() > 1e-6 * std::max(1.0, g.norm())) return false;
  const double ratio = sol.lambda_star / sigma;
  return std::abs(sol.s_star.norm() - ratio) <= nu * std::max(1.0, ratio);
}

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double aggregate(std::vector<double> times, bool use_mean) {
  if (times.empty()) return 0.0;
  if (use_mean) {
    double sum = 0.0;
    for (const double t : times) sum += t;
    return sum / static_cast<double>(times.size());
  }
  std::sort(times.begin(), times.end());
  const size_t n = times.size();
  return n % 2 == 1 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
}

}  // namespace

namespace {

std::vector<BenchRow> run_cell(const BenchOptions& opt, CaseKind kind, long n) {
  const ToleranceSet tol = ToleranceSet::verification();
  const std::uint64_t case_seed =
      mix_seed(opt.seed, static_cast<std::uint64_t>(n) * 31 + static_cast<int>(kind));
  const SubproblemCase instance =
      make_subproblem_case(kind, static_cast<int>(n), opt.m, case_seed, opt.sigma);

  Matrix dense_b;  // assembled lazily, outside any timed region
  std::vector<BenchRow> rows;

  for (const Method method : opt.methods) {
    BenchRow row;
    row.method = method;
    row.kind = kind;
    row.n = n;
    row.m = opt.m;

    if (method == Method::DenseSR1 && n > opt.dense_max_n) {
      row.skipped = true;
      rows.push_back(row);
      continue;
    }
    if (method == Method::DenseSR1 && dense_b.rows() != n)
      dense_b = dense_from_state(instance.state);

    const auto solve_once = [&]() -> SubproblemSolution {
      switch (method) {
        case Method::DenseSR1: {
          DenseSolveOptions dopt;
          dopt.nu = tol.nu;
          dopt.eps_shift = tol.eps_shift;
          return dense_solve_subproblem(dense_b, instance.g, instance.sigma, dopt);
        }
        case Method::NaiveLqn:
          return solve_subproblem(instance.state, instance.g, instance.sigma, tol,
                                  SolveMode::NaiveLqn);
        case Method::NormTrick:
          return solve_subproblem(instance.state, instance.g, instance.sigma, tol,
                                  SolveMode::NormTrick);
      }
      return {};
    };

    // verification pass, untimed
    const SubproblemSolution check = solve_once();
    row.newton_iters = check.newton_iters;
    row.verified = method == Method::DenseSR1
                       ? kkt_verified_dense(dense_b, instance.g, instance.sigma, check, tol.nu)
                       : kkt_verified(instance.state, instance.g, instance.sigma, check, tol.nu);

    std::vector<double> times;
    times.reserve(static_cast<size_t>(opt.repeats));
    for (int r = 0; r < opt.repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const SubproblemSolution sol = solve_once();
      const double elapsed = seconds_since(t0);
      (void)sol;
      if (r == 0 && elapsed > opt.timeout_seconds) {
        row.skipped = true;
        break;
      }
      times.push_back(elapsed);
    }
    if (!row.skipped) {
      row.median_seconds = aggregate(times, false);
      row.mean_seconds = aggregate(times, true);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchOptions& opt, std::ostream* log) {
  std::vector<std::pair<CaseKind, long>> cells;
  for (const CaseKind kind : opt.kinds)
    for (const long n : opt.dims) cells.emplace_back(kind, n);

  std::vector<std::vector<BenchRow>> per_cell(cells.size());
  const int threads = std::max(1, opt.threads);
  if (threads == 1) {
    for (size_t i = 0; i < cells.size(); ++i)
      per_cell[i] = run_cell(opt, cells[i].first, cells[i].second);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
          per_cell[i] = run_cell(opt, cells[i].first, cells[i].second);
      });
    }
    for (std::thread& th : pool) th.join();
  }

  std::vector<BenchRow> rows;
  for (std::vector<BenchRow>& cell : per_cell) {
    for (BenchRow& row : cell) {
      if (log)
        *log << "bench " << method_name(row.method) << ' ' << case_kind_name(row.kind)
             << " n=" << row.n
             << (row.skipped ? " -"
                             : (" " + format_sci(opt.use_mean ? row.mean_seconds
                                                              : row.median_seconds)))
             << '\n';
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_csv(std::ostream& os, const std::vector<BenchRow>& rows, bool use_mean) {
  os << "method,kind,n,m,median_seconds,newton_iters,verified\n";
  for (const BenchRow& r : rows) {
    os << method_name(r.method) << ',' << case_kind_name(r.kind) << ',' << r.n << ',' << r.m
       << ',';
    if (r.skipped) {
      os << "-,-,-";
    } else {
      os << format_sci(use_mean ? r.mean_seconds : r.median_seconds) << ',' << r.newton_iters
         << ',' << (r.verified ? "true" : "false");
    }
    os << '\n';
  }
}

}  // namespace arclqn::bench
