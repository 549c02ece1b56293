#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "arclqn/arc.hpp"
#include "arclqn/bench.hpp"
#include "arclqn/problems.hpp"
#include "arclqn/verify.hpp"

namespace {

using namespace arclqn;

constexpr int kUsageError = 2;

std::uint64_t resolve_seed(std::uint64_t flag_seed) {
  // ARCLQN_SEED in the environment overrides the flag.
  if (const char* env = std::getenv("ARCLQN_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring unparsable ARCLQN_SEED='" << env << "'\n";
    }
  }
  return flag_seed;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int usage_error(const CLI::App& app, const std::string& message) {
  std::cerr << "error: " << message << "\n\n" << app.help() << std::flush;
  return kUsageError;
}

struct BenchFlags {
  std::string dims = "100,1000,10000,100000,1000000";
  std::string kinds = "hard,indefinite,pd";
  std::string methods = "dense,naive,normtrick";
  int m = 5;
  int repeats = 10;
  double timeout = 300.0;
  std::uint64_t seed = 0;
  double sigma = 1.0;
  bool mean = false;
  long dense_max = 2000;
  int threads = 1;
  std::string out;
};

int cmd_bench(const CLI::App& app, const BenchFlags& flags) {
  bench::BenchOptions opt;
  opt.dims.clear();
  for (const std::string& d : split_list(flags.dims)) {
    try {
      const long n = std::stol(d);
      if (n < 7 || n > 10000000) return usage_error(app, "dimension out of range: " + d);
      opt.dims.push_back(n);
    } catch (const std::exception&) {
      return usage_error(app, "bad dimension '" + d + "'");
    }
  }
  opt.kinds.clear();
  for (const std::string& k : split_list(flags.kinds)) {
    CaseKind kind;
    if (!parse_case_kind(k, &kind)) return usage_error(app, "unknown kind '" + k + "'");
    opt.kinds.push_back(kind);
  }
  opt.methods.clear();
  for (const std::string& m : split_list(flags.methods)) {
    bench::Method method;
    if (!bench::parse_method(m, &method)) return usage_error(app, "unknown method '" + m + "'");
    opt.methods.push_back(method);
  }
  if (opt.dims.empty() || opt.kinds.empty() || opt.methods.empty())
    return usage_error(app, "need at least one dimension, kind and method");

  opt.m = flags.m;
  opt.repeats = flags.repeats;
  opt.timeout_seconds = flags.timeout;
  opt.seed = resolve_seed(flags.seed);
  opt.sigma = flags.sigma;
  opt.use_mean = flags.mean;
  opt.dense_max_n = flags.dense_max;
  opt.threads = flags.threads;

  const std::vector<bench::BenchRow> rows = bench::run_bench(opt, &std::cerr);
  if (flags.out.empty()) {
    bench::write_csv(std::cout, rows, opt.use_mean);
  } else {
    std::ofstream os(flags.out);
    if (!os) {
      std::cerr << "error: cannot open " << flags.out << " for writing\n";
      return 1;
    }
    bench::write_csv(os, rows, opt.use_mean);
  }
  return 0;
}

struct TrainFlags {
  std::string problem;
  int n = 100;
  double condition = 10.0;
  int n_features = 200;
  long dataset = 5000;
  int batch = 0;
  long iters = 0;
  long epochs = 0;
  std::uint64_t seed = 0;
  std::string config_path;
  std::string trace_out = "arclqn_trace.csv";
  std::string summary_out;
  bool timing = false;
  double mu = std::nan("");
  int memory = 0;
  double sigma0 = std::nan("");
  double max_seconds = 0.0;
  std::string gamma_policy;
};

int cmd_train(const CLI::App& app, const TrainFlags& flags) {
  Problem problem;
  if (flags.problem == "rosenbrock") {
    problem = rosenbrock(flags.n);
  } else if (flags.problem == "quadratic") {
    problem = quadratic(flags.n, flags.condition);
  } else if (flags.problem == "logistic") {
    problem = logistic_synth(flags.n_features, flags.dataset, resolve_seed(flags.seed));
  } else {
    return usage_error(app, "unknown problem '" + flags.problem +
                                "' (expected rosenbrock|quadratic|logistic)");
  }

  ArcConfig cfg;
  bool mu_configured = false;
  bool gamma_configured = false;
  if (!flags.config_path.empty()) {
    std::ifstream is(flags.config_path);
    if (!is) return usage_error(app, "cannot read config " + flags.config_path);
    std::stringstream buffer;
    buffer << is.rdbuf();
    try {
      cfg = config_from_json(buffer.str());
      const nlohmann::json j = nlohmann::json::parse(buffer.str());
      mu_configured = j.contains("mu");
      gamma_configured = j.contains("gamma_policy");
    } catch (const std::exception& e) {
      return usage_error(app, std::string("bad config: ") + e.what());
    }
  }
  if (!std::isnan(flags.mu)) {
    cfg.mu = flags.mu;
    mu_configured = true;
  }
  if (!flags.gamma_policy.empty()) {
    if (flags.gamma_policy == "adaptive") {
      cfg.gamma_policy = GammaPolicy::Adaptive;
    } else if (flags.gamma_policy == "fixed") {
      cfg.gamma_policy = GammaPolicy::Fixed;
    } else {
      return usage_error(app, "unknown gamma policy '" + flags.gamma_policy + "'");
    }
    gamma_configured = true;
  }
  if (flags.memory > 0) cfg.memory = flags.memory;
  if (!std::isnan(flags.sigma0)) cfg.sigma0 = flags.sigma0;
  // mu guards against minibatch noise; deterministic objectives default to 0
  // so acceptance stays strict all the way to tight gradient norms.
  if (!mu_configured && problem.dataset_size == 1) cfg.mu = 0.0;
  // a B0 scale tracking recent curvature is much more robust on the bundled
  // problems than a fixed gamma, so the CLI defaults to it
  if (!gamma_configured) cfg.gamma_policy = GammaPolicy::Adaptive;

  const bool stochastic = problem.dataset_size > 1 && flags.batch > 0 &&
                          flags.batch < problem.dataset_size;
  const long steps_per_epoch =
      stochastic ? (problem.dataset_size + flags.batch - 1) / flags.batch : 1;
  long iters = flags.iters;
  if (iters <= 0 && flags.epochs > 0) iters = flags.epochs * steps_per_epoch;
  if (iters <= 0) return usage_error(app, "need --iters or --epochs");
  if (cfg.full_eval_every == 0 && stochastic)
    cfg.full_eval_every = static_cast<int>(steps_per_epoch);

  try {
    cfg.validate();
  } catch (const std::exception& e) {
    return usage_error(app, std::string("bad config: ") + e.what());
  }

  RunBudget budget;
  budget.max_iters = iters;
  budget.max_seconds = flags.max_seconds;

  const std::uint64_t seed = resolve_seed(flags.seed);
  const auto t0 = std::chrono::steady_clock::now();
  const Trace trace =
      arc_run(problem.default_start(), cfg, problem, budget, seed, flags.batch);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (flags.trace_out == "-") {
    trace_to_csv(std::cout, trace, flags.timing);
  } else {
    std::ofstream os(flags.trace_out);
    if (!os) {
      std::cerr << "error: cannot open " << flags.trace_out << " for writing\n";
      return 1;
    }
    trace_to_csv(os, trace, flags.timing);
  }

  long accepted = 0, fallback = 0, failed = 0;
  for (const StepReport& r : trace.steps) {
    if (r.branch == Branch::Accepted) ++accepted;
    if (r.branch == Branch::Fallback) ++fallback;
    if (r.branch == Branch::Failed) ++failed;
  }
  Vector g_full(problem.dim);
  const double f_full = problem.full_eval(trace.x_final, &g_full);

  nlohmann::json summary;
  summary["problem"] = problem.name;
  summary["dim"] = problem.dim;
  summary["dataset_size"] = problem.dataset_size;
  summary["iters_run"] = trace.steps.size();
  summary["final_f_full"] = f_full;
  summary["final_grad_norm_inf"] = g_full.cwiseAbs().maxCoeff();
  summary["final_grad_norm_2"] = g_full.norm();
  summary["accepted"] = accepted;
  summary["fallback"] = fallback;
  summary["failed"] = failed;
  summary["wall_seconds"] = wall;
  summary["seed"] = seed;
  summary["aborted"] = trace.aborted;
  if (trace.aborted) summary["abort_reason"] = trace.abort_reason;

  if (flags.summary_out.empty()) {
    std::cout << summary.dump(2) << '\n';
  } else {
    std::ofstream os(flags.summary_out);
    if (!os) {
      std::cerr << "error: cannot open " << flags.summary_out << " for writing\n";
      return 1;
    }
    os << summary.dump(2) << '\n';
  }
  return trace.aborted ? 1 : 0;
}

std::string strip_underscores(std::string s) {
  s.erase(std::remove(s.begin(), s.end(), '_'), s.end());
  return s;
}

int cmd_verify(std::uint64_t seed, int instances, const std::string& only) {
  const std::vector<verify::CheckResult> results = verify::run_all(seed, instances);
  bool any_fail = false;
  long shown = 0;
  for (const verify::CheckResult& r : results) {
    if (!only.empty() &&
        strip_underscores(r.name).find(strip_underscores(only)) == std::string::npos)
      continue;
    ++shown;
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " checked=" << r.checked
              << " failures=" << r.failures;
    if (!r.pass && !r.detail.empty()) std::cout << " (" << r.detail << ")";
    std::cout << '\n';
    any_fail = any_fail || !r.pass;
  }
  if (shown == 0) {
    std::cerr << "error: no verification suite matches '" << only << "'\n";
    return kUsageError;
  }
  return any_fail ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arclqn: cubic-regularized limited-memory SR1 optimization toolkit"};
  app.require_subcommand(1);

  BenchFlags bench_flags;
  CLI::App* bench_cmd =
      app.add_subcommand("bench-subproblem", "Time the subproblem solvers, CSV output");
  bench_cmd->add_option("--dims", bench_flags.dims, "Comma list of dimensions");
  bench_cmd->add_option("--kinds", bench_flags.kinds, "Comma list: hard,indefinite,pd");
  bench_cmd->add_option("--methods", bench_flags.methods, "Comma list: dense,naive,normtrick");
  bench_cmd->add_option("--m", bench_flags.m, "Memory size")->check(CLI::Range(1, 20));
  bench_cmd->add_option("--repeats", bench_flags.repeats, "Timed repeats per cell");
  bench_cmd->add_option("--timeout", bench_flags.timeout, "Per-solve timeout in seconds");
  bench_cmd->add_option("--seed", bench_flags.seed, "Instance seed");
  bench_cmd->add_option("--sigma", bench_flags.sigma, "Regularization weight of the instances");
  bench_cmd->add_flag("--mean", bench_flags.mean, "Report the mean instead of the median");
  bench_cmd->add_option("--dense-max", bench_flags.dense_max, "Largest n for the dense method");
  bench_cmd->add_option("--threads", bench_flags.threads, "Parallelism across instances");
  bench_cmd->add_option("--out", bench_flags.out, "CSV output path (default stdout)");

  TrainFlags train_flags;
  CLI::App* train_cmd = app.add_subcommand("train", "Run the optimizer on a test problem");
  train_cmd->add_option("--problem", train_flags.problem, "rosenbrock|quadratic|logistic")
      ->required();
  train_cmd->add_option("--n", train_flags.n, "Dimension (rosenbrock/quadratic)");
  train_cmd->add_option("--condition", train_flags.condition, "Condition number (quadratic)");
  train_cmd->add_option("--n-features", train_flags.n_features, "Feature count (logistic)");
  train_cmd->add_option("--N", train_flags.dataset, "Dataset size (logistic)");
  train_cmd->add_option("--batch", train_flags.batch, "Minibatch size (0 = full batch)");
  train_cmd->add_option("--iters", train_flags.iters, "Iteration budget");
  train_cmd->add_option("--epochs", train_flags.epochs, "Epoch budget (with --batch)");
  train_cmd->add_option("--seed", train_flags.seed, "Run seed");
  train_cmd->add_option("--config", train_flags.config_path, "Optimizer config JSON");
  train_cmd->add_option("--trace-out", train_flags.trace_out, "Trace CSV path ('-' = stdout)");
  train_cmd->add_option("--summary-out", train_flags.summary_out,
                        "Summary JSON path (default stdout)");
  train_cmd->add_flag("--timing", train_flags.timing,
                      "Record wall times in the trace (breaks byte-for-byte determinism)");
  train_cmd->add_option("--mu", train_flags.mu, "Minimum measured decrease for acceptance");
  train_cmd->add_option("--memory", train_flags.memory, "Quasi-Newton memory override");
  train_cmd->add_option("--sigma0", train_flags.sigma0, "Initial regularization weight");
  train_cmd->add_option("--gamma-policy", train_flags.gamma_policy,
                        "fixed|adaptive (default adaptive)");
  train_cmd->add_option("--max-seconds", train_flags.max_seconds, "Wall-clock budget");

  std::uint64_t verify_seed = 42;
  int verify_instances = 500;
  std::string verify_only;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Run the oracle-equivalence and property suites");
  verify_cmd->add_option("--seed", verify_seed, "Battery seed");
  verify_cmd->add_option("--instances", verify_instances, "Oracle comparison count");
  verify_cmd->add_option("--only", verify_only, "Run only suites matching this name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << CLI::FailureMessage::simple(&app, e) << "\n" << app.help() << std::flush;
    return kUsageError;
  }

  try {
    if (bench_cmd->parsed()) return cmd_bench(*bench_cmd, bench_flags);
    if (train_cmd->parsed()) return cmd_train(*train_cmd, train_flags);
    if (verify_cmd->parsed())
      return cmd_verify(resolve_seed(verify_seed), verify_instances, verify_only);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
