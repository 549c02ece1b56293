#include "arclqn/arc.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "arclqn/rng.hpp"

namespace arclqn {

void ArcConfig::validate() const {
  if (!(eta1 > 0.0) || !(eta2 >= eta1))
    throw std::invalid_argument("ArcConfig: require 0 < eta1 <= eta2");
  if (!(sigma_floor > 0.0) || !(sigma0 >= sigma_floor) || !(sigma_cap >= sigma0))
    throw std::invalid_argument("ArcConfig: require 0 < floor <= sigma0 <= cap");
  if (!(alpha1 > 0.0) || !(alpha2 > 0.0))
    throw std::invalid_argument("ArcConfig: learning rates must be positive");
  if (!(mu >= 0.0)) throw std::invalid_argument("ArcConfig: mu must be >= 0");
  if (!(nu > 0.0) || !(eps_shift > 0.0) || !(eps_curv > 0.0) || !(kappa > 0.0))
    throw std::invalid_argument("ArcConfig: tolerances must be positive");
  if (memory < 1) throw std::invalid_argument("ArcConfig: memory must be >= 1");
  if (!(gamma0 > 0.0) || !(gamma_min > 0.0) || !(gamma_max >= gamma_min))
    throw std::invalid_argument("ArcConfig: bad gamma settings");
  if (max_newton < 1) throw std::invalid_argument("ArcConfig: max_newton must be >= 1");
}

ToleranceSet ArcConfig::tolerances() const {
  ToleranceSet t;
  t.nu = nu;
  t.eps_shift = eps_shift;
  t.max_newton = max_newton;
  return t;
}

std::string config_to_json(const ArcConfig& cfg) {
  nlohmann::json j;
  j["eta1"] = cfg.eta1;
  j["eta2"] = cfg.eta2;
  j["sigma0"] = cfg.sigma0;
  j["sigma_floor"] = cfg.sigma_floor;
  j["sigma_cap"] = cfg.sigma_cap;
  j["alpha1"] = cfg.alpha1;
  j["alpha2"] = cfg.alpha2;
  j["fallback"] = cfg.fallback == FallbackKind::Adam ? "adam" : "sgd";
  j["beta1"] = cfg.beta1;
  j["beta2"] = cfg.beta2;
  j["eps_adam"] = cfg.eps_adam;
  j["mu"] = cfg.mu;
  j["nu"] = cfg.nu;
  j["eps_shift"] = cfg.eps_shift;
  j["eps_curv"] = cfg.eps_curv;
  j["kappa"] = cfg.kappa;
  j["memory"] = cfg.memory;
  j["gamma_policy"] = cfg.gamma_policy == GammaPolicy::Adaptive ? "adaptive" : "fixed";
  j["gamma0"] = cfg.gamma0;
  j["gamma_min"] = cfg.gamma_min;
  j["gamma_max"] = cfg.gamma_max;
  j["max_newton"] = cfg.max_newton;
  j["full_eval_every"] = cfg.full_eval_every;
  return j.dump(2);
}

ArcConfig config_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ArcConfig cfg;
  const auto num = [&j](const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
  };
  cfg.eta1 = num("eta1", cfg.eta1);
  cfg.eta2 = num("eta2", cfg.eta2);
  cfg.sigma0 = num("sigma0", cfg.sigma0);
  cfg.sigma_floor = num("sigma_floor", cfg.sigma_floor);
  cfg.sigma_cap = num("sigma_cap", cfg.sigma_cap);
  cfg.alpha1 = num("alpha1", cfg.alpha1);
  cfg.alpha2 = num("alpha2", cfg.alpha2);
  if (j.contains("fallback")) {
    const std::string f = j.at("fallback").get<std::string>();
    if (f == "adam") {
      cfg.fallback = FallbackKind::Adam;
    } else if (f == "sgd") {
      cfg.fallback = FallbackKind::Sgd;
    } else {
      throw std::invalid_argument("config: unknown fallback '" + f + "'");
    }
  }
  cfg.beta1 = num("beta1", cfg.beta1);
  cfg.beta2 = num("beta2", cfg.beta2);
  cfg.eps_adam = num("eps_adam", cfg.eps_adam);
  cfg.mu = num("mu", cfg.mu);
  cfg.nu = num("nu", cfg.nu);
  cfg.eps_shift = num("eps_shift", cfg.eps_shift);
  cfg.eps_curv = num("eps_curv", cfg.eps_curv);
  cfg.kappa = num("kappa", cfg.kappa);
  if (j.contains("memory")) cfg.memory = j.at("memory").get<int>();
  if (j.contains("gamma_policy")) {
    const std::string p = j.at("gamma_policy").get<std::string>();
    if (p == "adaptive") {
      cfg.gamma_policy = GammaPolicy::Adaptive;
    } else if (p == "fixed") {
      cfg.gamma_policy = GammaPolicy::Fixed;
    } else {
      throw std::invalid_argument("config: unknown gamma_policy '" + p + "'");
    }
  }
  cfg.gamma0 = num("gamma0", cfg.gamma0);
  cfg.gamma_min = num("gamma_min", cfg.gamma_min);
  cfg.gamma_max = num("gamma_max", cfg.gamma_max);
  if (j.contains("max_newton")) cfg.max_newton = j.at("max_newton").get<int>();
  if (j.contains("full_eval_every")) cfg.full_eval_every = j.at("full_eval_every").get<int>();
  cfg.validate();
  return cfg;
}

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::Accepted:
      return "accepted";
    case Branch::Fallback:
      return "fallback";
    case Branch::Failed:
      return "failed";
  }
  return "?";
}

const char* step_case_name(StepCase c) {
  switch (c) {
    case StepCase::Interior:
      return "interior";
    case StepCase::BoundarySaddle:
      return "boundary_saddle";
    case StepCase::HardCase:
      return "hard_case";
    case StepCase::Failed:
      return "failed";
  }
  return "?";
}

namespace {

void append_number(std::string& line, double v) {
  if (std::isnan(v)) return;  // blank field
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  line += buf;
}

}  // namespace

void trace_to_csv(std::ostream& os, const Trace& trace, bool include_timing) {
  os << "iter,branch,rho,sigma,f_batch,f_full_or_blank,grad_norm,newton_iters,case,"
        "wall_time_ns\n";
  for (const StepReport& r : trace.steps) {
    std::string line = std::to_string(r.iter);
    line += ',';
    line += branch_name(r.branch);
    line += ',';
    append_number(line, r.rho);
    line += ',';
    append_number(line, r.sigma_after);
    line += ',';
    append_number(line, r.f_after);
    line += ',';
    append_number(line, r.f_full);
    line += ',';
    append_number(line, r.grad_norm);
    line += ',';
    line += std::to_string(r.newton_iters);
    line += ',';
    line += step_case_name(r.subproblem_case);
    line += ',';
    line += std::to_string(include_timing ? r.wall_time_ns : 0LL);
    os << line << '\n';
  }
}

double rho(double f0, double f1, double m_star) {
  const double predicted = f0 - m_star;
  const double mu_pred = 1e-15 * (1.0 + std::abs(f0));
  if (!(predicted > mu_pred))
    throw DegenerateModelError("rho: predicted decrease below resolution");
  return (f0 - f1) / predicted;
}

double sigma_update(double sigma, double rho_value, const ArcConfig& cfg) {
  if (rho_value >= cfg.eta2) return std::max(0.5 * sigma, cfg.sigma_floor);
  if (rho_value >= cfg.eta1) return sigma;
  return std::min(2.0 * sigma, cfg.sigma_cap);
}

Vector adam_step(AdamState& state, const Vector& g, double alpha2, double beta1,
                 double beta2, double eps_adam) {
  if (state.t == 0) {
    state.m = Vector::Zero(g.size());
    state.v = Vector::Zero(g.size());
  }
  state.t += 1;
  state.m = beta1 * state.m + (1.0 - beta1) * g;
  state.v = beta2 * state.v + (1.0 - beta2) * g.cwiseProduct(g);
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  const Vector mhat = state.m / bc1;
  const Vector vhat = state.v / bc2;
  return Vector(-alpha2 * mhat.cwiseQuotient(vhat.cwiseSqrt().array().matrix() +
                                             Vector::Constant(g.size(), eps_adam)));
}

namespace {

void harvest_pair(LqnState& state, const ArcConfig& cfg, const Vector& step,
                  const Vector& y) {
  state.try_update(step, y, cfg.eps_curv, cfg.kappa);
  if (cfg.gamma_policy == GammaPolicy::Adaptive) {
    const double sy = step.dot(y);
    if (sy != 0.0) {
      const double raw = y.squaredNorm() / sy;
      state.set_gamma(std::min(std::max(raw, cfg.gamma_min), cfg.gamma_max));
    }
  }
}

}  // namespace

StepReport arc_step(Vector& x, LqnState& state, double& sigma, AdamState& adam,
                    const ArcConfig& cfg, const Problem& problem,
                    const std::vector<int>& batch, long iter) {
  const auto t0 = std::chrono::steady_clock::now();
  StepReport report;
  report.iter = iter;
  report.rho = std::nan("");

  Vector g(x.size());
  const double f0 = problem.eval(x, batch, &g);
  if (!std::isfinite(f0) || !g.allFinite())
    throw std::runtime_error("arc_step: non-finite objective or gradient");
  report.f_before = f0;
  report.grad_norm = g.norm();
  report.grad_norm_inf = g.cwiseAbs().maxCoeff();

  const SubproblemSolution sol =
      solve_subproblem(state, g, sigma, cfg.tolerances(), SolveMode::NormTrick);
  report.newton_iters = sol.newton_iters;
  report.subproblem_case = sol.kind;

  bool take_fallback = true;
  bool solver_failed = sol.failed();

  if (!solver_failed) {
    const double m_star = f0 - sol.model_decrease;
    Vector g_trial(x.size());
    const Vector x_trial = x + sol.s_star;
    const double f_trial = problem.eval(x_trial, batch, &g_trial);
    if (!std::isfinite(f_trial)) throw std::runtime_error("arc_step: non-finite trial value");

    try {
      report.rho = rho(f0, f_trial, m_star);
    } catch (const DegenerateModelError&) {
      solver_failed = true;
      report.rho = std::nan("");
    }

    if (!solver_failed && report.rho >= cfg.eta1) {
      Vector x_acc, g_acc;
      double f_acc;
      if (cfg.alpha1 == 1.0) {
        x_acc = x_trial;
        f_acc = f_trial;
        g_acc = g_trial;
      } else {
        x_acc = x + cfg.alpha1 * sol.s_star;
        g_acc.resize(x.size());
        f_acc = problem.eval(x_acc, batch, &g_acc);
        if (!std::isfinite(f_acc)) throw std::runtime_error("arc_step: non-finite value");
      }
      if (f0 - f_acc > cfg.mu) {
        harvest_pair(state, cfg, Vector(x_acc - x), Vector(g_acc - g));
        x = std::move(x_acc);
        sigma = sigma_update(sigma, report.rho, cfg);
        report.branch = Branch::Accepted;
        report.f_after = f_acc;
        take_fallback = false;
      }
    }
  }

  if (take_fallback) {
    if (solver_failed && sol.failure == SolveFailure::NotPositiveDefiniteT &&
        state.count() > 0) {
      state.reset_trim();  // rank-deficient Psi: trim rather than perturb
    }
    sigma = std::min(2.0 * sigma, cfg.sigma_cap);
    const Vector disp = cfg.fallback == FallbackKind::Sgd
                            ? Vector(-cfg.alpha2 * g)
                            : adam_step(adam, g, cfg.alpha2, cfg.beta1, cfg.beta2,
                                        cfg.eps_adam);
    const Vector x_next = x + disp;
    Vector g_next(x.size());
    const double f_next = problem.eval(x_next, batch, &g_next);
    if (!std::isfinite(f_next)) throw std::runtime_error("arc_step: non-finite fallback value");
    harvest_pair(state, cfg, disp, Vector(g_next - g));
    x = x_next;
    report.branch = solver_failed ? Branch::Failed : Branch::Fallback;
    report.f_after = f_next;
  }

  report.sigma_after = sigma;
  report.wall_time_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

Trace arc_run(const Vector& x0, const ArcConfig& cfg, const Problem& problem,
              const RunBudget& budget, std::uint64_t rng_seed, int batch_size) {
  cfg.validate();
  Trace trace;
  trace.x_final = x0;
  if (budget.max_iters <= 0) return trace;

  Vector x = x0;
  LqnState state(cfg.gamma0, cfg.memory);
  AdamState adam;
  double sigma = cfg.sigma0;
  Rng rng(mix_seed(rng_seed, 0xa2c));

  const long n_data = problem.dataset_size;
  const bool full = batch_size <= 0 || batch_size >= n_data;
  const std::vector<int> all = problem.full_batch();

  const auto start = std::chrono::steady_clock::now();
  for (long iter = 0; iter < budget.max_iters; ++iter) {
    if (budget.max_seconds > 0.0) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (elapsed > budget.max_seconds) break;
    }
    const std::vector<int> batch =
        full ? all : rng.sample_without_replacement(static_cast<int>(n_data), batch_size);
    StepReport report;
    try {
      report = arc_step(x, state, sigma, adam, cfg, problem, batch, iter);
    } catch (const std::runtime_error& e) {
      trace.aborted = true;
      trace.abort_reason = e.what();
      break;
    }
    if (cfg.full_eval_every > 0 && (iter + 1) % cfg.full_eval_every == 0)
      report.f_full = problem.full_eval(x);
    const bool done = budget.grad_tol_inf > 0.0 && report.grad_norm_inf <= budget.grad_tol_inf;
    trace.steps.push_back(std::move(report));
    if (done) break;
  }
  trace.x_final = std::move(x);
  return trace;
}

}  // namespace arclqn
