#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "arclqn/lqn_state.hpp"
#include "arclqn/problems.hpp"
#include "arclqn/subproblem.hpp"
#include "arclqn/types.hpp"

namespace arclqn {

enum class FallbackKind { Sgd, Adam };
enum class GammaPolicy { Fixed, Adaptive };

struct ArcConfig {
  double eta1 = 0.1;          // acceptance threshold on rho
  double eta2 = 0.7;          // very-successful threshold (sigma halves)
  double sigma0 = 1.0;
  double sigma_floor = 1e-8;  // delta
  double sigma_cap = 8096.0;
  double alpha1 = 1.0;        // scale on accepted cubic steps
  double alpha2 = 1e-3;       // fallback learning rate
  FallbackKind fallback = FallbackKind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-4;
  double mu = 1e-3;           // minimum measured decrease for acceptance
  double nu = 1e-5;
  double eps_shift = 1e-4;
  double eps_curv = 1e-8;
  double kappa = 1e-7;
  int memory = 5;
  GammaPolicy gamma_policy = GammaPolicy::Fixed;
  double gamma0 = 1.0;
  double gamma_min = 1e-3;
  double gamma_max = 1e3;
  int max_newton = 200;
  int full_eval_every = 0;    // 0 = never trace the full objective

  // Throws std::invalid_argument on inconsistent settings. eta1 > 1 is
  // allowed deliberately: it forces perpetual rejection (pure fallback).
  void validate() const;

  ToleranceSet tolerances() const;
};

std::string config_to_json(const ArcConfig& cfg);
ArcConfig config_from_json(const std::string& text);

enum class Branch { Accepted, Fallback, Failed };

struct StepReport {
  long iter = 0;
  Branch branch = Branch::Fallback;
  double rho = 0.0;             // NaN when the solver failed
  double sigma_after = 0.0;
  double f_before = 0.0;
  double f_after = 0.0;         // on the step's minibatch
  double grad_norm = 0.0;
  double grad_norm_inf = 0.0;
  int newton_iters = 0;
  StepCase subproblem_case = StepCase::Failed;
  long long wall_time_ns = 0;
  double f_full = std::nan("");  // periodic full-objective value, NaN when skipped
};

struct Trace {
  std::vector<StepReport> steps;
  Vector x_final;
  bool aborted = false;
  std::string abort_reason;
};

// CSV schema: iter,branch,rho,sigma,f_batch,f_full_or_blank,grad_norm,
// newton_iters,case,wall_time_ns. NaN fields print blank. With
// include_timing false the timing column is written as 0 so identical runs
// produce byte-identical files.
void trace_to_csv(std::ostream& os, const Trace& trace, bool include_timing = false);

// rho = (f0 - f1) / (f0 - m_star); throws DegenerateModelError when the
// predicted decrease is below 1e-15 (1 + |f0|).
double rho(double f0, double f1, double m_star);

// rho >= eta2: max(sigma/2, floor); eta1 <= rho < eta2: unchanged;
// rho < eta1: min(2 sigma, cap).
double sigma_update(double sigma, double rho_value, const ArcConfig& cfg);

struct AdamState {
  Vector m;
  Vector v;
  long t = 0;
};

// Bias-corrected Adam displacement -alpha2 mhat/(sqrt(vhat) + eps); mutates
// the accumulator state.
Vector adam_step(AdamState& state, const Vector& g, double alpha2, double beta1,
                 double beta2, double eps_adam);

// One outer iteration on the given minibatch: solve the subproblem, measure
// rho, either accept x + alpha1 s* or take the fallback displacement, harvest
// the (step, gradient difference) pair on both branches, and adapt sigma.
// x, state, sigma and adam are updated in place.
StepReport arc_step(Vector& x, LqnState& state, double& sigma, AdamState& adam,
                    const ArcConfig& cfg, const Problem& problem,
                    const std::vector<int>& batch, long iter = 0);

struct RunBudget {
  long max_iters = 0;
  double max_seconds = 0.0;   // <= 0: unlimited
  double grad_tol_inf = 0.0;  // > 0: stop once the batch gradient inf-norm dips below
};

// Full optimization loop. Minibatches of size batch_size are sampled without
// replacement per step from the documented PRNG; batch_size <= 0 or >= N runs
// full-batch (no sampling, identical traces for any seed). Non-finite
// objective values abort the run with the partial trace preserved.
Trace arc_run(const Vector& x0, const ArcConfig& cfg, const Problem& problem,
              const RunBudget& budget, std::uint64_t rng_seed, int batch_size = 0);

const char* branch_name(Branch b);
const char* step_case_name(StepCase c);

}  // namespace arclqn
