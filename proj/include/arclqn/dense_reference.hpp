#pragma once

#include "arclqn/lqn_state.hpp"
#include "arclqn/subproblem.hpp"
#include "arclqn/types.hpp"

namespace arclqn {

// Small-scale dense oracle: explicit SR1 matrices, a Cholesky-per-iteration
// secular solver with a full-eigendecomposition fallback, and a sampling
// minimizer. Used for equivalence testing and the dense baseline column of
// the subproblem benchmark. Correctness over speed throughout.

// Applies the recursive SR1 update in place under the same acceptance rule as
// LqnState::try_update (the rescaling there changes stored factors only, not
// the resulting matrix).
UpdateOutcome dense_sr1_update(Matrix& b, const Vector& s, const Vector& y,
                               double eps_curv = LqnState::kDefaultEpsCurv);

// Dense B assembled by replaying the pairs stored in `state` from
// B0 = gamma I; matches bmul to rounding.
Matrix dense_from_state(const LqnState& state);

struct DenseSolveOptions {
  double nu = 1e-7;
  double eps_shift = 1e-4;
  double eps_hard = 1e-10;
  int max_newton = 200;
};

// Same contract as solve_subproblem. Tries the Cholesky-based Newton
// iteration directly; an indefinite factorization (or iteration breakdown)
// falls back to the full eigendecomposition path, which also resolves the
// hard case.
SubproblemSolution dense_solve_subproblem(const Matrix& b, const Vector& g,
                                          double sigma,
                                          const DenseSolveOptions& opt = {});

struct BruteForceResult {
  Vector s_best;
  double m_best = 0.0;
};

// Minimum of the cubic model over `samples` quasi-random points in the ball
// of the given radius, polished by coordinate descent. n <= 3 only.
BruteForceResult brute_force_min(const Matrix& b, const Vector& g, double sigma,
                                 double radius, long samples, double f0 = 0.0);

// m(s) for a dense B.
double dense_model_value(const Matrix& b, const Vector& g, double sigma,
                         const Vector& s, double f0 = 0.0);

}  // namespace arclqn
