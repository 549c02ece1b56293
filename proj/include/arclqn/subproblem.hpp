#pragma once

#include "arclqn/lqn_state.hpp"
#include "arclqn/types.hpp"

namespace arclqn {

// Implicit eigendecomposition of B = gamma I + Psi M^{-1} Psi^T for one
// gradient g. B has the eigenvalue gamma with multiplicity n - k plus k
// explicit eigenvalues lam_hat_i = gamma + 1/lambda_i, where lambda_i solves
// the small generalized problem M v = lambda T v, T = Psi^T Psi. Generalized
// eigenvalues at zero (singular-M directions) are excluded; their
// eigendirections carry eigenvalue gamma and are absorbed into the cluster.
struct ImplicitSpectrum {
  double gamma = 1.0;
  Eigen::Index dim = 0;  // n
  Vector lam_hat;        // explicit eigenvalues of B, ascending
  Matrix v;              // k x k generalized eigenvectors, V^T T V = I
  Vector g2;             // V^T Psi^T g, aligned with lam_hat
  double g1_sq = 0.0;    // ||g||^2 - g2.g2, clamped at 0
  double g_norm = 0.0;   // ||g||
  double lambda1 = 0.0;  // min(gamma, min lam_hat): leftmost eigenvalue of B
  Vector ubar;           // Psi^T g, retained for step recovery

  int k() const { return static_cast<int>(lam_hat.size()); }
};

struct ToleranceSet {
  double nu = 1e-5;         // secular stopping tolerance
  double eps_shift = 1e-4;  // lambda_init offset above max(0, -lambda1)
  double eps_hard = 1e-10;  // hard-case threshold, relative to ||g||
  int max_newton = 200;

  static ToleranceSet training() { return {}; }
  static ToleranceSet verification() {
    ToleranceSet t;
    t.nu = 1e-7;
    return t;
  }
};

enum class StepCase { Interior, BoundarySaddle, HardCase, Failed };

enum class SolveFailure {
  None,
  SingularM,
  NotPositiveDefiniteT,
  MaxIterations,
  DegenerateProbe,
  DomainError,
};

struct SubproblemSolution {
  Vector s_star;
  double lambda_star = 0.0;
  StepCase kind = StepCase::Interior;
  int newton_iters = 0;
  double model_decrease = 0.0;  // f0 - m(s*), with f0 = 0
  SolveFailure failure = SolveFailure::None;

  bool failed() const { return kind == StepCase::Failed; }
};

// NormTrick evaluates ||s(lambda)|| and ||w(lambda)|| from the implicit
// spectrum in O(m) per Newton iteration. NaiveLqn runs the identical
// iteration but materializes s and w through O(mn) shifted compact solves
// each step (benchmark baseline).
enum class SolveMode { NormTrick, NaiveLqn };

ImplicitSpectrum implicit_spectrum(const LqnState& state, const Vector& g);

struct NormsSq {
  double s_sq = 0.0;
  double w_sq = 0.0;
};

// ||s(lambda)||^2 = ||g1||^2/(lambda+gamma)^2 + sum g2_i^2/(lam_hat_i+lambda)^2
// and the same sum with cubed denominators for ||w||^2. O(k). A vanishing
// denominator whose numerator magnitude is <= num_tol is dropped
// (pseudo-inverse convention); with a larger numerator it is a DomainError.
NormsSq norms_at(const ImplicitSpectrum& spec, double lam, double num_tol = 0.0);

// phi1(lambda) = 1/||s(lambda)|| - sigma/lambda. Returns +inf when s(lambda)
// vanishes identically.
double phi1(const ImplicitSpectrum& spec, double lam, double sigma);

// Newton correction for phi1 from the norms alone:
//   dlam = lam (||s|| - lam/sigma) / (||s|| + (lam/sigma)(lam ||w||^2/||s||^2))
double newton_step(const ImplicitSpectrum& spec, double lam, double sigma);

struct SecularResult {
  double lambda = 0.0;
  int iters = 0;
};

// Newton iteration on phi1 from lambda_init until
// 0 <= ||s(lambda)|| - lambda/sigma < nu * max(1, lambda/sigma).
// Throws MaxIterationsError past max_iters.
SecularResult solve_lambda(const ImplicitSpectrum& spec, double sigma, double nu,
                           double lambda_init, int max_iters = 200);

// s = -(B + lambda I)^{-1} g recovered in O(mn + m^2) as
//   -g/(lambda+gamma) - Psi V Dbar V^T ubar,
// Dbar = (LamHat + lambda I)^{-1} - (lambda+gamma)^{-1} I, with the
// pseudo-inverse convention of norms_at at vanishing denominators.
Vector recover_step(const LqnState& state, const ImplicitSpectrum& spec,
                    const Vector& g, double lambda_star, double num_tol = 0.0);

// Unit eigenvector for the leftmost eigenvalue. When the gamma cluster is
// leftmost the probe is projected onto it ((I - U2 U2^T) probe), retrying
// with e1 and a fixed seeded random vector when annihilated; otherwise
// u1 = Psi v1 for the V column of the smallest lam_hat.
Vector leftmost_eigvec(const LqnState& state, const ImplicitSpectrum& spec,
                       const Vector& probe);

// alpha >= 0 with ||s + alpha u1||^2 = s_norm^2 + alpha^2 = (lambda1/sigma)^2.
double hard_case_alpha(double s_norm, double lambda1, double sigma);

// (B + lambda I)^{-1} b through the Sherman-Morrison-Woodbury identity on the
// compact form; O(mn) plus a k x k factorization. Used by the NaiveLqn mode.
Vector shifted_solve(const LqnState& state, double lam, const Vector& b);

// Full case analysis: interior secular root, boundary saddle, or
// alpha-corrected hard case. Numerical failures (MaxIterations,
// NotPositiveDefinite(T), DegenerateProbe, ...) map onto kind == Failed.
SubproblemSolution solve_subproblem(const LqnState& state, const Vector& g,
                                    double sigma, const ToleranceSet& tol = {},
                                    SolveMode mode = SolveMode::NormTrick);

struct CauchyPoint {
  Vector s;
  double model = 0.0;  // m(s_c) with f0 as passed
};

// Minimizer of the cubic model along -g: s_c = -upsilon* g with upsilon* the
// positive root of sigma u^2 ||g||^3 + u g.Bg - ||g||^2 = 0.
CauchyPoint cauchy_point(const LqnState& state, const Vector& g, double sigma,
                         double f0);

}  // namespace arclqn
