#include "arclqn/subproblem.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "arclqn/rng.hpp"
#include "arclqn/small_eig.hpp"

namespace arclqn {

namespace {

// Aggregated numerator magnitude on the leftmost eigenspace of B; the hard
// case requires it to vanish relative to ||g||.
double leftmost_mass(const ImplicitSpectrum& spec) {
  const double tie = 1e-10 * std::max(1.0, std::abs(spec.lambda1));
  double m2 = 0.0;
  if (spec.gamma <= spec.lambda1 + tie) m2 += spec.g1_sq;
  for (int i = 0; i < spec.k(); ++i)
    if (spec.lam_hat[i] <= spec.lambda1 + tie) m2 += spec.g2[i] * spec.g2[i];
  return std::sqrt(m2);
}

// |gap| below the tolerance band. The exact-root side of the band cannot be
// one-sided: approaching from the right of the root, the attainable gap
// resolution near a large pole exceeds any fixed negative cutoff.
bool secular_converged(double gap, double ref, double nu) { return std::abs(gap) < nu * ref; }

}  // namespace

ImplicitSpectrum implicit_spectrum(const LqnState& state, const Vector& g) {
  if (state.count() > 0 && g.size() != state.dim())
    throw std::invalid_argument("implicit_spectrum: gradient dimension mismatch");

  ImplicitSpectrum spec;
  spec.gamma = state.gamma();
  spec.dim = g.size();
  spec.g_norm = g.norm();

  const int k0 = state.count();
  if (k0 == 0) {
    spec.g1_sq = spec.g_norm * spec.g_norm;
    spec.lambda1 = spec.gamma;
    spec.v.resize(0, 0);
    return spec;
  }

  const GeneralizedEig geig = generalized_eigh(state.m_matrix(), state.psi_gram());
  spec.ubar = state.psi_tmul(g);

  // A generalized eigenvalue at zero is a singular-M direction; that
  // eigendirection of B carries the eigenvalue gamma and stays in the
  // cluster, so it is excluded here together with its vector.
  const double zero_tol = 1e-12 * std::max(1.0, geig.lambdas.cwiseAbs().maxCoeff());
  std::vector<int> keep;
  for (int i = 0; i < k0; ++i)
    if (std::abs(geig.lambdas[i]) > zero_tol) keep.push_back(i);

  const int k = static_cast<int>(keep.size());
  Vector lam_hat(k), g2(k);
  Matrix v(k0, k);
  for (int j = 0; j < k; ++j) {
    lam_hat[j] = spec.gamma + 1.0 / geig.lambdas[keep[static_cast<size_t>(j)]];
    v.col(j) = geig.v.col(keep[static_cast<size_t>(j)]);
    g2[j] = v.col(j).dot(spec.ubar);
  }

  // 1/lambda does not preserve the generalized ordering; sort by lam_hat.
  std::vector<int> order(static_cast<size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&lam_hat](int a, int b) { return lam_hat[a] < lam_hat[b]; });
  spec.lam_hat.resize(k);
  spec.g2.resize(k);
  spec.v.resize(k0, k);
  for (int j = 0; j < k; ++j) {
    const int src = order[static_cast<size_t>(j)];
    spec.lam_hat[j] = lam_hat[src];
    spec.g2[j] = g2[src];
    spec.v.col(j) = v.col(src);
  }

  spec.g1_sq = std::max(0.0, spec.g_norm * spec.g_norm - spec.g2.squaredNorm());
  spec.lambda1 = k > 0 ? std::min(spec.gamma, spec.lam_hat[0]) : spec.gamma;
  return spec;
}

NormsSq norms_at(const ImplicitSpectrum& spec, double lam, double num_tol) {
  const double floor_den = 1e-12 * std::max(1.0, std::abs(lam));
  NormsSq out;
  const auto add = [&](double num_sq, double den) {
    if (den > floor_den) {
      const double q = num_sq / (den * den);
      out.s_sq += q;
      out.w_sq += q / den;
    } else if (std::sqrt(num_sq) > num_tol) {
      throw DomainError("norms_at: vanishing denominator with nonzero numerator");
    }
    // else: pseudo-inverse convention, term dropped
  };
  add(spec.g1_sq, lam + spec.gamma);
  for (int i = 0; i < spec.k(); ++i) add(spec.g2[i] * spec.g2[i], spec.lam_hat[i] + lam);
  return out;
}

double phi1(const ImplicitSpectrum& spec, double lam, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("phi1: sigma must be positive");
  if (!(lam > 0.0)) throw DomainError("phi1: lambda must be positive");
  const NormsSq ns = norms_at(spec, lam, 0.0);
  if (ns.s_sq == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(ns.s_sq) - sigma / lam;
}

double newton_step(const ImplicitSpectrum& spec, double lam, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("newton_step: sigma must be positive");
  if (!(lam > 0.0)) throw DomainError("newton_step: lambda must be positive");
  const NormsSq ns = norms_at(spec, lam, 0.0);
  if (ns.s_sq == 0.0) throw DomainError("newton_step: s(lambda) vanishes");
  const double sn = std::sqrt(ns.s_sq);
  const double ratio = lam / sigma;
  return lam * (sn - ratio) / (sn + ratio * (lam * ns.w_sq / ns.s_sq));
}

SecularResult solve_lambda(const ImplicitSpectrum& spec, double sigma, double nu,
                           double lambda_init, int max_iters) {
  if (!(sigma > 0.0)) throw std::invalid_argument("solve_lambda: sigma must be positive");
  if (!(nu > 0.0)) throw std::invalid_argument("solve_lambda: nu must be positive");
  const double pole = std::max(0.0, -spec.lambda1);
  if (!(lambda_init > pole))
    throw std::invalid_argument("solve_lambda: lambda_init must exceed max(0, -lambda1)");

  double lam = lambda_init;
  int iters = 0;
  while (true) {
    const NormsSq ns = norms_at(spec, lam, 0.0);
    if (ns.s_sq == 0.0) throw DomainError("solve_lambda: s(lambda) vanishes, no secular root");
    const double sn = std::sqrt(ns.s_sq);
    const double ratio = lam / sigma;
    const double ref = std::max(1.0, ratio);
    const double gap = sn - ratio;
    if (secular_converged(gap, ref, nu)) return {lam, iters};
    if (iters >= max_iters)
      throw MaxIterationsError("solve_lambda: no convergence within iteration cap");
    const double dlam = lam * gap / (sn + ratio * (lam * ns.w_sq / ns.s_sq));
    double next = lam + dlam;
    if (!std::isfinite(next)) throw DomainError("solve_lambda: non-finite Newton update");
    // Newton started right of the root can overshoot past the pole; bisect
    // back instead of leaving the domain.
    if (next <= pole) next = 0.5 * (lam + pole);
    if (next == lam)
      throw MaxIterationsError("solve_lambda: stagnated at double-precision resolution");
    lam = next;
    ++iters;
  }
}

Vector recover_step(const LqnState& state, const ImplicitSpectrum& spec,
                    const Vector& g, double lambda_star, double num_tol) {
  const double floor_den = 1e-12 * std::max(1.0, std::abs(lambda_star));
  const auto pinv = [&](double den, double num_mag) -> double {
    if (den > floor_den) return 1.0 / den;
    if (num_mag <= num_tol) return 0.0;
    throw DomainError("recover_step: vanishing denominator with nonzero coefficient");
  };

  const int k = spec.k();
  const double c = lambda_star + spec.gamma;
  if (k == 0) return Vector(-pinv(c, spec.g_norm) * g);

  if (c <= floor_den) {
    // The gamma cluster sits at the pole; g may have no component on it and
    // the subtraction identity below does not apply.
    if (std::sqrt(spec.g1_sq) > num_tol)
      throw DomainError("recover_step: gamma cluster at pole with nonzero g1");
    Vector r(k);
    for (int i = 0; i < k; ++i)
      r[i] = pinv(spec.lam_hat[i] + lambda_star, std::abs(spec.g2[i])) * spec.g2[i];
    return Vector(-state.psi_mul(spec.v * r));
  }

  Vector r(k);
  for (int i = 0; i < k; ++i) {
    const double coef = pinv(spec.lam_hat[i] + lambda_star, std::abs(spec.g2[i]));
    r[i] = (coef - 1.0 / c) * spec.g2[i];
  }
  return Vector(-g / c - state.psi_mul(spec.v * r));
}

Vector leftmost_eigvec(const LqnState& state, const ImplicitSpectrum& spec,
                       const Vector& probe) {
  const Eigen::Index n = spec.dim;
  if (probe.size() != n) throw std::invalid_argument("leftmost_eigvec: probe dimension mismatch");
  const int k = spec.k();

  // Deterministic fallbacks: e1, then a fixed seeded random direction.
  const auto candidate = [&](int idx) -> Vector {
    if (idx == 0) return probe;
    if (idx == 1) {
      Vector e1 = Vector::Zero(n);
      if (n > 0) e1[0] = 1.0;
      return e1;
    }
    Rng rng(0xACC01ADEULL);
    return rng.normal_vector(n);
  };

  if (k == 0 || spec.gamma < spec.lam_hat[0]) {
    for (int idx = 0; idx < 3; ++idx) {
      const Vector p = candidate(idx);
      const double pn = p.norm();
      if (pn == 0.0) continue;
      Vector r = p;
      if (k > 0) {
        const Vector t = spec.v.transpose() * state.psi_tmul(p);  // U2^T p
        r -= state.psi_mul(spec.v * t);
      }
      const double rn = r.norm();
      if (rn > 1e-10 * pn) return Vector(r / rn);
    }
    throw DegenerateProbeError("leftmost_eigvec: all probes annihilated by projection");
  }

  Vector u = state.psi_mul(spec.v.col(0));
  const double un = u.norm();
  if (un == 0.0) throw DegenerateProbeError("leftmost_eigvec: Psi v1 vanished");
  return Vector(u / un);
}

double hard_case_alpha(double s_norm, double lambda1, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("hard_case_alpha: sigma must be positive");
  if (!(lambda1 < 0.0)) throw std::invalid_argument("hard_case_alpha: lambda1 must be negative");
  const double target = -lambda1 / sigma;
  if (s_norm >= target)
    throw DomainError("hard_case_alpha: boundary solution already long enough");
  return std::sqrt(std::max(0.0, target * target - s_norm * s_norm));
}

Vector shifted_solve(const LqnState& state, double lam, const Vector& b) {
  const double c = state.gamma() + lam;
  if (!(c > 0.0)) throw DomainError("shifted_solve: gamma + lambda must be positive");
  if (state.count() == 0) return Vector(b / c);
  if (b.size() != state.dim()) throw std::invalid_argument("shifted_solve: dimension mismatch");
  // (B + lam I)^{-1} b = (b - Psi (cM + T)^{-1} Psi^T b)/c
  const Vector u = state.psi_tmul(b);
  Eigen::FullPivLU<Matrix> lu(c * state.m_matrix() + state.psi_gram());
  if (!lu.isInvertible()) throw SingularMatrixError("shifted_solve: cM + T is singular");
  const Vector w = lu.solve(u);
  return Vector((b - state.psi_mul(w)) / c);
}

namespace {

struct NaiveResult {
  double lambda = 0.0;
  int iters = 0;
  Vector s;
};

// Same iteration and stopping rule as solve_lambda, but s and w are
// materialized through O(mn) shifted solves each step.
NaiveResult solve_lambda_naive(const LqnState& state, const Vector& g, double sigma,
                               double nu, double lambda_init, int max_iters,
                               double pole) {
  double lam = lambda_init;
  int iters = 0;
  while (true) {
    Vector s = -shifted_solve(state, lam, g);
    const double sn = s.norm();
    if (sn == 0.0) throw DomainError("solve_lambda: s(lambda) vanishes, no secular root");
    const Vector t = shifted_solve(state, lam, s);
    const double wsq = s.dot(t);  // ||w||^2 with L w = s, B + lam I = L L^T
    const double ratio = lam / sigma;
    const double ref = std::max(1.0, ratio);
    const double gap = sn - ratio;
    if (secular_converged(gap, ref, nu)) return {lam, iters, std::move(s)};
    if (iters >= max_iters)
      throw MaxIterationsError("solve_lambda: no convergence within iteration cap");
    const double dlam = lam * gap / (sn + ratio * (lam * wsq / (sn * sn)));
    double next = lam + dlam;
    if (!std::isfinite(next)) throw DomainError("solve_lambda: non-finite Newton update");
    if (next <= pole) next = 0.5 * (lam + pole);
    if (next == lam)
      throw MaxIterationsError("solve_lambda: stagnated at double-precision resolution");
    lam = next;
    ++iters;
  }
}

}  // namespace

SubproblemSolution solve_subproblem(const LqnState& state, const Vector& g,
                                    double sigma, const ToleranceSet& tol,
                                    SolveMode mode) {
  if (!g.allFinite()) throw std::invalid_argument("solve_subproblem: non-finite gradient");
  if (!(sigma > 0.0)) throw std::invalid_argument("solve_subproblem: sigma must be positive");

  SubproblemSolution out;
  const auto fail = [&](SolveFailure why) {
    out.kind = StepCase::Failed;
    out.failure = why;
    out.s_star = Vector::Zero(g.size());
    out.lambda_star = 0.0;
    out.model_decrease = 0.0;
    return out;
  };

  try {
    const ImplicitSpectrum spec = implicit_spectrum(state, g);
    const double num_tol = tol.eps_hard * spec.g_norm;
    const double pole = std::max(0.0, -spec.lambda1);

    const auto finish = [&](Vector s, double lam, StepCase kind, int iters) {
      out.s_star = std::move(s);
      out.lambda_star = lam;
      out.kind = kind;
      out.newton_iters = iters;
      // every returned step satisfies (B + lam I) s = -g (the hard-case
      // correction lies in the null space), so s.Bs = -g.s - lam ||s||^2 and
      // the model value costs O(n) instead of another compact multiply
      const double sn = out.s_star.norm();
      out.model_decrease =
          -(0.5 * g.dot(out.s_star) - 0.5 * lam * sn * sn + sigma / 3.0 * sn * sn * sn);
      return out;
    };

    const auto resolve_u1 = [&]() -> Vector {
      Vector e1 = Vector::Zero(g.size());
      if (g.size() > 0) e1[0] = 1.0;
      try {
        return leftmost_eigvec(state, spec, e1);
      } catch (const DegenerateProbeError&) {
        return leftmost_eigvec(state, spec, g);  // last probe in the sequence
      }
    };

    if (spec.g_norm == 0.0) {
      if (spec.lambda1 >= 0.0) return finish(Vector::Zero(g.size()), 0.0, StepCase::Interior, 0);
      const Vector u1 = resolve_u1();
      return finish((-spec.lambda1 / sigma) * u1, -spec.lambda1, StepCase::HardCase, 0);
    }

    if (spec.lambda1 < 0.0 && leftmost_mass(spec) <= num_tol) {
      // g has no component on the leftmost eigenspace; inspect the boundary.
      const NormsSq bn = norms_at(spec, -spec.lambda1, num_tol);
      const double sb = std::sqrt(bn.s_sq);
      const double target = pole / sigma;
      if (sb < target) {
        Vector s = recover_step(state, spec, g, -spec.lambda1, num_tol);
        const Vector u1 = resolve_u1();
        const double alpha = hard_case_alpha(s.norm(), spec.lambda1, sigma);
        return finish(Vector(s + alpha * u1), -spec.lambda1, StepCase::HardCase, 0);
      }
      if (sb - target <= tol.nu * std::max(1.0, target)) {
        Vector s = recover_step(state, spec, g, -spec.lambda1, num_tol);
        return finish(std::move(s), -spec.lambda1, StepCase::BoundarySaddle, 0);
      }
      // boundary step long enough: the secular root lies strictly above the
      // pole, fall through to Newton
    }

    const double lam_init = pole + tol.eps_shift;
    if (mode == SolveMode::NormTrick) {
      const SecularResult sec = solve_lambda(spec, sigma, tol.nu, lam_init, tol.max_newton);
      Vector s = recover_step(state, spec, g, sec.lambda, num_tol);
      return finish(std::move(s), sec.lambda, StepCase::Interior, sec.iters);
    }
    NaiveResult naive =
        solve_lambda_naive(state, g, sigma, tol.nu, lam_init, tol.max_newton, pole);
    return finish(std::move(naive.s), naive.lambda, StepCase::Interior, naive.iters);
  } catch (const SingularMatrixError&) {
    return fail(SolveFailure::SingularM);
  } catch (const NotPositiveDefiniteError&) {
    return fail(SolveFailure::NotPositiveDefiniteT);
  } catch (const MaxIterationsError&) {
    return fail(SolveFailure::MaxIterations);
  } catch (const DegenerateProbeError&) {
    return fail(SolveFailure::DegenerateProbe);
  } catch (const DomainError&) {
    return fail(SolveFailure::DomainError);
  }
}

CauchyPoint cauchy_point(const LqnState& state, const Vector& g, double sigma, double f0) {
  if (!(sigma > 0.0)) throw std::invalid_argument("cauchy_point: sigma must be positive");
  const double gn = g.norm();
  if (gn == 0.0) return {Vector::Zero(g.size()), f0};
  const double g_bg = g.dot(state.bmul(g));
  const double a = sigma * gn * gn * gn;
  // positive root of a u^2 + (g.Bg) u - ||g||^2 = 0, stable for small a
  const double disc = std::sqrt(g_bg * g_bg + 4.0 * a * gn * gn);
  const double upsilon = 2.0 * gn * gn / (g_bg + disc);
  CauchyPoint cp;
  cp.s = -upsilon * g;
  const double step_norm = upsilon * gn;
  cp.model = f0 - upsilon * gn * gn + 0.5 * upsilon * upsilon * g_bg +
             sigma / 3.0 * step_norm * step_norm * step_norm;
  return cp;
}

}  // namespace arclqn
