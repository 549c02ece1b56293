#include "arclqn/dense_reference.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace arclqn {

namespace {

// Radical-inverse (van der Corput) in the given base; drives the Halton
// sampling of brute_force_min.
double radical_inverse(long i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

Vector halton_ball_point(long i, int n, double radius) {
  // Uniform in the n-ball, n <= 3.
  const double u0 = radical_inverse(i + 1, 2);
  const double u1 = radical_inverse(i + 1, 3);
  const double u2 = radical_inverse(i + 1, 5);
  Vector s(n);
  if (n == 1) {
    s[0] = radius * (2.0 * u0 - 1.0);
  } else if (n == 2) {
    const double r = radius * std::sqrt(u0);
    const double phi = 2.0 * M_PI * u1;
    s[0] = r * std::cos(phi);
    s[1] = r * std::sin(phi);
  } else {
    const double r = radius * std::cbrt(u0);
    const double z = 1.0 - 2.0 * u1;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * M_PI * u2;
    s[0] = r * rho * std::cos(phi);
    s[1] = r * rho * std::sin(phi);
    s[2] = r * z;
  }
  return s;
}

}  // namespace

double dense_model_value(const Matrix& b, const Vector& g, double sigma,
                         const Vector& s, double f0) {
  const double sn = s.norm();
  return f0 + g.dot(s) + 0.5 * s.dot(b * s) + sigma / 3.0 * sn * sn * sn;
}

UpdateOutcome dense_sr1_update(Matrix& b, const Vector& s, const Vector& y, double eps_curv) {
  if (s.size() != y.size() || s.size() != b.rows())
    throw std::invalid_argument("dense_sr1_update: dimension mismatch");
  if (!s.allFinite() || !y.allFinite()) return {false, UpdateReason::DegenerateSkip};
  const Vector r = y - b * s;
  const double rn = r.norm();
  if (rn == 0.0 || std::abs(s.dot(r)) <= eps_curv * s.norm() * rn)
    return {false, UpdateReason::CurvatureSkip};
  b += (r * r.transpose()) / s.dot(r);
  return {true, UpdateReason::Accepted};
}

Matrix dense_from_state(const LqnState& state) {
  const Eigen::Index n = state.dim();
  Matrix b = state.gamma() * Matrix::Identity(n, n);
  for (int i = 0; i < state.count(); ++i) dense_sr1_update(b, state.s(i), state.y(i));
  return b;
}

namespace {

struct DenseSecular {
  // Full spectrum of B: theta ascending, columns of q the eigenvectors.
  Vector theta;
  Matrix q;
  Vector ghat;  // q^T g
  double num_tol = 0.0;

  double s_norm_sq(double lam) const {
    const double floor_den = 1e-12 * std::max(1.0, std::abs(lam));
    double out = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double den = theta[i] + lam;
      if (den > floor_den) {
        out += ghat[i] * ghat[i] / (den * den);
      } else if (std::abs(ghat[i]) > num_tol) {
        throw DomainError("dense secular: vanishing denominator with nonzero numerator");
      }
    }
    return out;
  }

  Vector recover(double lam) const {
    const double floor_den = 1e-12 * std::max(1.0, std::abs(lam));
    Vector coef(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double den = theta[i] + lam;
      coef[i] = den > floor_den ? -ghat[i] / den : 0.0;
    }
    return q * coef;
  }
};

// Bracketing bisection on psi(lam) = sigma ||s(lam)|| - lam, strictly
// decreasing on (pole, inf). Deliberately independent of the Newton
// machinery it is used to cross-check.
double dense_secular_root(const DenseSecular& ds, double sigma, double pole, int* iters) {
  double step = std::max(1.0, std::abs(pole));
  double hi = pole + step;
  const auto psi = [&](double lam) { return sigma * std::sqrt(ds.s_norm_sq(lam)) - lam; };
  int count = 0;
  while (psi(hi) > 0.0 && count < 400) {
    hi = pole + (hi - pole) * 2.0;
    ++count;
  }
  double lo = pole;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval at rounding resolution
    ++count;
    double val;
    try {
      val = psi(mid);
    } catch (const DomainError&) {
      lo = mid;  // below the effective pole
      continue;
    }
    if (val > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  if (iters) *iters = count;
  return hi;
}

SubproblemSolution finish_dense(const Matrix& b, const Vector& g, double sigma,
                                Vector s, double lam, StepCase kind, int iters) {
  SubproblemSolution out;
  out.s_star = std::move(s);
  out.lambda_star = lam;
  out.kind = kind;
  out.newton_iters = iters;
  out.model_decrease = -(dense_model_value(b, g, sigma, out.s_star, 0.0));
  return out;
}

SubproblemSolution dense_solve_eig(const Matrix& b, const Vector& g, double sigma,
                                   const DenseSolveOptions& opt) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(b);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dense_solve_subproblem: eigendecomposition failed");

  DenseSecular ds;
  ds.theta = es.eigenvalues();
  ds.q = es.eigenvectors();
  ds.ghat = ds.q.transpose() * g;
  const double gnorm = g.norm();
  ds.num_tol = opt.eps_hard * gnorm;

  const double lam1 = ds.theta[0];
  const double pole = std::max(0.0, -lam1);
  const double tie = 1e-10 * std::max(1.0, std::abs(lam1));

  if (gnorm == 0.0) {
    if (lam1 >= 0.0)
      return finish_dense(b, g, sigma, Vector::Zero(g.size()), 0.0, StepCase::Interior, 0);
    return finish_dense(b, g, sigma, Vector((-lam1 / sigma) * ds.q.col(0)), -lam1,
                        StepCase::HardCase, 0);
  }

  if (lam1 < 0.0) {
    double mass_sq = 0.0;
    for (Eigen::Index i = 0; i < ds.theta.size() && ds.theta[i] <= lam1 + tie; ++i)
      mass_sq += ds.ghat[i] * ds.ghat[i];
    if (std::sqrt(mass_sq) <= ds.num_tol) {
      const double sb = std::sqrt(ds.s_norm_sq(-lam1));
      const double target = pole / sigma;
      if (sb < target) {
        Vector s = ds.recover(-lam1);
        const double alpha = std::sqrt(std::max(0.0, target * target - s.squaredNorm()));
        return finish_dense(b, g, sigma, Vector(s + alpha * ds.q.col(0)), -lam1,
                            StepCase::HardCase, 0);
      }
      if (sb - target <= opt.nu * std::max(1.0, target))
        return finish_dense(b, g, sigma, ds.recover(-lam1), -lam1, StepCase::BoundarySaddle, 0);
    }
  }

  int iters = 0;
  const double lam = dense_secular_root(ds, sigma, pole, &iters);
  return finish_dense(b, g, sigma, ds.recover(lam), lam, StepCase::Interior, iters);
}

}  // namespace

SubproblemSolution dense_solve_subproblem(const Matrix& b, const Vector& g, double sigma,
                                          const DenseSolveOptions& opt) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("dense_solve_subproblem: sigma must be positive");
  if (b.rows() != b.cols() || b.rows() != g.size())
    throw std::invalid_argument("dense_solve_subproblem: dimension mismatch");

  if (g.norm() == 0.0) return dense_solve_eig(b, g, sigma, opt);

  // Cholesky-per-iteration Newton; any indefinite factorization or breakdown
  // defers to the eigendecomposition path.
  const Eigen::Index n = b.rows();
  double lam = opt.eps_shift;
  Matrix work(n, n);
  Eigen::LLT<Matrix> llt;
  for (int iters = 0; iters < opt.max_newton; ++iters) {
    work = b;
    work.diagonal().array() += lam;
    llt.compute(work);
    if (llt.info() != Eigen::Success) return dense_solve_eig(b, g, sigma, opt);
    const Vector s = llt.solve(-g);
    const double sn = s.norm();
    if (sn == 0.0) return dense_solve_eig(b, g, sigma, opt);
    const Vector w = llt.matrixL().solve(s);
    const double wsq = w.squaredNorm();
    const double ratio = lam / sigma;
    const double ref = std::max(1.0, ratio);
    const double gap = sn - ratio;
    if (std::abs(gap) < opt.nu * ref)
      return finish_dense(b, g, sigma, s, lam, StepCase::Interior, iters);
    const double dlam = lam * gap / (sn + ratio * (lam * wsq / (sn * sn)));
    double next = lam + dlam;
    if (!std::isfinite(next)) return dense_solve_eig(b, g, sigma, opt);
    if (next <= 0.0) next = 0.5 * lam;
    lam = next;
  }
  return dense_solve_eig(b, g, sigma, opt);
}

BruteForceResult brute_force_min(const Matrix& b, const Vector& g, double sigma,
                                 double radius, long samples, double f0) {
  const int n = static_cast<int>(b.rows());
  if (n < 1 || n > 3) throw std::invalid_argument("brute_force_min: n must be 1..3");

  BruteForceResult best;
  best.s_best = Vector::Zero(n);
  best.m_best = dense_model_value(b, g, sigma, best.s_best, f0);
  for (long i = 0; i < samples; ++i) {
    const Vector s = halton_ball_point(i, n, radius);
    const double m = dense_model_value(b, g, sigma, s, f0);
    if (m < best.m_best) {
      best.m_best = m;
      best.s_best = s;
    }
  }

  // Coordinate-descent polish with a shrinking step.
  double h = radius / 8.0;
  Vector s = best.s_best;
  while (h > 1e-10 * std::max(1.0, radius)) {
    bool improved = false;
    for (int c = 0; c < n; ++c) {
      for (const double d : {h, -h}) {
        Vector trial = s;
        trial[c] += d;
        const double m = dense_model_value(b, g, sigma, trial, f0);
        if (m < best.m_best) {
          best.m_best = m;
          s = trial;
          improved = true;
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  best.s_best = s;
  return best;
}

}  // namespace arclqn
