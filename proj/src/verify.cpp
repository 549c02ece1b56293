#include "arclqn/verify.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "arclqn/dense_reference.hpp"
#include "arclqn/lqn_state.hpp"
#include "arclqn/problems.hpp"
#include "arclqn/rng.hpp"
#include "arclqn/small_eig.hpp"
#include "arclqn/subproblem.hpp"

namespace arclqn::verify {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

void record(CheckResult& res, bool ok, const std::string& why) {
  ++res.checked;
  if (!ok) {
    ++res.failures;
    res.pass = false;
    if (res.detail.empty()) res.detail = why;
  }
}

CaseKind kind_of(int i) {
  switch (i % 3) {
    case 0:
      return CaseKind::PositiveDefinite;
    case 1:
      return CaseKind::Indefinite;
    default:
      return CaseKind::Hard;
  }
}

// Random symmetric matrix with entries O(1); used as the hidden Hessian of
// consistent pair sequences.
Matrix random_symmetric(Rng& rng, int n, double scale) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  return scale * 0.5 * (a + a.transpose());
}

}  // namespace

CheckResult oracle_equivalence(std::uint64_t seed, int instances) {
  CheckResult res;
  res.name = "oracle_equivalence";
  const ToleranceSet tol = ToleranceSet::verification();
  for (int i = 0; i < instances; ++i) {
    Rng rng(mix_seed(seed, 5000u + static_cast<unsigned>(i)));
    const int n = rng.uniform_int(5, 50);
    const int m = rng.uniform_int(1, std::min(5, n - 2));
    SubproblemCase cs;
    try {
      cs = make_subproblem_case(kind_of(i), n, m, mix_seed(seed, static_cast<unsigned>(i)));
    } catch (const std::runtime_error&) {
      record(res, false, "instance generation failed");
      continue;
    }

    const SubproblemSolution sol =
        solve_subproblem(cs.state, cs.g, cs.sigma, tol, SolveMode::NormTrick);
    if (sol.failed()) {
      record(res, false, "reduced solver failed");
      continue;
    }

    const Matrix b = dense_from_state(cs.state);
    const SubproblemSolution dsol = dense_solve_subproblem(b, cs.g, cs.sigma);
    const double m_red = -sol.model_decrease;
    const double m_dense = -dsol.model_decrease;
    bool ok = m_red <= m_dense + 1e-8 * (1.0 + std::abs(m_dense));
    if (ok) {
      const Vector resid = cs.state.bmul(sol.s_star) + sol.lambda_star * sol.s_star + cs.g;
      ok = resid.norm() <= 1e-6 * std::max(1.0, cs.g.norm());
    }
    if (ok && sol.kind != StepCase::HardCase) {
      const double ratio = sol.lambda_star / cs.sigma;
      ok = std::abs(sol.s_star.norm() - ratio) <= tol.nu * std::max(1.0, ratio);
    }
    if (ok) {
      const ImplicitSpectrum spec = implicit_spectrum(cs.state, cs.g);
      ok = sol.lambda_star >= std::max(0.0, -spec.lambda1) - 1e-12 &&
           sol.model_decrease >= 0.0;
    }
    if (ok) {
      const CauchyPoint cp = cauchy_point(cs.state, cs.g, cs.sigma, 0.0);
      ok = m_red <= cp.model + 1e-10 * (1.0 + std::abs(cp.model));
    }
    record(res, ok, fmt("model value %.3e vs dense %.3e", m_red, m_dense));
  }
  return res;
}

CheckResult hard_case_optimality(std::uint64_t seed, int cases) {
  CheckResult res;
  res.name = "hard_case_optimality";
  for (int i = 0; i < cases; ++i) {
    SubproblemCase cs;
    try {
      cs = make_subproblem_case(CaseKind::Hard, 3, 1, mix_seed(seed, 900u + static_cast<unsigned>(i)));
    } catch (const std::runtime_error&) {
      record(res, false, "hard-case generation failed");
      continue;
    }
    const SubproblemSolution sol =
        solve_subproblem(cs.state, cs.g, cs.sigma, ToleranceSet::verification());
    if (sol.failed() || sol.kind != StepCase::HardCase) {
      record(res, false, "expected hard-case classification");
      continue;
    }
    const Matrix b = dense_from_state(cs.state);
    const double radius = 2.0 * sol.s_star.norm() + 1.0;
    const BruteForceResult brute = brute_force_min(b, cs.g, cs.sigma, radius, 100000);
    const double m_star = -sol.model_decrease;
    record(res, m_star <= brute.m_best + 1e-4,
           fmt("hard case m*=%.6e brute=%.6e", m_star, brute.m_best));
  }
  return res;
}

CheckResult cauchy_decrease(std::uint64_t seed, int instances) {
  CheckResult res;
  res.name = "cauchy_decrease";
  for (int i = 0; i < instances; ++i) {
    Rng rng(mix_seed(seed, 5000u + static_cast<unsigned>(i)));
    const int n = rng.uniform_int(5, 50);
    const int m = rng.uniform_int(1, std::min(5, n - 2));
    SubproblemCase cs;
    try {
      cs = make_subproblem_case(kind_of(i), n, m, mix_seed(seed, static_cast<unsigned>(i)));
    } catch (const std::runtime_error&) {
      record(res, false, "instance generation failed");
      continue;
    }
    const SubproblemSolution sol =
        solve_subproblem(cs.state, cs.g, cs.sigma, ToleranceSet::verification());
    if (sol.failed()) {
      record(res, false, "solver failed");
      continue;
    }
    const CauchyPoint cp = cauchy_point(cs.state, cs.g, cs.sigma, 0.0);
    const double m_star = -sol.model_decrease;
    record(res, m_star <= cp.model + 1e-10 * (1.0 + std::abs(cp.model)),
           fmt("m*=%.9e cauchy=%.9e", m_star, cp.model));
  }
  return res;
}

CheckResult newton_fd(std::uint64_t seed, int triples) {
  CheckResult res;
  res.name = "newton_fd";
  for (int i = 0; i < triples; ++i) {
    Rng rng(mix_seed(seed, 7700u + static_cast<unsigned>(i)));
    SubproblemCase cs;
    try {
      cs = make_subproblem_case(kind_of(i), rng.uniform_int(10, 40),
                                rng.uniform_int(1, 5),
                                mix_seed(seed, 7000u + static_cast<unsigned>(i)));
    } catch (const std::runtime_error&) {
      record(res, false, "instance generation failed");
      continue;
    }
    const ImplicitSpectrum spec = implicit_spectrum(cs.state, cs.g);
    const double pole = std::max(0.0, -spec.lambda1);
    const double lam = pole + rng.uniform(0.05, 3.0) * std::max(1.0, std::abs(pole));
    const double sigma = rng.uniform(0.1, 10.0);

    const double delta = newton_step(spec, lam, sigma);
    const double h = 1e-6 * lam;
    const double dphi = (phi1(spec, lam + h, sigma) - phi1(spec, lam - h, sigma)) / (2.0 * h);
    const double expected = -phi1(spec, lam, sigma) / dphi;
    record(res, std::abs(delta - expected) <= 1e-4 * (std::abs(expected) + 1e-12),
           fmt("newton %.9e vs fd %.9e", delta, expected));
  }
  return res;
}

CheckResult sgd_limit(std::uint64_t seed, int instances) {
  CheckResult res;
  res.name = "sgd_limit";
  for (int i = 0; i < instances; ++i) {
    Rng rng(mix_seed(seed, 3000u + static_cast<unsigned>(i)));
    SubproblemCase cs;
    try {
      cs = make_subproblem_case(i % 2 == 0 ? CaseKind::PositiveDefinite : CaseKind::Indefinite,
                                rng.uniform_int(10, 50), rng.uniform_int(1, 5),
                                mix_seed(seed, 3300u + static_cast<unsigned>(i)));
    } catch (const std::runtime_error&) {
      record(res, false, "instance generation failed");
      continue;
    }
    const SubproblemSolution sol =
        solve_subproblem(cs.state, cs.g, 1e9, ToleranceSet::verification());
    if (sol.failed()) {
      record(res, false, "solver failed at sigma=1e9");
      continue;
    }
    const double cosine =
        -sol.s_star.dot(cs.g) / (sol.s_star.norm() * cs.g.norm());
    record(res, cosine >= 0.9999, fmt("cosine %.8f", cosine));
  }
  return res;
}

CheckResult secant_cache(std::uint64_t seed, int sequences) {
  CheckResult res;
  res.name = "secant_cache";
  for (int sq = 0; sq < sequences; ++sq) {
    Rng rng(mix_seed(seed, 100u + static_cast<unsigned>(sq)));
    const int n = rng.uniform_int(5, 30);
    const int m = rng.uniform_int(1, 6);
    const Matrix h = random_symmetric(rng, n, 3.0);
    LqnState state(1.0, m);

    bool ok = true;
    std::string why;
    for (int op = 0; op < 20 && ok; ++op) {
      if (state.count() >= 1 && rng.uniform() < 0.15) {
        state.reset_trim();
      } else {
        const Vector s = rng.unit_vector(n);
        state.try_update(s, Vector(h * s));
      }
      const int k = state.count();
      // recompute the Gram caches from scratch
      Matrix sts(k, k), sty(k, k), yty(k, k);
      for (int a = 0; a < k; ++a) {
        for (int c = 0; c < k; ++c) {
          sts(a, c) = state.s(a).dot(state.s(c));
          sty(a, c) = state.s(a).dot(state.y(c));
          yty(a, c) = state.y(a).dot(state.y(c));
        }
      }
      const double scale = std::max({1.0, sts.norm(), sty.norm(), yty.norm()});
      const double err = std::max({(sts - state.sts()).norm(), (sty - state.sty()).norm(),
                                   (yty - state.yty()).norm()});
      if (err > 1e-12 * scale) {
        ok = false;
        why = fmt("cache drift %.3e", err);
      }
    }

    if (ok && state.count() >= 1) {
      const int k = state.count();
      Matrix bs(n, k), ymat(n, k);
      bool singular = false;
      for (int c = 0; c < k; ++c) {
        ymat.col(c) = state.y(c);
        try {
          bs.col(c) = state.bmul(state.s(c));
        } catch (const SingularMatrixError&) {
          singular = true;
          break;
        }
      }
      if (!singular) {
        const double err = (bs - ymat).norm();
        if (err > 1e-8 * std::max(1.0, ymat.norm())) {
          ok = false;
          why = fmt("secant residual %.3e", err);
        }
      }
    }
    record(res, ok, why);
  }
  return res;
}

CheckResult mode_equivalence(std::uint64_t seed, int instances) {
  CheckResult res;
  res.name = "mode_equivalence";
  const ToleranceSet tol = ToleranceSet::verification();
  for (int i = 0; i < instances; ++i) {
    Rng rng(mix_seed(seed, 1500u + static_cast<unsigned>(i)));
    SubproblemCase cs;
    try {
      cs = make_subproblem_case(kind_of(i), rng.uniform_int(8, 40), rng.uniform_int(1, 5),
                                mix_seed(seed, 1600u + static_cast<unsigned>(i)));
    } catch (const std::runtime_error&) {
      record(res, false, "instance generation failed");
      continue;
    }
    const SubproblemSolution a = solve_subproblem(cs.state, cs.g, cs.sigma, tol, SolveMode::NormTrick);
    const SubproblemSolution b = solve_subproblem(cs.state, cs.g, cs.sigma, tol, SolveMode::NaiveLqn);
    if (a.failed() || b.failed()) {
      record(res, false, "solver failed");
      continue;
    }
    const bool lam_ok =
        std::abs(a.lambda_star - b.lambda_star) <= 1e-8 * std::max(1.0, a.lambda_star);
    const bool step_ok = (a.s_star - b.s_star).norm() <= 1e-8 * std::max(1e-12, a.s_star.norm());
    record(res, lam_ok && step_ok, fmt("mode mismatch dlam=%.3e ds=%.3e",
                                       std::abs(a.lambda_star - b.lambda_star),
                                       (a.s_star - b.s_star).norm()));
  }
  return res;
}

CheckResult phi1_monotonic(std::uint64_t seed, int instances) {
  CheckResult res;
  res.name = "phi1_monotonic";
  for (int i = 0; i < instances; ++i) {
    Rng rng(mix_seed(seed, 2200u + static_cast<unsigned>(i)));
    SubproblemCase cs;
    try {
      cs = make_subproblem_case(kind_of(i), rng.uniform_int(8, 30), rng.uniform_int(1, 5),
                                mix_seed(seed, 2300u + static_cast<unsigned>(i)));
    } catch (const std::runtime_error&) {
      record(res, false, "instance generation failed");
      continue;
    }
    const ImplicitSpectrum spec = implicit_spectrum(cs.state, cs.g);
    const double pole = std::max(0.0, -spec.lambda1);
    const double scale = std::max(1.0, std::abs(pole));
    bool ok = true;
    double prev = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < 30; ++j) {
      const double lam = pole + scale * (0.02 + 0.25 * j);
      const double value = phi1(spec, lam, cs.sigma);
      if (!(value > prev)) {
        ok = false;
        break;
      }
      prev = value;
    }
    record(res, ok, "phi1 not strictly increasing");
  }
  return res;
}

CheckResult small_eig_random(std::uint64_t seed, int instances) {
  CheckResult res;
  res.name = "small_eig";
  for (int i = 0; i < instances; ++i) {
    Rng rng(mix_seed(seed, 4200u + static_cast<unsigned>(i)));
    const int k = rng.uniform_int(1, 10);
    Matrix a(k, k);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) a(r, c) = rng.normal();
    const Matrix t = a * a.transpose() + 0.1 * Matrix::Identity(k, k);
    const Matrix m = random_symmetric(rng, k, 2.0);

    bool ok = true;
    std::string why;

    const EigResult eig = jacobi_eigh(m);
    const double jres = (m * eig.q - eig.q * eig.w.asDiagonal().toDenseMatrix()).norm();
    if (jres > 1e-10 * std::max(1.0, m.norm())) {
      ok = false;
      why = fmt("jacobi residual %.3e", jres);
    }
    if (ok && (eig.q.transpose() * eig.q - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-12) {
      ok = false;
      why = "jacobi Q not orthogonal";
    }

    if (ok) {
      const GeneralizedEig geig = generalized_eigh(m, t);
      const double gres =
          (m * geig.v - t * geig.v * geig.lambdas.asDiagonal().toDenseMatrix()).norm();
      if (gres > 1e-9 * (m.norm() + t.norm())) {
        ok = false;
        why = fmt("generalized residual %.3e", gres);
      }
      if (ok &&
          (geig.v.transpose() * t * geig.v - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() >
              1e-10) {
        ok = false;
        why = "V not T-orthonormal";
      }
      if (ok && !std::is_sorted(geig.lambdas.begin(), geig.lambdas.end())) {
        ok = false;
        why = "eigenvalues not ascending";
      }
    }

    // congruence invariance of the generalized spectrum on 3x3 blocks
    if (ok && k >= 3) {
      const Matrix m3 = m.topLeftCorner(3, 3);
      const Matrix t3 = t.topLeftCorner(3, 3);
      Matrix cmat(3, 3);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) cmat(r, c) = rng.normal();
      cmat += 3.0 * Matrix::Identity(3, 3);  // keep it comfortably nonsingular
      const GeneralizedEig base = generalized_eigh(m3, t3);
      const GeneralizedEig cong = generalized_eigh(
          Matrix(cmat.transpose() * m3 * cmat), Matrix(cmat.transpose() * t3 * cmat));
      if ((base.lambdas - cong.lambdas).cwiseAbs().maxCoeff() >
          1e-8 * std::max(1.0, base.lambdas.cwiseAbs().maxCoeff())) {
        ok = false;
        why = "congruence changed the generalized spectrum";
      }
    }
    record(res, ok, why);
  }
  return res;
}

CheckResult eviction(std::uint64_t seed, int sequences) {
  CheckResult res;
  res.name = "eviction";
  for (int sq = 0; sq < sequences; ++sq) {
    Rng rng(mix_seed(seed, 6100u + static_cast<unsigned>(sq)));
    const int n = rng.uniform_int(6, 20);
    const int m = rng.uniform_int(1, 4);
    const Matrix h = random_symmetric(rng, n, 2.0);
    LqnState state(1.0, m);

    int accepted = 0;
    const int want = m + rng.uniform_int(1, 3);
    for (int tries = 0; accepted < want && tries < 6 * want; ++tries) {
      const Vector s = rng.unit_vector(n);
      if (state.try_update(s, Vector(h * s)).accepted) ++accepted;
    }
    if (accepted < want || state.count() != m) {
      record(res, false, "could not assemble sequence");
      continue;
    }

    LqnState rebuilt(1.0, m);
    bool ok = true;
    for (int i = 0; i < m; ++i)
      if (!rebuilt.try_update(state.s(i), state.y(i)).accepted) ok = false;

    if (ok) {
      // re-inserting a stored pair renormalizes it again (norm 1 +- eps), so
      // the rebuild agrees to rounding, not bitwise
      const double scale = std::max(1.0, state.yty().norm());
      const double cache_err = std::max({(state.sts() - rebuilt.sts()).norm(),
                                         (state.sty() - rebuilt.sty()).norm(),
                                         (state.yty() - rebuilt.yty()).norm()});
      const Vector probe = rng.normal_vector(n);
      const double apply_err = (state.bmul(probe) - rebuilt.bmul(probe)).norm();
      ok = cache_err <= 1e-12 * scale && apply_err <= 1e-10 * std::max(1.0, probe.norm());
      record(res, ok, fmt("eviction mismatch cache=%.3e apply=%.3e", cache_err, apply_err));
    } else {
      record(res, false, "rebuild rejected a stored pair");
    }
  }
  return res;
}

CheckResult gamma_instability(std::uint64_t seed) {
  CheckResult res;
  res.name = "gamma_instability";
  const int n = 20, m = 4;
  Rng rng(mix_seed(seed, 8600u));
  Vector h(n);
  for (int i = 0; i < n; ++i) h[i] = rng.uniform(0.5, 8.0);

  std::vector<Vector> ss, ys;
  LqnState probe_state(1.0, m);
  while (probe_state.count() < m) {
    const Vector s = rng.unit_vector(n);
    const Vector y = h.cwiseProduct(s);
    if (probe_state.try_update(s, y).accepted) {
      ss.push_back(probe_state.s(probe_state.count() - 1));
      ys.push_back(probe_state.y(probe_state.count() - 1));
    }
  }

  // critical gamma: smallest eigenvalue of E u = lam S^T S u
  const GeneralizedEig crit = generalized_eigh(probe_state.e_matrix(), probe_state.sts());
  const double lam_hat_crit = crit.lambdas[0];
  record(res, lam_hat_crit > 0.0, "critical gamma not positive");
  if (!res.pass) return res;

  const auto rebuild = [&](double gamma) {
    LqnState st(gamma, m);
    for (int i = 0; i < m; ++i) st.try_update(ss[static_cast<size_t>(i)], ys[static_cast<size_t>(i)]);
    return st;
  };

  const Vector g = rng.unit_vector(n);

  const LqnState below = rebuild(0.5 * lam_hat_crit);
  if (below.count() == m) {
    const ImplicitSpectrum spec = implicit_spectrum(below, g);
    record(res, spec.lambda1 > 0.0, fmt("B not PD below critical gamma (lambda1=%.3e)", spec.lambda1));
  } else {
    record(res, false, "pairs rejected below critical gamma");
  }

  const LqnState above = rebuild(lam_hat_crit * (1.0 + 1e-8));
  if (above.count() == m) {
    const ImplicitSpectrum spec = implicit_spectrum(above, g);
    record(res, spec.lambda1 < -1e3, fmt("lambda1=%.3e not << 0 just above critical gamma", spec.lambda1));
  } else {
    record(res, false, "pairs rejected above critical gamma");
  }
  return res;
}

CheckResult tiny_global(std::uint64_t seed, int instances) {
  CheckResult res;
  res.name = "tiny_global";
  for (int i = 0; i < instances; ++i) {
    Rng rng(mix_seed(seed, 9300u + static_cast<unsigned>(i)));
    const int n = 2 + (i % 2);
    const int m = 1;
    Vector h(n);
    for (int j = 0; j < n; ++j) h[j] = rng.uniform(-4.0, 8.0);

    LqnState state(1.0, m);
    for (int tries = 0; state.count() < m && tries < 20; ++tries) {
      const Vector s = rng.unit_vector(n);
      state.try_update(s, Vector(h.cwiseProduct(s)));
    }
    if (state.count() != m) {
      record(res, false, "pair assembly failed");
      continue;
    }
    const Vector g = rng.normal_vector(n);
    const double sigma = rng.uniform(0.5, 2.0);
    const SubproblemSolution sol =
        solve_subproblem(state, g, sigma, ToleranceSet::verification());
    if (sol.failed()) {
      record(res, false, "solver failed");
      continue;
    }
    const Matrix b = dense_from_state(state);
    const double radius = 2.0 * sol.lambda_star / sigma + 1.0;
    const BruteForceResult brute = brute_force_min(b, g, sigma, radius, 100000);
    const double m_star = -sol.model_decrease;
    record(res, m_star <= brute.m_best + 1e-10 * (1.0 + std::abs(brute.m_best)),
           fmt("m*=%.9e sampled=%.9e", m_star, brute.m_best));
  }
  return res;
}

CheckResult spectrum_dense_match(std::uint64_t seed, int instances) {
  CheckResult res;
  res.name = "spectrum_dense_match";
  for (int i = 0; i < instances; ++i) {
    SubproblemCase cs;
    try {
      cs = make_subproblem_case(kind_of(i), 30, 4, mix_seed(seed, 9900u + static_cast<unsigned>(i)));
    } catch (const std::runtime_error&) {
      record(res, false, "instance generation failed");
      continue;
    }
    const ImplicitSpectrum spec = implicit_spectrum(cs.state, cs.g);
    const Matrix b = dense_from_state(cs.state);
    Eigen::SelfAdjointEigenSolver<Matrix> es(b);

    std::vector<double> implied;
    for (Eigen::Index j = 0; j < 30 - spec.lam_hat.size(); ++j) implied.push_back(spec.gamma);
    for (Eigen::Index j = 0; j < spec.lam_hat.size(); ++j) implied.push_back(spec.lam_hat[j]);
    std::sort(implied.begin(), implied.end());

    double err = 0.0;
    for (int j = 0; j < 30; ++j)
      err = std::max(err, std::abs(implied[static_cast<size_t>(j)] - es.eigenvalues()[j]));
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    record(res, err <= 1e-8 * scale, fmt("spectrum error %.3e", err));
  }
  return res;
}

std::vector<CheckResult> run_all(std::uint64_t seed, int instances, const std::string& only) {
  const std::vector<std::pair<std::string, std::function<CheckResult()>>> checks{
      {"oracle_equivalence", [&] { return oracle_equivalence(seed, instances); }},
      {"cauchy_decrease", [&] { return cauchy_decrease(seed, instances); }},
      {"hard_case_optimality", [&] { return hard_case_optimality(seed, 50); }},
      {"newton_fd", [&] { return newton_fd(seed, 100); }},
      {"sgd_limit", [&] { return sgd_limit(seed, 100); }},
      {"secant_cache", [&] { return secant_cache(seed, 200); }},
      {"mode_equivalence", [&] { return mode_equivalence(seed, 100); }},
      {"phi1_monotonic", [&] { return phi1_monotonic(seed, 50); }},
      {"small_eig", [&] { return small_eig_random(seed, 100); }},
      {"eviction", [&] { return eviction(seed, 100); }},
      {"gamma_instability", [&] { return gamma_instability(seed); }},
      {"tiny_global", [&] { return tiny_global(seed, 50); }},
      {"spectrum_dense_match", [&] { return spectrum_dense_match(seed, 50); }},
  };
  std::vector<CheckResult> out;
  for (const auto& [name, check] : checks) {
    if (!only.empty() && name.find(only) == std::string::npos) continue;
    out.push_back(check());
  }
  return out;
}

}  // namespace arclqn::verify
