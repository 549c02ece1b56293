#include <doctest.h>

#include <cmath>

#include "arclqn/arc.hpp"
#include "arclqn/dense_reference.hpp"
#include "arclqn/problems.hpp"
#include "arclqn/rng.hpp"
#include "arclqn/subproblem.hpp"

using namespace arclqn;

namespace {

// Central finite differences of f against the analytic gradient.
void check_gradient(const Problem& p, const Vector& x, double rel_tol = 1e-5) {
  Vector g(p.dim);
  p.full_eval(x, &g);
  Rng rng(2024);
  for (int probe = 0; probe < 5; ++probe) {
    const int i = rng.uniform_int(0, static_cast<int>(p.dim) - 1);
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fd = (p.full_eval(xp) - p.full_eval(xm)) / (2.0 * h);
    CHECK(g[i] == doctest::Approx(fd).epsilon(rel_tol));
  }
}

}  // namespace

TEST_SUITE("problem_suite") {

TEST_CASE("rosenbrock minimizer and gradient") {
  const Problem p = rosenbrock(6);
  const Vector ones = Vector::Ones(6);
  Vector g(6);
  CHECK(p.full_eval(ones, &g) == doctest::Approx(0.0));
  CHECK(g.norm() <= 1e-12);
  check_gradient(p, p.default_start());
}

TEST_CASE("quadratic gradient and one exact step") {
  const Problem p = quadratic(8, 1.0);  // f = ||x||^2 / 2
  check_gradient(p, Vector::Constant(8, 0.7));

  // one ARC step with sigma at a tiny floor solves it to roundoff scale
  ArcConfig cfg;
  cfg.sigma0 = 1e-12;
  cfg.sigma_floor = 1e-12;
  cfg.mu = 0.0;
  cfg.nu = 1e-9;
  cfg.validate();
  Vector x = Vector::Constant(8, 0.5);
  LqnState state(cfg.gamma0, cfg.memory);
  AdamState adam;
  double sigma = cfg.sigma0;
  const StepReport report = arc_step(x, state, sigma, adam, cfg, p, p.full_batch());
  CHECK(report.branch == Branch::Accepted);
  Vector g(8);
  p.full_eval(x, &g);
  CHECK(g.norm() <= 1e-10);
}

TEST_CASE("logistic synthetic gradient check") {
  const Problem p = logistic_synth(12, 64, 5);
  Rng rng(9);
  check_gradient(p, rng.normal_vector(12));
  // batched evaluation averages over the batch
  const std::vector<int> batch{0, 1, 2, 3};
  Vector g(12);
  const double f = p.eval(Vector::Zero(12), batch, &g);
  CHECK(f == doctest::Approx(std::log(2.0)));  // w = 0: log(2) per sample
}

TEST_CASE("generated cases satisfy their kind invariants") {
  const SubproblemCase pd = make_subproblem_case(CaseKind::PositiveDefinite, 20, 4, 1);
  CHECK(implicit_spectrum(pd.state, pd.g).lambda1 > 0.0);

  const SubproblemCase ind = make_subproblem_case(CaseKind::Indefinite, 20, 4, 2);
  const ImplicitSpectrum ind_spec = implicit_spectrum(ind.state, ind.g);
  CHECK(ind_spec.lambda1 < 0.0);
  CHECK(std::abs(ind_spec.g2[0]) > 1e-6 * ind.g.norm());

  const SubproblemCase hard = make_subproblem_case(CaseKind::Hard, 20, 4, 3);
  const ImplicitSpectrum hard_spec = implicit_spectrum(hard.state, hard.g);
  CHECK(hard_spec.lambda1 < 0.0);
  CHECK(std::abs(hard_spec.g2[0]) <= 1e-12 * hard.g.norm());
  const double boundary =
      std::sqrt(norms_at(hard_spec, -hard_spec.lambda1, 1e-10 * hard.g.norm()).s_sq);
  CHECK(boundary < -hard_spec.lambda1 / hard.sigma);
  CHECK(boundary == doctest::Approx(0.5 * -hard_spec.lambda1 / hard.sigma).epsilon(1e-9));
}

TEST_CASE("hard cases round-trip through the solver") {
  const SubproblemCase cs = make_subproblem_case(CaseKind::Hard, 100, 5, 11);
  const SubproblemSolution sol =
      solve_subproblem(cs.state, cs.g, cs.sigma, ToleranceSet::verification());
  REQUIRE_FALSE(sol.failed());
  CHECK(sol.kind == StepCase::HardCase);
  const double target = sol.lambda_star / cs.sigma;
  CHECK(std::abs(sol.s_star.norm() - target) <= 1e-7 * std::max(1.0, target));
}

TEST_CASE("indefinite cases: dense and reduced solvers agree") {
  const SubproblemCase cs = make_subproblem_case(CaseKind::Indefinite, 10, 3, 12);
  const SubproblemSolution sol =
      solve_subproblem(cs.state, cs.g, cs.sigma, ToleranceSet::verification());
  const SubproblemSolution dsol =
      dense_solve_subproblem(dense_from_state(cs.state), cs.g, cs.sigma);
  CHECK(-sol.model_decrease == doctest::Approx(-dsol.model_decrease).epsilon(1e-8));
}

TEST_CASE("generators are bit-reproducible") {
  const SubproblemCase a = make_subproblem_case(CaseKind::Indefinite, 15, 3, 123);
  const SubproblemCase b = make_subproblem_case(CaseKind::Indefinite, 15, 3, 123);
  CHECK((a.g - b.g).norm() == 0.0);
  REQUIRE(a.state.count() == b.state.count());
  for (int i = 0; i < a.state.count(); ++i) {
    CHECK((a.state.s(i) - b.state.s(i)).norm() == 0.0);
    CHECK((a.state.y(i) - b.state.y(i)).norm() == 0.0);
  }
}

TEST_CASE("generator rejects bad parameters") {
  CHECK_THROWS_AS(make_subproblem_case(CaseKind::Hard, 4, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_subproblem_case(CaseKind::Hard, 30, 21, 0), std::invalid_argument);
}

}  // TEST_SUITE
