#include <doctest.h>

#include <cmath>

#include "arclqn/dense_reference.hpp"
#include "arclqn/problems.hpp"
#include "arclqn/rng.hpp"

using namespace arclqn;

TEST_SUITE("dense_reference") {

TEST_CASE("sr1 update on the identity") {
  Matrix b = Matrix::Identity(2, 2);
  Vector s(2), y(2);
  s << 1.0, 0.0;
  y << 2.0, 0.0;
  const UpdateOutcome out = dense_sr1_update(b, s, y);
  CHECK(out.accepted);
  CHECK(b(0, 0) == doctest::Approx(2.0));
  CHECK(b(1, 1) == doctest::Approx(1.0));
  CHECK(b(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("sr1 update skips a zero residual") {
  Matrix b = Matrix::Identity(2, 2);
  Vector s(2);
  s << 1.0, 0.0;
  const UpdateOutcome out = dense_sr1_update(b, s, s);  // y = B s
  CHECK_FALSE(out.accepted);
  CHECK(out.reason == UpdateReason::CurvatureSkip);
}

TEST_CASE("dense replay reproduces the compact operator") {
  Rng rng(13);
  Vector h(12);
  for (int i = 0; i < 12; ++i) h[i] = rng.uniform(-3.0, 6.0);
  LqnState state(1.0, 4);
  while (state.count() < 4) {
    const Vector s = rng.unit_vector(12);
    state.try_update(s, Vector(h.cwiseProduct(s)));
  }
  const Matrix b = dense_from_state(state);
  for (int trial = 0; trial < 4; ++trial) {
    const Vector v = rng.normal_vector(12);
    CHECK((state.bmul(v) - b * v).norm() <= 1e-8 * std::max(1.0, v.norm()));
  }
}

TEST_CASE("dense solver on the textbook hard case") {
  Matrix b = Matrix::Zero(2, 2);
  b(0, 0) = -2.0;
  b(1, 1) = 1.0;
  Vector g(2);
  g << 0.0, 3.0;
  const SubproblemSolution sol = dense_solve_subproblem(b, g, 1.0);
  REQUIRE_FALSE(sol.failed());
  CHECK(sol.kind == StepCase::HardCase);
  CHECK(sol.lambda_star == doctest::Approx(2.0));
  CHECK(std::abs(sol.s_star[0]) == doctest::Approx(std::sqrt(3.0)));
  CHECK(sol.s_star[1] == doctest::Approx(-1.0));
}

TEST_CASE("dense solver on a simple interior case") {
  const Matrix b = Matrix::Identity(2, 2);
  Vector g(2);
  g << 2.0, 0.0;
  const SubproblemSolution sol = dense_solve_subproblem(b, g, 1.0);
  REQUIRE_FALSE(sol.failed());
  CHECK(sol.lambda_star == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.s_star[0] == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("brute force agrees with the analytic optimum") {
  const Matrix b = Matrix::Identity(2, 2);
  Vector g(2);
  g << 2.0, 0.0;
  const BruteForceResult brute = brute_force_min(b, g, 1.0, 3.0, 100000);
  CHECK(brute.m_best == doctest::Approx(-7.0 / 6.0).epsilon(1e-4));
}

TEST_CASE("brute force with zero gradient on a psd model") {
  Matrix b(2, 2);
  b << 2.0, 0.3, 0.3, 1.0;
  const BruteForceResult brute = brute_force_min(b, Vector::Zero(2), 1.0, 2.0, 20000, 0.7);
  CHECK(brute.s_best.norm() <= 1e-4);
  CHECK(brute.m_best == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("brute force confirms the dense hard-case value") {
  Matrix b = Matrix::Zero(2, 2);
  b(0, 0) = -2.0;
  b(1, 1) = 1.0;
  Vector g(2);
  g << 0.0, 3.0;
  const SubproblemSolution sol = dense_solve_subproblem(b, g, 1.0);
  const BruteForceResult brute = brute_force_min(b, g, 1.0, 4.0, 100000);
  CHECK(-sol.model_decrease <= brute.m_best + 1e-4);
  CHECK(std::abs(-sol.model_decrease - brute.m_best) <= 1e-4);
}

TEST_CASE("dense solver self-consistency on generated instances") {
  for (int i = 0; i < 10; ++i) {
    const CaseKind kind = i % 2 == 0 ? CaseKind::PositiveDefinite : CaseKind::Indefinite;
    const SubproblemCase cs = make_subproblem_case(kind, 10, 2, 60 + static_cast<unsigned>(i));
    const Matrix b = dense_from_state(cs.state);
    const SubproblemSolution sol = dense_solve_subproblem(b, cs.g, cs.sigma);
    REQUIRE_FALSE(sol.failed());
    CHECK((b * sol.s_star + sol.lambda_star * sol.s_star + cs.g).norm() <=
          1e-6 * std::max(1.0, cs.g.norm()));
    const double ratio = sol.lambda_star / cs.sigma;
    CHECK(std::abs(sol.s_star.norm() - ratio) <= 1e-7 * std::max(1.0, ratio));
  }
}

}  // TEST_SUITE
