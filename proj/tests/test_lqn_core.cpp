#include <doctest.h>

#include <limits>

#include "arclqn/dense_reference.hpp"
#include "arclqn/lqn_state.hpp"
#include "arclqn/rng.hpp"
#include "arclqn/small_eig.hpp"

using namespace arclqn;

namespace {

Vector unit(int n, int i) {
  Vector e = Vector::Zero(n);
  e[i] = 1.0;
  return e;
}

}  // namespace

TEST_SUITE("lqn_core") {

TEST_CASE("one-pair secant identity") {
  LqnState state(1.0, 3);
  const UpdateOutcome out = state.try_update(unit(2, 0), Vector(2.0 * unit(2, 0)));
  CHECK(out.accepted);
  CHECK(out.reason == UpdateReason::Accepted);
  CHECK((state.bmul(unit(2, 0)) - 2.0 * unit(2, 0)).norm() <= 1e-14);
}

TEST_CASE("zero residual is a curvature skip") {
  LqnState state(1.0, 3);
  const UpdateOutcome out = state.try_update(unit(2, 0), unit(2, 0));  // y = B0 s
  CHECK_FALSE(out.accepted);
  CHECK(out.reason == UpdateReason::CurvatureSkip);
  CHECK(state.count() == 0);
}

TEST_CASE("near-parallel steps trigger a reset") {
  LqnState state(1.0, 3);
  REQUIRE(state.try_update(unit(2, 0), Vector(3.0 * unit(2, 0))).accepted);
  // second step almost parallel to the first
  const Vector s2 = (1.0 + 1e-9) * unit(2, 0);
  const Vector y2 = 5.0 * unit(2, 1);
  // closed-form min eigenvalue of the 2x2 Gram of the (rescaled) steps
  const Vector s2n = s2 / s2.norm();
  const double a = 1.0, c = s2n.squaredNorm(), b = s2n[0];
  const double min_eig = 0.5 * (a + c - std::sqrt((a - c) * (a - c) + 4.0 * b * b));
  REQUIRE(min_eig < 1e-7);

  const UpdateOutcome out = state.try_update(s2, y2, 1e-8, 1e-7);
  CHECK_FALSE(out.accepted);
  CHECK(out.reason == UpdateReason::ResetTriggered);
  CHECK(state.count() == 0);  // k was 2, trim drops oldest and newest
}

TEST_CASE("bmul on the one-pair worked example") {
  LqnState state(1.0, 2);
  REQUIRE(state.try_update(unit(2, 0), Vector(3.0 * unit(2, 0))).accepted);
  Vector v(2);
  v << 1.0, 1.0;
  const Vector bv = state.bmul(v);  // B = I + 2 e1 e1^T
  CHECK(bv[0] == doctest::Approx(3.0));
  CHECK(bv[1] == doctest::Approx(1.0));
}

TEST_CASE("bmul with empty memory is gamma v") {
  LqnState state(2.0, 4);
  Vector v(3);
  v << 1.0, -2.0, 0.5;
  CHECK((state.bmul(v) - 2.0 * v).norm() == 0.0);
}

TEST_CASE("all stored secant equations hold for consistent pairs") {
  Rng rng(99);
  Vector h(10);
  for (int i = 0; i < 10; ++i) h[i] = rng.uniform(-3.0, 6.0);

  LqnState state(1.0, 3);
  while (state.count() < 3) {
    const Vector s = rng.unit_vector(10);
    state.try_update(s, Vector(h.cwiseProduct(s)));
  }
  const Matrix b = dense_from_state(state);
  for (int i = 0; i < 3; ++i) {
    CHECK((state.bmul(state.s(i)) - state.y(i)).norm() <= 1e-8 * std::max(1.0, state.y(i).norm()));
    CHECK((state.bmul(state.s(i)) - b * state.s(i)).norm() <= 1e-8);
  }
}

TEST_CASE("model value examples") {
  LqnState state(1.0, 2);
  Vector g(2), s(2);
  g << 2.0, 0.0;

  s.setZero();
  CHECK(state.model_value(g, 1.0, s, 0.25) == doctest::Approx(0.25));

  s << -1.0, 0.0;  // -g/2
  CHECK(state.model_value(g, 1.0, s, 0.0) == doctest::Approx(-7.0 / 6.0));
}

TEST_CASE("model value is invariant under zero-padding") {
  LqnState a(1.0, 2), b(1.0, 2);
  Vector s1(2), y1(2);
  s1 << 0.6, 0.8;
  y1 << 1.8, 0.8;
  REQUIRE(a.try_update(s1, y1).accepted);
  Vector s1p(3), y1p(3);
  s1p << 0.6, 0.8, 0.0;
  y1p << 1.8, 0.8, 0.0;
  REQUIRE(b.try_update(s1p, y1p).accepted);

  Vector g(2), s(2), gp(3), sp(3);
  g << 1.0, -2.0;
  s << 0.3, 0.4;
  gp << 1.0, -2.0, 0.0;
  sp << 0.3, 0.4, 0.0;
  CHECK(a.model_value(g, 0.7, s, 5.0) == doctest::Approx(b.model_value(gp, 0.7, sp, 5.0)));
}

TEST_CASE("reset_trim keeps the middle pair") {
  Rng rng(4);
  Vector h(6);
  for (int i = 0; i < 6; ++i) h[i] = rng.uniform(0.5, 4.0);
  LqnState state(1.0, 5);
  while (state.count() < 3) {
    const Vector s = rng.unit_vector(6);
    state.try_update(s, Vector(h.cwiseProduct(s)));
  }
  const Vector middle = state.s(1);
  state.reset_trim();
  CHECK(state.count() == 1);
  CHECK((state.s(0) - middle).norm() == 0.0);

  state.reset_trim();  // k = 1 -> 0
  CHECK(state.count() == 0);

  while (state.count() < 2) {
    const Vector s = rng.unit_vector(6);
    state.try_update(s, Vector(h.cwiseProduct(s)));
  }
  state.reset_trim();  // k = 2: both pairs are oldest/newest
  CHECK(state.count() == 0);
}

TEST_CASE("contract violations and degenerate inputs") {
  LqnState state(1.0, 2);
  CHECK_THROWS_AS(state.try_update(Vector::Ones(3), Vector::Ones(2)), std::invalid_argument);
  CHECK_THROWS_AS(LqnState(-1.0, 2), std::invalid_argument);

  Vector bad(2);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  const UpdateOutcome out = state.try_update(bad, Vector::Ones(2));
  CHECK(out.reason == UpdateReason::DegenerateSkip);
}

TEST_CASE("singular M surfaces as SingularMatrixError") {
  // M(gamma) = E - gamma S^T S is singular exactly at the generalized
  // eigenvalues of (E, S^T S); rebuild the state at one of them.
  Rng rng(11);
  Vector h(8);
  for (int i = 0; i < 8; ++i) h[i] = rng.uniform(0.5, 5.0);
  LqnState state(1.0, 3);
  while (state.count() < 3) {
    const Vector s = rng.unit_vector(8);
    state.try_update(s, Vector(h.cwiseProduct(s)));
  }
  const GeneralizedEig crit = generalized_eigh(state.e_matrix(), state.sts());
  state.set_gamma(crit.lambdas[0]);
  CHECK_THROWS_AS(state.bmul(Vector::Ones(8)), SingularMatrixError);
}

TEST_CASE("caches match recomputation after a mixed sequence") {
  Rng rng(7);
  Vector h(9);
  for (int i = 0; i < 9; ++i) h[i] = rng.uniform(-2.0, 5.0);
  LqnState state(1.0, 4);
  for (int op = 0; op < 25; ++op) {
    if (state.count() >= 1 && op % 7 == 6) {
      state.reset_trim();
    } else {
      const Vector s = rng.unit_vector(9);
      state.try_update(s, Vector(h.cwiseProduct(s)));
    }
    const int k = state.count();
    Matrix sts(k, k), sty(k, k), yty(k, k);
    for (int a = 0; a < k; ++a)
      for (int c = 0; c < k; ++c) {
        sts(a, c) = state.s(a).dot(state.s(c));
        sty(a, c) = state.s(a).dot(state.y(c));
        yty(a, c) = state.y(a).dot(state.y(c));
      }
    CHECK((sts - state.sts()).norm() <= 1e-12 * std::max(1.0, sts.norm()));
    CHECK((sty - state.sty()).norm() <= 1e-12 * std::max(1.0, sty.norm()));
    CHECK((yty - state.yty()).norm() <= 1e-12 * std::max(1.0, yty.norm()));
  }
}

TEST_CASE("state depends only on the last m pairs") {
  Rng rng(21);
  Vector h(7);
  for (int i = 0; i < 7; ++i) h[i] = rng.uniform(0.5, 3.0);
  LqnState state(1.0, 2);
  int accepted = 0;
  while (accepted < 4) {
    const Vector s = rng.unit_vector(7);
    if (state.try_update(s, Vector(h.cwiseProduct(s))).accepted) ++accepted;
  }
  REQUIRE(state.count() == 2);

  LqnState rebuilt(1.0, 2);
  for (int i = 0; i < 2; ++i) REQUIRE(rebuilt.try_update(state.s(i), state.y(i)).accepted);
  // re-insertion renormalizes the stored pairs, so equality holds to rounding
  CHECK((state.sts() - rebuilt.sts()).norm() <= 1e-13);
  CHECK((state.sty() - rebuilt.sty()).norm() <= 1e-13 * state.sty().norm());
  const Vector probe = rng.normal_vector(7);
  CHECK((state.bmul(probe) - rebuilt.bmul(probe)).norm() <= 1e-11 * probe.norm());
}

}  // TEST_SUITE
