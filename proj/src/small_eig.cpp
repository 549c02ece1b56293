#include "arclqn/small_eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace arclqn {

namespace {

void check_symmetric(const Matrix& a, const char* who) {
  if (a.rows() != a.cols()) throw std::invalid_argument(std::string(who) + ": matrix not square");
  const double scale = std::max(1e-300, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument(std::string(who) + ": matrix not symmetric");
}

}  // namespace

Matrix cholesky_upper(const Matrix& t, double pivot_tol) {
  check_symmetric(t, "cholesky_upper");
  const Eigen::Index n = t.rows();
  double max_diag = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(t(i, i)));
  if (max_diag == 0.0) max_diag = 1.0;

  Matrix r = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = t(j, j);
    for (Eigen::Index i = 0; i < j; ++i) d -= r(i, j) * r(i, j);
    if (d <= pivot_tol * max_diag)
      throw NotPositiveDefiniteError("cholesky_upper: pivot " + std::to_string(j) + " not positive");
    r(j, j) = std::sqrt(d);
    for (Eigen::Index c = j + 1; c < n; ++c) {
      double s = t(j, c);
      for (Eigen::Index i = 0; i < j; ++i) s -= r(i, j) * r(i, c);
      r(j, c) = s / r(j, j);
    }
  }
  return r;
}

EigResult jacobi_eigh(const Matrix& a_in) {
  check_symmetric(a_in, "jacobi_eigh");
  const Eigen::Index n = a_in.rows();
  Matrix a = 0.5 * (a_in + a_in.transpose());
  Matrix q = Matrix::Identity(n, n);
  if (n == 0) return {q, Vector(0)};

  const double norm_a = std::max(a.norm(), 1e-300);
  const double stop = 1e-14 * norm_a;
  const int max_sweeps = 64;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index r = p + 1; r < n; ++r) off += 2.0 * a(p, r) * a(p, r);
    if (std::sqrt(off) <= stop) break;

    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index r = p + 1; r < n; ++r) {
        const double apr = a(p, r);
        if (apr == 0.0) continue;
        const double tau = (a(r, r) - a(p, p)) / (2.0 * apr);
        const double t = (tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                     : -1.0 / (-tau + std::sqrt(1.0 + tau * tau)));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // A <- J^T A J on rows/columns p and r.
        for (Eigen::Index i = 0; i < n; ++i) {
          const double aip = a(i, p), air = a(i, r);
          a(i, p) = c * aip - s * air;
          a(i, r) = s * aip + c * air;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double api = a(p, i), ari = a(r, i);
          a(p, i) = c * api - s * ari;
          a(r, i) = s * api + c * ari;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double qip = q(i, p), qir = q(i, r);
          q(i, p) = c * qip - s * qir;
          q(i, r) = s * qip + c * qir;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&a](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  EigResult out;
  out.w.resize(n);
  out.q.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.w[j] = a(order[static_cast<size_t>(j)], order[static_cast<size_t>(j)]);
    out.q.col(j) = q.col(order[static_cast<size_t>(j)]);
  }
  return out;
}

GeneralizedEig generalized_eigh(const Matrix& m, const Matrix& t, double pivot_tol) {
  check_symmetric(m, "generalized_eigh");
  const Eigen::Index n = m.rows();
  if (t.rows() != n || t.cols() != n)
    throw std::invalid_argument("generalized_eigh: dimension mismatch");
  if (n == 0) return {Matrix(0, 0), Vector(0)};

  const Matrix r = cholesky_upper(t, pivot_tol);  // T = R^T R

  // C = R^{-T} M R^{-1}; two triangular solves.
  Matrix c = r.transpose().triangularView<Eigen::Lower>().solve(m);
  c = r.transpose().triangularView<Eigen::Lower>().solve(Matrix(c.transpose())).transpose();
  const Matrix c_sym = 0.5 * (c + c.transpose());

  EigResult eig = jacobi_eigh(c_sym);

  GeneralizedEig out;
  out.lambdas = eig.w;
  out.v = r.triangularView<Eigen::Upper>().solve(eig.q);
  return out;
}

}  // namespace arclqn
