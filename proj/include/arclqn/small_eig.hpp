#pragma once

#include "arclqn/types.hpp"

namespace arclqn {

// Self-contained dense factorizations for the small (k x k, k <= ~64)
// matrices arising from limited-memory Gram caches. All routines are
// deterministic for fixed inputs.

struct EigResult {
  Matrix q;  // orthogonal, columns are eigenvectors
  Vector w;  // eigenvalues, ascending
};

struct GeneralizedEig {
  Matrix v;        // eigenvectors, T-orthonormal: v^T T v = I
  Vector lambdas;  // generalized eigenvalues, ascending
};

// Upper-triangular R with T = R^T R. Throws NotPositiveDefiniteError when a
// pivot falls below pivot_tol * max|diag(T)|; callers treat that as rank
// deficiency and trim the quasi-Newton memory.
Matrix cholesky_upper(const Matrix& t, double pivot_tol = 1e-12);

// Cyclic Jacobi. Sweeps until the off-diagonal Frobenius norm is below
// 1e-14 * ||A||_F; always converges for symmetric input.
EigResult jacobi_eigh(const Matrix& a);

// M v = lambda T v for symmetric M and s.p.d. T, reduced to a standard
// problem through the Cholesky factor of T.
GeneralizedEig generalized_eigh(const Matrix& m, const Matrix& t,
                                double pivot_tol = 1e-12);

}  // namespace arclqn
