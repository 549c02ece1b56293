#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace arclqn::verify {

struct CheckResult {
  std::string name;
  bool pass = true;
  long checked = 0;
  long failures = 0;
  std::string detail;  // first failure, or summary numbers
};

// Reduced vs dense solver on seeded random instances of all three kinds,
// including KKT residuals and the Cauchy-decrease bound.
CheckResult oracle_equivalence(std::uint64_t seed, int instances);

// Generated low-dimensional hard cases against the sampling minimizer.
CheckResult hard_case_optimality(std::uint64_t seed, int cases);

// m(s*) <= m(cauchy point) on the oracle-equivalence instance stream.
CheckResult cauchy_decrease(std::uint64_t seed, int instances);

// Newton correction vs central-difference -phi1/phi1'.
CheckResult newton_fd(std::uint64_t seed, int triples);

// cosine(s*, -g) at sigma = 1e9.
CheckResult sgd_limit(std::uint64_t seed, int instances);

// Incremental Gram caches vs recomputation and the secant property over
// random update/trim sequences with consistent (y = H s) data.
CheckResult secant_cache(std::uint64_t seed, int sequences);

// NormTrick vs NaiveLqn: same multiplier and step.
CheckResult mode_equivalence(std::uint64_t seed, int instances);

// phi1 strictly increasing right of the pole.
CheckResult phi1_monotonic(std::uint64_t seed, int instances);

// Residual / orthogonality / congruence-invariance properties of the small
// factorizations.
CheckResult small_eig_random(std::uint64_t seed, int instances);

// State after m+1 accepted updates equals the state rebuilt from the last m
// stored pairs.
CheckResult eviction(std::uint64_t seed, int sequences);

// gamma slightly above the critical generalized eigenvalue of (E, S^T S)
// drives lambda_1(B) below -1e3; gamma below it keeps B positive definite.
CheckResult gamma_instability(std::uint64_t seed);

// Global optimality on 2- and 3-dimensional instances against ball sampling.
CheckResult tiny_global(std::uint64_t seed, int instances);

// Implied spectrum {gamma x (n-k)} u {lam_hat} vs the dense eigenvalues.
CheckResult spectrum_dense_match(std::uint64_t seed, int instances);

// Every battery above; `only` filters by substring of the check name,
// `instances` scales the oracle-equivalence battery (others use fixed
// counts).
std::vector<CheckResult> run_all(std::uint64_t seed, int instances,
                                 const std::string& only = "");

}  // namespace arclqn::verify
