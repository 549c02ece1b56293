#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "arclqn/lqn_state.hpp"
#include "arclqn/types.hpp"

namespace arclqn {

// Objective interface: eval maps (point, minibatch index set) to the batch
// loss and, when grad is non-null, its gradient. Batch indices lie in
// [0, dataset_size); deterministic problems use dataset_size == 1.
struct Problem {
  std::string name;
  Eigen::Index dim = 0;
  long dataset_size = 1;
  std::function<double(const Vector& x, const std::vector<int>& batch, Vector* grad)> eval;

  double full_eval(const Vector& x, Vector* grad = nullptr) const;
  std::vector<int> full_batch() const;
  Vector default_start() const;

 private:
  friend Problem rosenbrock(int n);
  friend Problem quadratic(int n, double condition);
  friend Problem logistic_synth(int n_features, long n_samples, std::uint64_t seed);
  Vector start_;
};

// Chained Rosenbrock with analytic gradient; minimizer at the all-ones point.
Problem rosenbrock(int n);

// Convex quadratic 1/2 x^T D x with log-spaced diagonal, cond(D) = condition.
Problem quadratic(int n, double condition);

// Binary logistic regression on synthetic separable-with-noise data;
// minibatch evaluation averages over the batch.
Problem logistic_synth(int n_features, long n_samples, std::uint64_t seed);

enum class CaseKind { Hard, Indefinite, PositiveDefinite };

const char* case_kind_name(CaseKind kind);
bool parse_case_kind(const std::string& text, CaseKind* out);

// One benchmark instance of the regularized quadratic subproblem.
struct SubproblemCase {
  CaseKind kind = CaseKind::PositiveDefinite;
  LqnState state{1.0, 1};
  Vector g;
  double sigma = 1.0;
  std::uint64_t seed = 0;
};

// Builds m pairs by sampling steps on the unit sphere against a hidden
// diagonal Hessian whose spectrum matches the kind (gamma = 1 throughout);
// the Hard kind then projects g off the leftmost eigenvector and rescales it
// so the boundary solution is strictly too short. Reproducible: the same
// (kind, n, m, seed) yields a bit-identical case. Retries on a fresh
// sub-seed (up to 10 times) when curvature skips exhaust the pairs, then
// throws std::runtime_error.
SubproblemCase make_subproblem_case(CaseKind kind, int n, int m, std::uint64_t seed,
                                    double sigma = 1.0);

}  // namespace arclqn
