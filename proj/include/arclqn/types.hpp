#pragma once

#include <Eigen/Core>
#include <stdexcept>

namespace arclqn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Recoverable numerical failures. The outer loop maps all of these onto a
// rejected step (first-order fallback), possibly after trimming the
// quasi-Newton memory. Contract violations (dimension mismatches, bad
// parameters) throw std::invalid_argument instead and are not caught.

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPositiveDefiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MaxIterationsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateProbeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace arclqn
