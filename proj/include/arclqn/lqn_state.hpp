#pragma once

#include <vector>

#include "arclqn/types.hpp"

namespace arclqn {

enum class UpdateReason { Accepted, CurvatureSkip, DegenerateSkip, ResetTriggered };

struct UpdateOutcome {
  bool accepted = false;
  UpdateReason reason = UpdateReason::CurvatureSkip;
};

// Limited-memory SR1 state in compact form,
//
//   B = gamma I + Psi M^{-1} Psi^T,   Psi = Y - gamma S,
//   M = E - gamma S^T S,              E = symmetrized tril of S^T Y,
//
// with the Gram matrices S^T S, S^T Y and Y^T Y maintained incrementally
// (one row and column touched per update) so that T = Psi^T Psi and M are
// available without an O(n) pass. Pairs are stored oldest-first; when the
// memory is full the oldest pair is evicted.
//
// States are plain values: copyable, movable, single writer at a time.
class LqnState {
 public:
  LqnState(double gamma, int memory);

  double gamma() const { return gamma_; }
  // Rescales B0 = gamma I under the existing pairs. Caches are unaffected
  // (they only involve S and Y).
  void set_gamma(double gamma);

  int memory() const { return memory_; }
  int count() const { return static_cast<int>(s_.size()); }
  // 0 while no pair is stored.
  Eigen::Index dim() const { return s_.empty() ? 0 : s_.front().size(); }

  // Rescales (s, y) by 1/max(||s||, kappa), checks the SR1 curvature
  // condition |s.r| > eps_curv ||s|| ||r|| with r = y - B s, and appends the
  // pair, evicting the oldest one at capacity. If afterwards
  // min eig(S^T S) < kappa the memory is trimmed (reset_trim) and the update
  // reports ResetTriggered.
  UpdateOutcome try_update(const Vector& s, const Vector& y,
                           double eps_curv = kDefaultEpsCurv,
                           double kappa = kDefaultKappa);

  // B v in O(mn + m^3). M is factored (pivoted LU) on each call and never
  // inverted explicitly. Throws SingularMatrixError when M is numerically
  // singular.
  Vector bmul(const Vector& v) const;

  // m(s) = f0 + s.g + 1/2 s.Bs + sigma/3 ||s||^3
  double model_value(const Vector& g, double sigma, const Vector& s, double f0) const;

  // Drops the oldest and the newest stored pair (the single pair when
  // k == 1); caches shrink consistently.
  void reset_trim();

  const Vector& s(int i) const { return s_[static_cast<size_t>(i)]; }
  const Vector& y(int i) const { return y_[static_cast<size_t>(i)]; }
  const Matrix& sts() const { return sts_; }
  const Matrix& sty() const { return sty_; }
  const Matrix& yty() const { return yty_; }

  // E = tril(S^T Y) + tril(S^T Y, -1)^T  (gamma-independent).
  Matrix e_matrix() const;
  // M = E - gamma S^T S
  Matrix m_matrix() const;
  // T = Psi^T Psi = Y^T Y - gamma (S^T Y + Y^T S) + gamma^2 S^T S, from the
  // caches alone.
  Matrix psi_gram() const;

  // Psi^T v and Psi c, both O(mn).
  Vector psi_tmul(const Vector& v) const;
  Vector psi_mul(const Vector& coeffs) const;

  static constexpr double kDefaultEpsCurv = 1e-8;
  static constexpr double kDefaultKappa = 1e-7;

 private:
  void append_pair(const Vector& s, const Vector& y);
  void evict_oldest();

  double gamma_;
  int memory_;
  std::vector<Vector> s_;
  std::vector<Vector> y_;
  Matrix sts_{0, 0};
  Matrix sty_{0, 0};
  Matrix yty_{0, 0};
};

}  // namespace arclqn
