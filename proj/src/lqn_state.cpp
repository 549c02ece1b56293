#include "arclqn/lqn_state.hpp"

#include <Eigen/LU>
#include <cmath>

#include "arclqn/small_eig.hpp"

namespace arclqn {

LqnState::LqnState(double gamma, int memory) : gamma_(gamma), memory_(memory) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("LqnState: gamma must be positive and finite");
  if (memory < 1) throw std::invalid_argument("LqnState: memory must be >= 1");
  s_.reserve(static_cast<size_t>(memory));
  y_.reserve(static_cast<size_t>(memory));
}

void LqnState::set_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("LqnState: gamma must be positive and finite");
  gamma_ = gamma;
}

UpdateOutcome LqnState::try_update(const Vector& s_in, const Vector& y_in,
                                   double eps_curv, double kappa) {
  if (s_in.size() != y_in.size())
    throw std::invalid_argument("try_update: s and y dimensions differ");
  if (count() > 0 && s_in.size() != dim())
    throw std::invalid_argument("try_update: dimension does not match stored pairs");
  if (!(eps_curv > 0.0) || !(kappa > 0.0))
    throw std::invalid_argument("try_update: eps_curv and kappa must be positive");
  if (!s_in.allFinite() || !y_in.allFinite())
    return {false, UpdateReason::DegenerateSkip};

  const double scale = std::max(s_in.norm(), kappa);
  const Vector s = s_in / scale;
  const Vector y = y_in / scale;

  Vector r;
  if (count() == 0) {
    r = y - gamma_ * s;
  } else {
    try {
      r = y - bmul(s);
    } catch (const SingularMatrixError&) {
      return {false, UpdateReason::DegenerateSkip};
    }
  }
  const double rn = r.norm();
  if (rn == 0.0 || std::abs(s.dot(r)) <= eps_curv * s.norm() * rn)
    return {false, UpdateReason::CurvatureSkip};

  if (count() == memory_) evict_oldest();
  append_pair(s, y);

  // Near-dependent steps make S^T S (and with it T) nearly singular; trim.
  const double min_eig = jacobi_eigh(sts_).w[0];
  if (min_eig < kappa) {
    reset_trim();
    return {false, UpdateReason::ResetTriggered};
  }
  return {true, UpdateReason::Accepted};
}

void LqnState::append_pair(const Vector& s, const Vector& y) {
  const int k = count();
  Matrix sts(k + 1, k + 1), sty(k + 1, k + 1), yty(k + 1, k + 1);
  sts.topLeftCorner(k, k) = sts_;
  sty.topLeftCorner(k, k) = sty_;
  yty.topLeftCorner(k, k) = yty_;
  for (int i = 0; i < k; ++i) {
    const double ss = s_[static_cast<size_t>(i)].dot(s);
    sts(i, k) = ss;
    sts(k, i) = ss;
    const double yy = y_[static_cast<size_t>(i)].dot(y);
    yty(i, k) = yy;
    yty(k, i) = yy;
    sty(i, k) = s_[static_cast<size_t>(i)].dot(y);  // s_i . y_new
    sty(k, i) = s.dot(y_[static_cast<size_t>(i)]);  // s_new . y_i
  }
  sts(k, k) = s.squaredNorm();
  yty(k, k) = y.squaredNorm();
  sty(k, k) = s.dot(y);
  sts_ = std::move(sts);
  sty_ = std::move(sty);
  yty_ = std::move(yty);
  s_.push_back(s);
  y_.push_back(y);
}

void LqnState::evict_oldest() {
  const int k = count();
  if (k == 0) return;
  s_.erase(s_.begin());
  y_.erase(y_.begin());
  sts_ = Matrix(sts_.bottomRightCorner(k - 1, k - 1));
  sty_ = Matrix(sty_.bottomRightCorner(k - 1, k - 1));
  yty_ = Matrix(yty_.bottomRightCorner(k - 1, k - 1));
}

void LqnState::reset_trim() {
  const int k = count();
  if (k < 1) throw std::invalid_argument("reset_trim: no stored pairs");
  if (k <= 2) {
    s_.clear();
    y_.clear();
    sts_.resize(0, 0);
    sty_.resize(0, 0);
    yty_.resize(0, 0);
    return;
  }
  s_.erase(s_.begin() + (k - 1));
  s_.erase(s_.begin());
  y_.erase(y_.begin() + (k - 1));
  y_.erase(y_.begin());
  sts_ = Matrix(sts_.block(1, 1, k - 2, k - 2));
  sty_ = Matrix(sty_.block(1, 1, k - 2, k - 2));
  yty_ = Matrix(yty_.block(1, 1, k - 2, k - 2));
}

Matrix LqnState::e_matrix() const {
  const int k = count();
  Matrix e(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) e(i, j) = (i >= j) ? sty_(i, j) : sty_(j, i);
  return e;
}

Matrix LqnState::m_matrix() const { return e_matrix() - gamma_ * sts_; }

Matrix LqnState::psi_gram() const {
  return yty_ - gamma_ * (sty_ + sty_.transpose()) + gamma_ * gamma_ * sts_;
}

Vector LqnState::psi_tmul(const Vector& v) const {
  const int k = count();
  Vector out(k);
  for (int i = 0; i < k; ++i)
    out[i] = y_[static_cast<size_t>(i)].dot(v) - gamma_ * s_[static_cast<size_t>(i)].dot(v);
  return out;
}

Vector LqnState::psi_mul(const Vector& coeffs) const {
  const int k = count();
  if (coeffs.size() != k) throw std::invalid_argument("psi_mul: coefficient size mismatch");
  Vector out = Vector::Zero(dim());
  for (int i = 0; i < k; ++i) {
    out += coeffs[i] * y_[static_cast<size_t>(i)];
    out -= gamma_ * coeffs[i] * s_[static_cast<size_t>(i)];
  }
  return out;
}

Vector LqnState::bmul(const Vector& v) const {
  if (count() == 0) return gamma_ * v;
  if (v.size() != dim()) throw std::invalid_argument("bmul: dimension mismatch");
  const Vector u = psi_tmul(v);
  Eigen::FullPivLU<Matrix> lu(m_matrix());
  if (!lu.isInvertible()) throw SingularMatrixError("bmul: M is numerically singular");
  const Vector c = lu.solve(u);
  return gamma_ * v + psi_mul(c);
}

double LqnState::model_value(const Vector& g, double sigma, const Vector& s, double f0) const {
  if (sigma < 0.0) throw std::invalid_argument("model_value: sigma must be >= 0");
  const double sn = s.norm();
  return f0 + g.dot(s) + 0.5 * s.dot(bmul(s)) + sigma / 3.0 * sn * sn * sn;
}

}  // namespace arclqn
