#include "boxopt/lbfgs.hpp"

#include <cmath>

namespace boxopt {

namespace {

Vector masked(const Vector& v, const std::vector<char>& free_mask) {
  Vector out = v;
  for (Index i = 0; i < v.size(); ++i)
    if (!free_mask[static_cast<size_t>(i)]) out[i] = 0.0;
  return out;
}

}  // namespace

UpdateResult LbfgsMemory::update(const Vector& s, const Vector& y) {
  const double sy = s.dot(y);
  if (!(sy > curvature_floor_ * s.norm() * y.norm())) return UpdateResult::Skipped;
  pairs_.push_back({s, y});
  if (static_cast<int>(pairs_.size()) > memory_) pairs_.pop_front();
  gamma_ = sy / y.dot(y);
  return UpdateResult::Applied;
}

void LbfgsMemory::clear() {
  pairs_.clear();
  gamma_ = 1.0;
}

Vector LbfgsMemory::reduced_direction(const Vector& grad, const std::vector<char>& free_mask) const {
  const Index n = grad.size();
  Vector g_free = masked(grad, free_mask);
  if (g_free.isZero(0.0)) return Vector::Zero(n);

  Vector q = g_free;
  const int m = static_cast<int>(pairs_.size());
  std::vector<Vector> s_free(m), y_free(m);
  std::vector<double> rho(m, 0.0), alpha(m, 0.0);
  std::vector<char> usable(m, 0);
  for (int j = 0; j < m; ++j) {
    s_free[j] = masked(pairs_[j].s, free_mask);
    y_free[j] = masked(pairs_[j].y, free_mask);
    const double sy = s_free[j].dot(y_free[j]);
    // Masking can destroy the curvature of a stored pair; such pairs are
    // left out of the recursion for this call.
    if (sy > curvature_floor_ * s_free[j].norm() * y_free[j].norm()) {
      usable[j] = 1;
      rho[j] = 1.0 / sy;
    }
  }

  for (int j = m - 1; j >= 0; --j) {
    if (!usable[j]) continue;
    alpha[j] = rho[j] * s_free[j].dot(q);
    q -= alpha[j] * y_free[j];
  }
  Vector r = gamma_ * q;
  for (int j = 0; j < m; ++j) {
    if (!usable[j]) continue;
    const double beta = rho[j] * y_free[j].dot(r);
    r += (alpha[j] - beta) * s_free[j];
  }

  Vector d = -r;
  if (!(grad.dot(d) < -1e-12 * grad.norm() * d.norm())) d = -gamma_ * g_free;
  for (Index i = 0; i < n; ++i)
    if (!free_mask[static_cast<size_t>(i)]) d[i] = 0.0;
  return d;
}

}  // namespace boxopt
