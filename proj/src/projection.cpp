#include "boxopt/projection.hpp"

#include <algorithm>
#include <cmath>

namespace boxopt {

namespace {
// Quotients beyond this are indistinguishable from an unreachable bound.
constexpr double kKinkCap = 1e300;
}  // namespace

Vector project(const Vector& x, const Bounds& bounds) {
  return x.cwiseMax(bounds.lower()).cwiseMin(bounds.upper());
}

Vector projected_direction(const Vector& x, const Vector& p, const Bounds& bounds) {
  Vector out = p;
  for (Index i = 0; i < x.size(); ++i) {
    if ((x[i] == bounds.lower()[i] && p[i] < 0.0) || (x[i] == bounds.upper()[i] && p[i] > 0.0))
      out[i] = 0.0;
  }
  return out;
}

std::vector<Kink> kink_steps(const Vector& x, const Vector& p, const Bounds& bounds) {
  std::vector<Kink> kinks;
  for (Index i = 0; i < x.size(); ++i) {
    double step;
    if (p[i] > 0.0) {
      step = (bounds.upper()[i] - x[i]) / p[i];
    } else if (p[i] < 0.0) {
      step = (bounds.lower()[i] - x[i]) / p[i];
    } else {
      continue;
    }
    if (step > 0.0 && step <= kKinkCap) kinks.push_back({step, i});
  }
  std::sort(kinks.begin(), kinks.end(), [](const Kink& a, const Kink& b) {
    return a.step < b.step || (a.step == b.step && a.index < b.index);
  });
  return kinks;
}

SearchPath::SearchPath(Vector base, Vector direction, Bounds bounds)
    : base_(std::move(base)), direction_(std::move(direction)), bounds_(std::move(bounds)) {
  if (base_.size() != direction_.size() || base_.size() != bounds_.dim())
    throw std::invalid_argument("SearchPath: dimension mismatch");
  kinks_ = kink_steps(base_, direction_, bounds_);
}

bool SearchPath::is_kink(double alpha) const {
  auto it = std::lower_bound(kinks_.begin(), kinks_.end(), alpha,
                             [](const Kink& k, double a) { return k.step < a; });
  return it != kinks_.end() && it->step == alpha;
}

Vector SearchPath::point_at(double alpha) const {
  Vector x = project(base_ + alpha * direction_, bounds_);
  // Land exactly on the corner for coordinates kinking at this alpha, so the
  // bound-activity tests in the derivative formulas see the true crossing.
  for (const Kink& k : kinks_) {
    if (k.step == alpha)
      x[k.index] = direction_[k.index] > 0.0 ? bounds_.upper()[k.index] : bounds_.lower()[k.index];
  }
  return x;
}

Vector projected_direction_minus(const SearchPath& path, double alpha) {
  Vector out = projected_direction(path.point_at(alpha), path.direction(), path.bounds());
  for (const Kink& k : path.kinks()) {
    if (k.step == alpha) out[k.index] = path.direction()[k.index];
  }
  return out;
}

PathPoint eval_path(const SearchPath& path, double alpha, const BoxProblem& problem,
                    EvalCounter& counter) {
  PathPoint pt;
  pt.alpha = alpha;
  pt.x = path.point_at(alpha);
  pt.psi = problem.value(pt.x, counter);
  if (!std::isfinite(pt.psi))
    throw EvaluationError("objective returned a non-finite value along the path", alpha);
  pt.grad = problem.gradient(pt.x, counter);
  pt.dpsi_plus = pt.grad.dot(projected_direction(pt.x, path.direction(), path.bounds()));
  if (alpha > 0.0) pt.dpsi_minus = pt.grad.dot(projected_direction_minus(path, alpha));
  pt.is_kink = path.is_kink(alpha);
  return pt;
}

PathPoint make_base_point(const SearchPath& path, double f_at_base, const Vector& grad_at_base) {
  PathPoint pt;
  pt.alpha = 0.0;
  pt.x = path.base();
  pt.grad = grad_at_base;
  pt.psi = f_at_base;
  pt.dpsi_plus = grad_at_base.dot(projected_direction(path.base(), path.direction(), path.bounds()));
  pt.is_kink = false;
  return pt;
}

double path_value(const SearchPath& path, double alpha, const BoxProblem& problem,
                  EvalCounter& counter) {
  const double value = problem.value(path.point_at(alpha), counter);
  if (!std::isfinite(value))
    throw EvaluationError("objective returned a non-finite value along the path", alpha);
  return value;
}

}  // namespace boxopt
