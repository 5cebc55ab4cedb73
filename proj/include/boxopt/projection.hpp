#pragma once

#include <optional>
#include <vector>

#include "boxopt/types.hpp"

namespace boxopt {

/// Componentwise clamp of x into the box.  Idempotent.
Vector project(const Vector& x, const Bounds& bounds);

/// Projection of p onto the closure of the feasible directions at x:
/// components are zeroed where x sits on a bound that blocks motion
/// (x_i at the lower bound with p_i < 0, or at the upper with p_i > 0).
Vector projected_direction(const Vector& x, const Vector& p, const Bounds& bounds);

/// A step at which a coordinate of x + alpha*p crosses its blocking bound.
struct Kink {
  double step;
  Index index;
};

/// All finite positive kink steps of the projected path from x along p,
/// sorted ascending.  Coordinates already pinned by a bound (step zero)
/// never move along the path and are excluded; quotients above 1e300 are
/// treated as infinite.  Coincident kinks are kept as separate entries.
std::vector<Kink> kink_steps(const Vector& x, const Vector& p, const Bounds& bounds);

/// The piecewise-linear projected path alpha -> proj(x + alpha*p) together
/// with its precomputed kink steps.  A trial step "is a kink" only if it is
/// bitwise equal to a stored kink step; searches that want to probe a kink
/// copy the stored value, so no floating tolerance is involved.
class SearchPath {
 public:
  SearchPath(Vector base, Vector direction, Bounds bounds);

  const Vector& base() const { return base_; }
  const Vector& direction() const { return direction_; }
  const Bounds& bounds() const { return bounds_; }
  const std::vector<Kink>& kinks() const { return kinks_; }

  bool is_kink(double alpha) const;

  /// x(alpha).  Coordinates whose kink step equals alpha exactly are snapped
  /// onto their blocking bound, so derivative formulas see the exact corner.
  Vector point_at(double alpha) const;

 private:
  Vector base_, direction_;
  Bounds bounds_;
  std::vector<Kink> kinks_;
};

/// Left-limit variant of the projected direction along a path: coordinates
/// kinking exactly at alpha keep their direction component (they were still
/// moving just before alpha); all others follow projected_direction at
/// x(alpha).
Vector projected_direction_minus(const SearchPath& path, double alpha);

/// A point on a projected path: the iterate, objective value, gradient, and
/// the one-sided derivatives of psi(alpha) = f(x(alpha)).  The left
/// derivative is absent at alpha == 0.
struct PathPoint {
  double alpha = 0.0;
  Vector x;
  Vector grad;
  double psi = 0.0;
  double dpsi_plus = 0.0;
  std::optional<double> dpsi_minus;
  bool is_kink = false;
};

/// Evaluates the path function at alpha: one objective call for psi, one
/// gradient call for both one-sided derivatives.  Throws EvaluationError if
/// the objective comes back non-finite.
PathPoint eval_path(const SearchPath& path, double alpha, const BoxProblem& problem,
                    EvalCounter& counter);

/// Builds the alpha = 0 path point from already-evaluated f and gradient,
/// costing no oracle calls.
PathPoint make_base_point(const SearchPath& path, double f_at_base, const Vector& grad_at_base);

/// psi(alpha) alone (one objective call, no gradient).  Used by searches
/// whose trials only need values.
double path_value(const SearchPath& path, double alpha, const BoxProblem& problem,
                  EvalCounter& counter);

}  // namespace boxopt
