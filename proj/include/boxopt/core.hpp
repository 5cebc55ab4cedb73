#pragma once

#include <optional>

#include "boxopt/types.hpp"

namespace boxopt {

enum class Termination { Continue, Converged, SmallChange };

/// Central-difference gradient estimate, falling back to one-sided
/// differences when a probe would leave the box.  Probes are clamped into
/// the box and the divisor is the actual coordinate spread, so the result
/// is well defined arbitrarily close to (or on) a bound.  Fixed variables
/// get a zero entry.
Vector finite_difference_gradient(const BoxProblem& problem, const Vector& x, double h = 1e-6);

/// Infinity norm of the projected steepest-descent direction P_x(-grad).
double projected_gradient_norm(const Vector& x, const Vector& grad, const Bounds& bounds);

/// Convergence test on an iterate.  Declares convergence when the projected
/// gradient is below sqrt(machine eps), or when it is below tol*(1+|f|) and
/// the objective change from the previous iterate is below 1e7*eps*scale.
/// Without a previous value only the first (deep) test can fire.
Termination check_termination_with_gradient(const Vector& x, const Vector& grad, double f_now,
                                            std::optional<double> f_prev, const Bounds& bounds,
                                            double tol = 1e-5);

/// As above, evaluating the gradient through the problem oracle.
Termination check_termination(const Vector& x, double f_now, std::optional<double> f_prev,
                              const BoxProblem& problem, double tol = 1e-5);

}  // namespace boxopt
