#include "boxopt/core.hpp"

#include <cmath>

#include "boxopt/projection.hpp"

namespace boxopt {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::SmallChange: return "SmallChange";
    case SolveStatus::IterLimit: return "IterLimit";
    case SolveStatus::TimeLimit: return "TimeLimit";
    case SolveStatus::LineSearchFailure: return "LineSearchFailure";
    case SolveStatus::Unbounded: return "Unbounded";
  }
  return "Unknown";
}

std::optional<SolveStatus> solve_status_from_string(const std::string& name) {
  for (SolveStatus s : {SolveStatus::Converged, SolveStatus::SmallChange, SolveStatus::IterLimit,
                        SolveStatus::TimeLimit, SolveStatus::LineSearchFailure,
                        SolveStatus::Unbounded}) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

Vector finite_difference_gradient(const BoxProblem& problem, const Vector& x, double h) {
  const Bounds& bounds = problem.bounds();
  EvalCounter scratch;
  Vector g = Vector::Zero(x.size());
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double hi = std::min(x[i] + h, bounds.upper()[i]);
    const double lo = std::max(x[i] - h, bounds.lower()[i]);
    const double spread = hi - lo;
    if (spread <= 0.0) continue;  // fixed variable
    probe[i] = hi;
    const double f_hi = problem.value(probe, scratch);
    probe[i] = lo;
    const double f_lo = problem.value(probe, scratch);
    probe[i] = x[i];
    g[i] = (f_hi - f_lo) / spread;
  }
  return g;
}

double projected_gradient_norm(const Vector& x, const Vector& grad, const Bounds& bounds) {
  return projected_direction(x, -grad, bounds).lpNorm<Eigen::Infinity>();
}

Termination check_termination_with_gradient(const Vector& x, const Vector& grad, double f_now,
                                            std::optional<double> f_prev, const Bounds& bounds,
                                            double tol) {
  const double pg = projected_gradient_norm(x, grad, bounds);
  if (pg < std::sqrt(kMachineEps)) return Termination::Converged;
  if (f_prev.has_value()) {
    const double scale = std::max({std::abs(f_now), std::abs(*f_prev), 1.0});
    const bool grad_small = pg <= tol * (1.0 + std::abs(f_now));
    const bool change_small = std::abs(f_now - *f_prev) <= 1e7 * kMachineEps * scale;
    if (grad_small && change_small) return Termination::Converged;
  }
  return Termination::Continue;
}

Termination check_termination(const Vector& x, double f_now, std::optional<double> f_prev,
                              const BoxProblem& problem, double tol) {
  EvalCounter scratch;
  return check_termination_with_gradient(x, problem.gradient(x, scratch), f_now, f_prev,
                                         problem.bounds(), tol);
}

}  // namespace boxopt
