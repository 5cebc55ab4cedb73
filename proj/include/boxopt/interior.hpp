#pragma once

#include <stdexcept>

#include "boxopt/linesearch.hpp"
#include "boxopt/types.hpp"

namespace boxopt {

/// Strictly interior primal-dual iterate.  Dual entries exist only where the
/// matching bound is finite; placeholder entries are held at 1 and never
/// move.  Fixed variables (lower == upper) are excluded from the interior
/// parameterization.
struct PrimalDualPoint {
  Vector x;
  Vector z1;  // duals for finite lower bounds
  Vector z2;  // duals for finite upper bounds
  double mu = 1.0;
};

class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Barrier-penalty merit function value.  Sums only over coordinates whose
/// bound is finite; throws std::domain_error if any log argument is
/// nonpositive (an infeasible probe).  One objective call.
double merit(const PrimalDualPoint& v, const BoxProblem& problem, EvalCounter& counter);

/// Merit value, full gradient in the (x, z1, z2) packing, and the
/// right-hand side of the approximate Newton system.  One objective and one
/// gradient call.
struct MeritGradient {
  double value = 0.0;
  Vector grad;        // length 3n
  Vector newton_rhs;  // length n
};
MeritGradient merit_gradient(const PrimalDualPoint& v, const BoxProblem& problem,
                             EvalCounter& counter);

/// Approximate Newton direction for the merit function: factors the
/// condensed primal matrix with an escalating diagonal shift until it is
/// positive definite, solves for the primal step, and recovers the dual
/// steps.  `delta` reports the shift actually used (0 when none was needed).
struct NewtonStep {
  Vector dx, dz1, dz2;
  double delta = 0.0;
};
NewtonStep newton_direction(const PrimalDualPoint& v, const BoxProblem& problem,
                            EvalCounter& counter);

/// Clamp of a trial vector into the shrunken box centered at a strictly
/// interior point: coordinates may move at most the fraction sigma of their
/// distance to each finite bound.  The result stays strictly interior.
Vector perturbed_projection(const Vector& v, const Vector& center, const Bounds& vbounds,
                            double sigma);

/// Packing of the primal-dual variables and their implicit bounds into flat
/// 3n vectors, in the order (x, z1, z2).
Vector pack_primal_dual(const PrimalDualPoint& v);
Bounds primal_dual_bounds(const Bounds& xbounds);

/// Scaled first-order optimality measure for the original box problem:
/// gradient components pointing into a nearby bound are forgiven in
/// proportion to the (capped, scaled) distance to that bound.
double kkt_residual(const Vector& x, const Vector& grad, const Bounds& bounds);

enum class InteriorVariant { PDWolfe, PDProjQWolfe };

/// Post-step snapshot handed to the optional observer callback: the barrier
/// parameter and shift used for the step, and the accepted iterate with its
/// merit value.
struct InteriorIterationInfo {
  long k;
  double mu;
  double merit_value;
  double alpha;
  double delta;
  const Vector& x;
  const Vector& z1;
  const Vector& z2;
};

struct InteriorOptions {
  InteriorVariant variant = InteriorVariant::PDProjQWolfe;
  SearchParams params = SearchParams::quasi_wolfe_defaults();
  double sigma = 0.9;        // fraction-to-the-boundary factor
  double mu0 = 1.0;          // initial barrier parameter
  double mu_min = 1e-9;      // barrier floor
  double tol = 1e-5;         // optimality tolerance for the scaled KKT measure
  long max_iter = 500;
  double time_limit_s = 3600.0;
  double unbounded_floor = -1e20;
  std::function<void(const InteriorIterationInfo&)> on_iteration;
};

/// Primal-dual interior solver over the box, in two flavors: a conventional
/// step with a classical Wolfe search capped short of the boundary, or a
/// projected search over the shrunken box using the quasi-Wolfe machinery.
SolverReport solve_interior(const BoxProblem& problem, const InteriorOptions& options = {});

}  // namespace boxopt
