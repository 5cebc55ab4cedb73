#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "boxopt/linesearch.hpp"
#include "boxopt/types.hpp"

namespace boxopt {

/// Indices frozen in the direction subproblem: coordinates within epsilon of
/// a bound whose gradient component pushes outward.
std::vector<int> working_set(const Vector& x, const Vector& grad, double epsilon,
                             const Bounds& bounds);

/// Next working-set tolerance: min(cap, two-norm of the gradient restricted
/// to the complement of the previous working set).
double epsilon_update(const Vector& prev_grad, const std::vector<int>& prev_working_set,
                      double epsilon_cap);

/// Componentwise sign guard on the model direction near the epsilon bands:
/// clamps components to be nonnegative near the lower bound and nonpositive
/// near the upper (zero when the bands overlap).  Never worsens the
/// directional derivative.
Vector modify_direction(const Vector& d, const Vector& x, double epsilon, const Bounds& bounds);

enum class SearchKind { QuasiWolfe, QuasiArmijo };
enum class DirectionKind { QuasiNewton, ProjectedGradient };

/// Per-iteration snapshot handed to the optional observer callback.
struct IterationInfo {
  long k;
  const Vector& x;
  const Vector& grad;
  double epsilon;
  const std::vector<int>& working;
  const Vector& model_direction;
  const Vector& search_direction;
  double alpha;
  const Vector& x_next;
  double epsilon_next;
};

struct ActiveSetOptions {
  SearchKind search = SearchKind::QuasiWolfe;
  DirectionKind direction = DirectionKind::QuasiNewton;
  SearchParams params = SearchParams::quasi_wolfe_defaults();
  double tol = 1e-5;
  double epsilon_cap = kMachineEps;  // band width cap for the working set
  int memory = 8;
  long max_iter = 1000000;
  double time_limit_s = 3600.0;
  double unbounded_floor = -1e20;
  std::optional<double> fixed_step;  // bypass the search with a fixed alpha
  std::function<void(const IterationInfo&)> on_iteration;

  static ActiveSetOptions for_search(SearchKind kind) {
    ActiveSetOptions opts;
    opts.search = kind;
    opts.params = kind == SearchKind::QuasiArmijo ? SearchParams::quasi_armijo_defaults()
                                                  : SearchParams::quasi_wolfe_defaults();
    return opts;
  }
};

/// Projected-search active-set solver: limited-memory quasi-Newton (or
/// projected-gradient) directions restricted to the free subspace, a
/// quasi-Wolfe or quasi-Armijo search along the projected path, and
/// curvature-guarded model updates.
SolverReport solve_active_set(const BoxProblem& problem, const ActiveSetOptions& options = {});

}  // namespace boxopt
