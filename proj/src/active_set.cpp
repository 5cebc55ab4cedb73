#include "boxopt/active_set.hpp"

#include <chrono>
#include <cmath>

#include "boxopt/core.hpp"
#include "boxopt/lbfgs.hpp"

namespace boxopt {

std::vector<int> working_set(const Vector& x, const Vector& grad, double epsilon,
                             const Bounds& bounds) {
  std::vector<int> indices;
  for (Index i = 0; i < x.size(); ++i) {
    const bool near_lower = x[i] <= bounds.lower()[i] + epsilon && grad[i] > 0.0;
    const bool near_upper = x[i] >= bounds.upper()[i] - epsilon && grad[i] < 0.0;
    if (near_lower || near_upper) indices.push_back(static_cast<int>(i));
  }
  return indices;
}

double epsilon_update(const Vector& prev_grad, const std::vector<int>& prev_working_set,
                      double epsilon_cap) {
  Vector g_free = prev_grad;
  for (int i : prev_working_set) g_free[i] = 0.0;
  return std::min(epsilon_cap, g_free.norm());
}

Vector modify_direction(const Vector& d, const Vector& x, double epsilon, const Bounds& bounds) {
  Vector p = d;
  for (Index i = 0; i < x.size(); ++i) {
    const bool near_lower = x[i] <= bounds.lower()[i] + epsilon;
    const bool near_upper = x[i] >= bounds.upper()[i] - epsilon;
    if (near_lower && near_upper) {
      p[i] = 0.0;
    } else if (near_lower) {
      p[i] = std::max(d[i], 0.0);
    } else if (near_upper) {
      p[i] = std::min(d[i], 0.0);
    }
  }
  return p;
}

namespace {

std::vector<char> free_mask_from(const std::vector<int>& working, Index n) {
  std::vector<char> mask(static_cast<size_t>(n), 1);
  for (int i : working) mask[static_cast<size_t>(i)] = 0;
  return mask;
}

}  // namespace

SolverReport solve_active_set(const BoxProblem& problem, const ActiveSetOptions& options) {
  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - t_start).count();
  };

  SolverReport report;
  EvalCounter& counter = report.counters;
  const Bounds& bounds = problem.bounds();

  Vector x = problem.start();
  double f = problem.value(x, counter);
  Vector grad = problem.gradient(x, counter);
  std::optional<double> f_prev;
  double epsilon = options.epsilon_cap;
  LbfgsMemory memory(options.memory);

  const auto finalize = [&](SolveStatus status, long iterations) {
    report.status = status;
    report.iterations = iterations;
    report.x_final = x;
    report.f_final = f;
    report.proj_grad_norm = projected_gradient_norm(x, grad, bounds);
    report.wall_time_s = elapsed();
    return report;
  };

  long k = 0;
  for (; k < options.max_iter; ++k) {
    if (check_termination_with_gradient(x, grad, f, f_prev, bounds, options.tol) ==
        Termination::Converged)
      return finalize(SolveStatus::Converged, k);
    if (f < options.unbounded_floor) return finalize(SolveStatus::Unbounded, k);
    if (elapsed() > options.time_limit_s) return finalize(SolveStatus::TimeLimit, k);

    const std::vector<int> working = working_set(x, grad, epsilon, bounds);
    const std::vector<char> free = free_mask_from(working, problem.dim());

    Vector d;
    if (options.direction == DirectionKind::ProjectedGradient) {
      d = -grad;
      for (int i : working) d[i] = 0.0;
    } else {
      d = memory.reduced_direction(grad, free);
    }
    const Vector p = modify_direction(d, x, epsilon, bounds);
    if (p.isZero(0.0)) return finalize(SolveStatus::LineSearchFailure, k);

    SearchPath path(x, p, bounds);
    const PathPoint base = make_base_point(path, f, grad);

    LineSearchOutcome outcome;
    try {
      if (options.fixed_step.has_value()) {
        outcome.alpha = *options.fixed_step;
        outcome.point = eval_path(path, outcome.alpha, problem, counter);
        outcome.status = StepStatus::Armijo;
      } else {
        outcome = options.search == SearchKind::QuasiWolfe
                      ? quasi_wolfe(path, problem, options.params, counter, &base)
                      : quasi_armijo(path, problem, options.params, counter, &base);
      }
    } catch (const EvaluationError&) {
      return finalize(SolveStatus::LineSearchFailure, k);
    }
    if (outcome.status == StepStatus::Failure) {
      if (outcome.point.psi < f && outcome.alpha > 0.0) {
        // Keep the improvement the failed search still found.
        x = outcome.point.x;
        f = outcome.point.psi;
        grad = outcome.point.grad;
      }
      return finalize(SolveStatus::LineSearchFailure, k);
    }

    const Vector& x_next = outcome.point.x;
    if ((x_next - x).isZero(0.0))
      return finalize(SolveStatus::SmallChange, k);  // accepted step moved nowhere

    const Vector& grad_next = outcome.point.grad;
    if (options.direction == DirectionKind::QuasiNewton) {
      const UpdateResult res = memory.update(x_next - x, grad_next - grad);
      if (res == UpdateResult::Applied)
        ++report.updates_applied;
      else
        ++report.updates_skipped;
    }

    const double epsilon_next = epsilon_update(grad, working, options.epsilon_cap);
    if (options.on_iteration) {
      options.on_iteration(IterationInfo{k, x, grad, epsilon, working, d, p, outcome.alpha,
                                         x_next, epsilon_next});
    }

    f_prev = f;
    x = x_next;
    f = outcome.point.psi;
    grad = grad_next;
    epsilon = epsilon_next;
  }
  return finalize(SolveStatus::IterLimit, k);
}

}  // namespace boxopt
