#include "boxopt/interior.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>

#include "boxopt/core.hpp"
#include "boxopt/projection.hpp"

namespace boxopt {

namespace {

// A coordinate takes part in the barrier for a side only when that bound is
// finite and the variable is not pinned by equal bounds.
bool lower_active(const Bounds& b, Index i) { return b.has_lower(i) && !b.is_fixed(i); }
bool upper_active(const Bounds& b, Index i) { return b.has_upper(i) && !b.is_fixed(i); }

struct MeritTerms {
  double value;
  Vector grad_x, grad_z1, grad_z2;
  Vector newton_rhs;
};

// Barrier-penalty pieces assembled from already-evaluated f and grad f.
MeritTerms merit_terms(const PrimalDualPoint& v, double f, const Vector& grad_f,
                       const Bounds& bounds) {
  const Index n = v.x.size();
  MeritTerms t;
  t.value = f;
  t.grad_x = grad_f;
  t.grad_z1 = Vector::Zero(n);
  t.grad_z2 = Vector::Zero(n);
  t.newton_rhs = -grad_f;
  const double mu = v.mu;
  for (Index i = 0; i < n; ++i) {
    if (lower_active(bounds, i)) {
      const double slack = v.x[i] - bounds.lower()[i];
      const double z = v.z1[i];
      if (slack <= 0.0 || z <= 0.0)
        throw std::domain_error("merit: probe left the strict interior (lower side)");
      t.value -= mu * std::log(slack) + mu * std::log(z * slack) - z * slack;
      t.grad_x[i] += -2.0 * mu / slack + z;
      t.grad_z1[i] = -mu / z + slack;
      t.newton_rhs[i] += mu / slack;
    }
    if (upper_active(bounds, i)) {
      const double slack = bounds.upper()[i] - v.x[i];
      const double z = v.z2[i];
      if (slack <= 0.0 || z <= 0.0)
        throw std::domain_error("merit: probe left the strict interior (upper side)");
      t.value -= mu * std::log(slack) + mu * std::log(z * slack) - z * slack;
      t.grad_x[i] += 2.0 * mu / slack - z;
      t.grad_z2[i] = -mu / z + slack;
      t.newton_rhs[i] -= mu / slack;
    }
    if (bounds.is_fixed(i)) {
      // Pinned coordinates are not variables of the barrier subproblem.
      t.grad_x[i] = 0.0;
      t.newton_rhs[i] = 0.0;
    }
  }
  return t;
}

Vector pack_merit_gradient(const MeritTerms& t) {
  const Index n = t.grad_x.size();
  Vector g(3 * n);
  g.segment(0, n) = t.grad_x;
  g.segment(n, n) = t.grad_z1;
  g.segment(2 * n, n) = t.grad_z2;
  return g;
}

}  // namespace

double merit(const PrimalDualPoint& v, const BoxProblem& problem, EvalCounter& counter) {
  const double f = problem.value(v.x, counter);
  return merit_terms(v, f, Vector::Zero(v.x.size()), problem.bounds()).value;
}

MeritGradient merit_gradient(const PrimalDualPoint& v, const BoxProblem& problem,
                             EvalCounter& counter) {
  const double f = problem.value(v.x, counter);
  const Vector grad_f = problem.gradient(v.x, counter);
  const MeritTerms t = merit_terms(v, f, grad_f, problem.bounds());
  MeritGradient out;
  out.value = t.value;
  out.grad = pack_merit_gradient(t);
  out.newton_rhs = t.newton_rhs;
  return out;
}

NewtonStep newton_direction(const PrimalDualPoint& v, const BoxProblem& problem,
                            EvalCounter& counter) {
  const Bounds& bounds = problem.bounds();
  const Index n = v.x.size();
  const Vector grad_f = problem.gradient(v.x, counter);
  const Matrix hess = problem.hessian(v.x, counter);
  const MeritTerms t = merit_terms(v, 0.0, grad_f, bounds);

  std::vector<Index> loose;
  for (Index i = 0; i < n; ++i)
    if (!bounds.is_fixed(i)) loose.push_back(i);
  const Index m = static_cast<Index>(loose.size());

  Matrix h(m, m);
  Vector rhs(m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) h(a, b) = hess(loose[a], loose[b]);
    const Index i = loose[a];
    if (lower_active(bounds, i)) h(a, a) += v.z1[i] / (v.x[i] - bounds.lower()[i]);
    if (upper_active(bounds, i)) h(a, a) += v.z2[i] / (bounds.upper()[i] - v.x[i]);
    rhs[a] = t.newton_rhs[i];
  }

  NewtonStep step;
  step.dx = Vector::Zero(n);
  step.dz1 = Vector::Zero(n);
  step.dz2 = Vector::Zero(n);
  if (m > 0) {
    const double h_norm = h.cwiseAbs().rowwise().sum().maxCoeff();
    double delta = 0.0;
    Vector dx_red;
    while (true) {
      Matrix shifted = h;
      shifted.diagonal().array() += delta;
      Eigen::LDLT<Matrix> ldlt(shifted);
      const bool positive = ldlt.info() == Eigen::Success &&
                            (ldlt.vectorD().array() > 0.0).all() &&
                            ldlt.vectorD().allFinite();
      if (positive) {
        dx_red = ldlt.solve(rhs);
        if (dx_red.allFinite()) break;
      }
      delta = delta == 0.0 ? std::max(1e-8 * h_norm, 1e-8) : 10.0 * delta;
      if (delta > 1e40)
        throw FactorizationError("newton_direction: shift escalation exceeded its cap");
    }
    step.delta = delta;
    for (Index a = 0; a < m; ++a) step.dx[loose[a]] = dx_red[a];
  }

  for (Index i = 0; i < n; ++i) {
    if (lower_active(bounds, i)) {
      const double slack = v.x[i] - bounds.lower()[i];
      step.dz1[i] = -(v.z1[i] * (slack + step.dx[i]) - v.mu) / slack;
    }
    if (upper_active(bounds, i)) {
      const double slack = bounds.upper()[i] - v.x[i];
      step.dz2[i] = -(v.z2[i] * (slack - step.dx[i]) - v.mu) / slack;
    }
  }
  return step;
}

Vector perturbed_projection(const Vector& v, const Vector& center, const Bounds& vbounds,
                            double sigma) {
  Vector out = v;
  for (Index i = 0; i < v.size(); ++i) {
    if (vbounds.has_lower(i)) {
      const double lo = center[i] - sigma * (center[i] - vbounds.lower()[i]);
      if (out[i] < lo) out[i] = lo;
    }
    if (vbounds.has_upper(i)) {
      const double hi = center[i] + sigma * (vbounds.upper()[i] - center[i]);
      if (out[i] > hi) out[i] = hi;
    }
  }
  return out;
}

Vector pack_primal_dual(const PrimalDualPoint& v) {
  const Index n = v.x.size();
  Vector out(3 * n);
  out.segment(0, n) = v.x;
  out.segment(n, n) = v.z1;
  out.segment(2 * n, n) = v.z2;
  return out;
}

Bounds primal_dual_bounds(const Bounds& xbounds) {
  const Index n = xbounds.dim();
  Vector lo(3 * n), hi(3 * n);
  lo.segment(0, n) = xbounds.lower();
  hi.segment(0, n) = xbounds.upper();
  for (Index i = 0; i < n; ++i) {
    if (lower_active(xbounds, i)) {
      lo[n + i] = 0.0;
      hi[n + i] = kInfinity;
    } else {
      lo[n + i] = hi[n + i] = 1.0;  // placeholder dual, pinned
    }
    if (upper_active(xbounds, i)) {
      lo[2 * n + i] = 0.0;
      hi[2 * n + i] = kInfinity;
    } else {
      lo[2 * n + i] = hi[2 * n + i] = 1.0;
    }
  }
  return Bounds(lo, hi);
}

double kkt_residual(const Vector& x, const Vector& grad, const Bounds& bounds) {
  const double scale = std::max(1.0, grad.lpNorm<Eigen::Infinity>());
  double worst = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double g = grad[i] / scale;
    const double to_lower =
        bounds.has_lower(i) ? std::min(1.0, (x[i] - bounds.lower()[i]) / (1.0 + std::abs(bounds.lower()[i])))
                            : 1.0;
    const double to_upper =
        bounds.has_upper(i) ? std::min(1.0, (bounds.upper()[i] - x[i]) / (1.0 + std::abs(bounds.upper()[i])))
                            : 1.0;
    worst = std::max(worst, std::max(0.0, g * to_lower));
    worst = std::max(worst, std::max(0.0, -g * to_upper));
  }
  return worst;
}

namespace {

// Start point nudged strictly inside every finite bound.
Vector push_interior(const Vector& start, const Bounds& bounds) {
  Vector x = start;
  for (Index i = 0; i < x.size(); ++i) {
    if (bounds.is_fixed(i)) {
      x[i] = bounds.lower()[i];
      continue;
    }
    const bool lo = bounds.has_lower(i), hi = bounds.has_upper(i);
    if (lo && hi) {
      const double margin = 1e-4 * (bounds.upper()[i] - bounds.lower()[i]);
      x[i] = std::min(std::max(x[i], bounds.lower()[i] + margin), bounds.upper()[i] - margin);
    } else if (lo) {
      x[i] = std::max(x[i], bounds.lower()[i] + 1e-4);
    } else if (hi) {
      x[i] = std::min(x[i], bounds.upper()[i] - 1e-4);
    }
  }
  return x;
}

PrimalDualPoint unpack(const Vector& v, double mu) {
  const Index n = v.size() / 3;
  PrimalDualPoint out;
  out.x = v.segment(0, n);
  out.z1 = v.segment(n, n);
  out.z2 = v.segment(2 * n, n);
  out.mu = mu;
  return out;
}

}  // namespace

SolverReport solve_interior(const BoxProblem& problem, const InteriorOptions& options) {
  if (!problem.has_hessian())
    throw std::invalid_argument("solve_interior: problem provides no Hessian oracle");

  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - t_start).count();
  };

  SolverReport report;
  EvalCounter& counter = report.counters;
  const Bounds& bounds = problem.bounds();
  const Index n = problem.dim();
  const Bounds vbounds = primal_dual_bounds(bounds);

  PrimalDualPoint v;
  v.x = push_interior(problem.start(), bounds);
  v.z1 = Vector::Ones(n);
  v.z2 = Vector::Ones(n);
  v.mu = options.mu0;
  for (Index i = 0; i < n; ++i) {
    if (lower_active(bounds, i)) v.z1[i] = options.mu0 / (v.x[i] - bounds.lower()[i]);
    if (upper_active(bounds, i)) v.z2[i] = options.mu0 / (bounds.upper()[i] - v.x[i]);
  }

  double f = problem.value(v.x, counter);
  Vector grad_f = problem.gradient(v.x, counter);

  const auto finalize = [&](SolveStatus status, long iterations) {
    report.status = status;
    report.iterations = iterations;
    report.x_final = v.x;
    report.f_final = f;
    report.proj_grad_norm = projected_gradient_norm(v.x, grad_f, bounds);
    report.wall_time_s = elapsed();
    return report;
  };

  long k = 0;
  for (; k < options.max_iter; ++k) {
    if (f < options.unbounded_floor) return finalize(SolveStatus::Unbounded, k);
    if (kkt_residual(v.x, grad_f, bounds) <= options.tol)
      return finalize(SolveStatus::Converged, k);
    if (elapsed() > options.time_limit_s) return finalize(SolveStatus::TimeLimit, k);

    MeritTerms terms = merit_terms(v, f, grad_f, bounds);
    Vector merit_grad = pack_merit_gradient(terms);
    while (merit_grad.lpNorm<Eigen::Infinity>() <= std::max(0.1 * v.mu, 1e-9) &&
           v.mu > options.mu_min) {
      v.mu = std::max(v.mu / 10.0, options.mu_min);
      terms = merit_terms(v, f, grad_f, bounds);
      merit_grad = pack_merit_gradient(terms);
    }

    NewtonStep step;
    try {
      step = newton_direction(v, problem, counter);
    } catch (const FactorizationError&) {
      return finalize(SolveStatus::LineSearchFailure, k);
    }
    if (step.delta > 0.0) ++report.hessian_modifications;

    Vector dv(3 * n);
    dv.segment(0, n) = step.dx;
    dv.segment(n, n) = step.dz1;
    dv.segment(2 * n, n) = step.dz2;
    if (dv.isZero(0.0)) return finalize(SolveStatus::SmallChange, k);

    const Vector vflat = pack_primal_dual(v);
    const double mu_now = v.mu;

    LineSearchOutcome outcome;
    if (options.variant == InteriorVariant::PDWolfe) {
      // Step cap keeping the probe strictly inside the original bounds.
      double to_boundary = kInfinity;
      for (Index i = 0; i < 3 * n; ++i) {
        if (dv[i] < 0.0 && vbounds.has_lower(i))
          to_boundary = std::min(to_boundary, (vflat[i] - vbounds.lower()[i]) / (-dv[i]));
        if (dv[i] > 0.0 && vbounds.has_upper(i))
          to_boundary = std::min(to_boundary, (vbounds.upper()[i] - vflat[i]) / dv[i]);
      }
      SearchParams sp = options.params;
      if (std::isfinite(to_boundary))
        sp.alpha_max = std::min(sp.alpha_max, options.sigma * to_boundary);
      sp.alpha_init = std::min(1.0, sp.alpha_max);

      const ScalarOracle phi = [&](double alpha) {
        EvalCounter scratch;
        PrimalDualPoint probe = unpack(vflat + alpha * dv, mu_now);
        const double fp = problem.value(probe.x, scratch);
        const Vector gp = problem.gradient(probe.x, scratch);
        const MeritTerms mt = merit_terms(probe, fp, gp, bounds);
        return std::make_pair(mt.value, pack_merit_gradient(mt).dot(dv));
      };
      outcome = wolfe(phi, sp, counter);
      if (outcome.status == StepStatus::Failure)
        return finalize(SolveStatus::LineSearchFailure, k);
      v = unpack(vflat + outcome.alpha * dv, mu_now);
    } else {
      // Projected search over the shrunken box around the current iterate.
      Vector lo(3 * n), hi(3 * n);
      for (Index i = 0; i < 3 * n; ++i) {
        lo[i] = vbounds.has_lower(i)
                    ? vflat[i] - options.sigma * (vflat[i] - vbounds.lower()[i])
                    : -kInfinity;
        hi[i] = vbounds.has_upper(i)
                    ? vflat[i] + options.sigma * (vbounds.upper()[i] - vflat[i])
                    : kInfinity;
      }
      const Bounds step_box(lo, hi);

      BoxProblem merit_problem(
          3 * n,
          [&problem, &bounds, mu_now, n](const Vector& w) {
            EvalCounter scratch;
            PrimalDualPoint probe = unpack(w, mu_now);
            const double fp = problem.value(probe.x, scratch);
            return merit_terms(probe, fp, Vector::Zero(n), bounds).value;
          },
          [&problem, &bounds, mu_now, n](const Vector& w) {
            EvalCounter scratch;
            PrimalDualPoint probe = unpack(w, mu_now);
            const Vector gp = problem.gradient(probe.x, scratch);
            return pack_merit_gradient(merit_terms(probe, 0.0, gp, bounds));
          },
          step_box, vflat);

      SearchPath path(vflat, dv, step_box);
      const PathPoint base = make_base_point(path, terms.value, merit_grad);
      try {
        outcome = quasi_wolfe(path, merit_problem, options.params, counter, &base);
      } catch (const EvaluationError&) {
        return finalize(SolveStatus::LineSearchFailure, k);
      }
      if (outcome.status == StepStatus::Failure)
        return finalize(SolveStatus::LineSearchFailure, k);
      v = unpack(outcome.point.x, mu_now);
    }

    if (options.on_iteration)
      options.on_iteration(
          InteriorIterationInfo{k, mu_now, outcome.point.psi, outcome.alpha, step.delta, v.x,
                                v.z1, v.z2});

    f = problem.value(v.x, counter);
    grad_f = problem.gradient(v.x, counter);
  }
  return finalize(SolveStatus::IterLimit, k);
}

}  // namespace boxopt
