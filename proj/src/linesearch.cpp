#include "boxopt/linesearch.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace boxopt {

AuxOmega aux_omega(const PathPoint& point, const PathPoint& base, const SearchParams& params) {
  AuxOmega out;
  out.value = point.psi - (base.psi + point.alpha * params.eta_armijo * base.dpsi_plus);
  out.d_plus = point.dpsi_plus - params.eta_armijo * base.dpsi_plus;
  if (point.dpsi_minus.has_value())
    out.d_minus = *point.dpsi_minus - params.eta_armijo * base.dpsi_plus;
  return out;
}

namespace {

// Shorthands over aux_omega used throughout the searches.
double omega(const PathPoint& pt, const PathPoint& base, const SearchParams& params) {
  return pt.psi - (base.psi + pt.alpha * params.eta_armijo * base.dpsi_plus);
}

double omega_plus(const PathPoint& pt, const PathPoint& base, const SearchParams& params) {
  return pt.dpsi_plus - params.eta_armijo * base.dpsi_plus;
}

double omega_minus(const PathPoint& pt, const PathPoint& base, const SearchParams& params) {
  return *pt.dpsi_minus - params.eta_armijo * base.dpsi_plus;
}

// Minimizer of the cubic through (a, fa, ga) and (b, fb, gb); NaN when the
// formula degenerates.
double cubic_minimizer(double a, double fa, double ga, double b, double fb, double gb) {
  const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - ga * gb;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double denom = gb - ga + 2.0 * d2;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return b - (b - a) * (gb + d2 - d1) / denom;
}

bool inside_central_band(double alpha, double lo, double hi, double fraction = 0.05) {
  const double margin = fraction * (hi - lo);
  return std::isfinite(alpha) && alpha >= lo + margin && alpha <= hi - margin;
}

PathPoint complete_point(const SearchPath& path, double alpha, double psi,
                         const BoxProblem& problem, EvalCounter& counter) {
  PathPoint pt;
  pt.alpha = alpha;
  pt.x = path.point_at(alpha);
  pt.psi = psi;
  pt.grad = problem.gradient(pt.x, counter);
  pt.dpsi_plus = pt.grad.dot(projected_direction(pt.x, path.direction(), path.bounds()));
  if (alpha > 0.0) pt.dpsi_minus = pt.grad.dot(projected_direction_minus(path, alpha));
  pt.is_kink = path.is_kink(alpha);
  return pt;
}

struct QuasiWolfeSearch {
  const SearchPath& path;
  const BoxProblem& problem;
  const SearchParams& params;
  EvalCounter& counter;
  SearchDiagnostics* diag;
  PathPoint base;
  long evals = 0;
  std::optional<PathPoint> best;  // least psi among evaluated trial points

  PathPoint evaluate(double alpha) {
    ++evals;
    PathPoint pt = eval_path(path, alpha, problem, counter);
    if (!best.has_value() || pt.psi < best->psi) best = pt;
    return pt;
  }

  LineSearchOutcome finish(const PathPoint& pt, StepStatus status) const {
    LineSearchOutcome out;
    out.alpha = pt.alpha;
    out.point = pt;
    out.status = status;
    out.flags = quasi_wolfe_flags(pt, base, params);
    out.value_evals = evals;
    out.deriv_evals = evals;
    return out;
  }

  LineSearchOutcome fail_with_best() const {
    const PathPoint& pt = (best.has_value() && best->psi < base.psi) ? *best : base;
    LineSearchOutcome out;
    out.alpha = pt.alpha;
    out.point = pt;
    out.status = StepStatus::Failure;
    out.flags = pt.alpha > 0.0 ? quasi_wolfe_flags(pt, base, params) : 0;
    out.value_evals = evals;
    out.deriv_evals = evals;
    return out;
  }

  LineSearchOutcome run() {
    if (!(base.dpsi_plus < 0.0)) return fail_with_best();

    double alpha = std::min(params.alpha_init, params.alpha_max);
    PathPoint prev = base;
    while (evals < params.max_evals) {
      PathPoint pt = evaluate(alpha);
      if (is_quasi_wolfe_accepted(quasi_wolfe_flags(pt, base, params)))
        return finish(pt, StepStatus::QuasiWolfe);
      if (omega(pt, base, params) >= omega(prev, base, params)) return stage_two(prev, pt);
      if (omega_minus(pt, base, params) >= 0.0) return stage_two(pt, prev);
      if (alpha == params.alpha_max) return finish(pt, StepStatus::HitAlphaMax);
      prev = pt;
      alpha = std::min(params.expansion * alpha, params.alpha_max);
    }
    return fail_with_best();
  }

  // Kink steps strictly inside the open interval between the current
  // endpoints, taken from a snapshot sorted in decreasing order on entry.
  std::vector<double> snapshot_kinks(double a, double b) const {
    const double lo = std::min(a, b), hi = std::max(a, b);
    std::vector<double> ks;
    for (const Kink& k : path.kinks())
      if (k.step > lo && k.step < hi) ks.push_back(k.step);
    std::make_heap(ks.begin(), ks.end(), std::greater<>());
    std::sort_heap(ks.begin(), ks.end(), std::greater<>());
    return ks;
  }

  bool stage_two_invariants(const PathPoint& low, const PathPoint& high) const {
    if (!(omega(low, base, params) <= 0.0)) return false;
    if (!(omega(low, base, params) <= omega(high, base, params))) return false;
    if (low.alpha < high.alpha) return omega_plus(low, base, params) < 0.0;
    return low.alpha > 0.0 && omega_minus(low, base, params) > 0.0;
  }

  LineSearchOutcome stage_two(PathPoint low, PathPoint high) {
    std::vector<double> kink_pool = snapshot_kinks(low.alpha, high.alpha);
    int consecutive_kinks = 0;

    while (true) {
      assert(stage_two_invariants(low, high));
      if (diag != nullptr && !stage_two_invariants(low, high)) ++diag->invariant_violations;

      const double lo = std::min(low.alpha, high.alpha);
      const double hi = std::max(low.alpha, high.alpha);
      if (hi - lo <= kMachineEps * std::max(1.0, low.alpha)) {
        // Noise floor: the bracket is one ulp wide.
        const PathPoint& pick = low.psi <= high.psi ? low : high;
        LineSearchOutcome out = fail_with_best();
        if (pick.psi < out.point.psi) {
          out.alpha = pick.alpha;
          out.point = pick;
          out.flags = pick.alpha > 0.0 ? quasi_wolfe_flags(pick, base, params) : 0;
        }
        return out;
      }

      std::vector<double> inside;
      for (double k : kink_pool)
        if (k > lo && k < hi) inside.push_back(k);

      bool trial_is_kink = false;
      double alpha_new;
      if (!inside.empty() && consecutive_kinks < params.max_consecutive_kinks) {
        alpha_new = inside.front();
        if (inside.size() > 1) {
          for (double k : inside)
            if (std::abs(k - low.alpha) < std::abs(alpha_new - low.alpha)) alpha_new = k;
        }
        trial_is_kink = true;
      } else if (!inside.empty()) {
        alpha_new = 0.5 * (lo + hi);
      } else {
        const PathPoint& at_lo = low.alpha < high.alpha ? low : high;
        const PathPoint& at_hi = low.alpha < high.alpha ? high : low;
        alpha_new = cubic_minimizer(at_lo.alpha, at_lo.psi, at_lo.dpsi_plus, at_hi.alpha,
                                    at_hi.psi, *at_hi.dpsi_minus);
        if (!inside_central_band(alpha_new, lo, hi)) alpha_new = 0.5 * (lo + hi);
      }
      if (!(alpha_new > lo && alpha_new < hi)) alpha_new = 0.5 * (lo + hi);
      consecutive_kinks = trial_is_kink ? consecutive_kinks + 1 : 0;

      if (diag != nullptr)
        diag->brackets.push_back(
            {low.alpha, high.alpha, static_cast<int>(inside.size()), trial_is_kink});

      if (evals >= params.max_evals) return fail_with_best();
      PathPoint pt = evaluate(alpha_new);
      if (is_quasi_wolfe_accepted(quasi_wolfe_flags(pt, base, params)))
        return finish(pt, StepStatus::QuasiWolfe);

      if (omega(pt, base, params) >= omega(low, base, params)) {
        high = pt;
      } else if (omega_plus(pt, base, params) < 0.0 && low.alpha < high.alpha) {
        low = pt;
      } else if (omega_minus(pt, base, params) > 0.0 && low.alpha > high.alpha) {
        low = pt;
      } else {
        high = low;
        low = pt;
      }
    }
  }
};

}  // namespace

CondFlags quasi_wolfe_flags(const PathPoint& point, const PathPoint& base,
                            const SearchParams& params) {
  CondFlags flags = 0;
  const double slope0 = base.dpsi_plus;
  if (point.psi <= base.psi + point.alpha * params.eta_armijo * slope0) flags |= cond::C1;
  const double curvature_cap = params.eta_wolfe * std::abs(slope0);
  if (point.dpsi_minus.has_value() && std::abs(*point.dpsi_minus) <= curvature_cap)
    flags |= cond::C2;
  if (std::abs(point.dpsi_plus) <= curvature_cap) flags |= cond::C3;
  if (point.is_kink && point.dpsi_minus.has_value() && *point.dpsi_minus <= 0.0 &&
      point.dpsi_plus >= 0.0)
    flags |= cond::C4;
  return flags;
}

LineSearchOutcome quasi_armijo(const SearchPath& path, const BoxProblem& problem,
                               const SearchParams& params, EvalCounter& counter,
                               const PathPoint* base_in) {
  const PathPoint base = base_in != nullptr
                             ? *base_in
                             : eval_path(path, 0.0, problem, counter);
  LineSearchOutcome out;
  out.point = base;
  out.status = StepStatus::Failure;
  if (base_in == nullptr) {
    out.value_evals = 1;
    out.deriv_evals = 1;
  }

  // The sufficient-decrease line uses the raw directional derivative along
  // p, not the projected one (they agree whenever no bound blocks p at the
  // base point, which is how the solvers call this).
  const double slope0 = base.grad.size() > 0 ? base.grad.dot(path.direction()) : base.dpsi_plus;
  if (!(slope0 < 0.0) || !(base.dpsi_plus < 0.0)) return out;

  double alpha = std::min(params.alpha_init, params.alpha_max);
  for (int t = 0; out.value_evals < params.max_evals; ++t) {
    const double psi = problem.value(path.point_at(alpha), counter);
    ++out.value_evals;
    if (psi <= base.psi + alpha * params.eta_armijo * slope0) {
      out.point = complete_point(path, alpha, psi, problem, counter);
      ++out.deriv_evals;
      out.alpha = alpha;
      out.status = StepStatus::Armijo;
      out.flags = quasi_wolfe_flags(out.point, base, params);
      return out;
    }
    alpha *= params.backtrack;
  }
  return out;
}

LineSearchOutcome quasi_wolfe(const SearchPath& path, const BoxProblem& problem,
                              const SearchParams& params, EvalCounter& counter,
                              const PathPoint* base_in, SearchDiagnostics* diagnostics) {
  QuasiWolfeSearch search{path, problem, params, counter, diagnostics,
                          base_in != nullptr ? *base_in : eval_path(path, 0.0, problem, counter),
                          base_in == nullptr ? 1 : 0, std::nullopt};
  return search.run();
}

namespace {

struct WolfeSearch {
  const ScalarOracle& phi;
  const SearchParams& params;
  EvalCounter& counter;

  struct Sample {
    double alpha, value, slope;
  };
  Sample base{};
  long evals = 0;
  Sample best{};
  bool have_best = false;

  Sample evaluate(double alpha) {
    ++evals;
    ++counter.n_f;
    ++counter.n_g;
    auto [value, slope] = phi(alpha);
    Sample s{alpha, value, slope};
    if (alpha > 0.0 && (!have_best || s.value < best.value)) {
      best = s;
      have_best = true;
    }
    return s;
  }

  double omega(const Sample& s) const {
    return s.value - (base.value + s.alpha * params.eta_armijo * base.slope);
  }
  double omega_slope(const Sample& s) const {
    return s.slope - params.eta_armijo * base.slope;
  }
  bool is_wolfe(const Sample& s) const {
    return s.value <= base.value + s.alpha * params.eta_armijo * base.slope &&
           std::abs(s.slope) <= params.eta_wolfe * std::abs(base.slope);
  }

  LineSearchOutcome finish(const Sample& s, StepStatus status) const {
    LineSearchOutcome out;
    out.alpha = s.alpha;
    out.point.alpha = s.alpha;
    out.point.psi = s.value;
    out.point.dpsi_plus = s.slope;
    if (s.alpha > 0.0) out.point.dpsi_minus = s.slope;
    out.status = status;
    if (s.value <= base.value + s.alpha * params.eta_armijo * base.slope) out.flags |= cond::C1;
    if (std::abs(s.slope) <= params.eta_wolfe * std::abs(base.slope))
      out.flags |= cond::C2 | cond::C3;
    out.value_evals = evals;
    out.deriv_evals = evals;
    return out;
  }

  LineSearchOutcome fail() const {
    return finish(have_best && best.value < base.value ? best : base, StepStatus::Failure);
  }

  LineSearchOutcome run() {
    base = evaluate(0.0);
    if (!(base.slope < 0.0)) return fail();

    double alpha = std::min(params.alpha_init, params.alpha_max);
    Sample prev = base;
    while (evals < params.max_evals) {
      Sample s = evaluate(alpha);
      if (is_wolfe(s)) return finish(s, StepStatus::QuasiWolfe);
      if (omega(s) >= omega(prev)) return stage_two(prev, s);
      if (omega_slope(s) >= 0.0) return stage_two(s, prev);
      if (alpha == params.alpha_max) return finish(s, StepStatus::HitAlphaMax);
      prev = s;
      alpha = std::min(params.expansion * alpha, params.alpha_max);
    }
    return fail();
  }

  LineSearchOutcome stage_two(Sample low, Sample high) {
    while (evals < params.max_evals) {
      const double lo = std::min(low.alpha, high.alpha);
      const double hi = std::max(low.alpha, high.alpha);
      if (hi - lo <= kMachineEps * std::max(1.0, low.alpha))
        return finish(low.value <= high.value ? low : high, StepStatus::Failure);

      const Sample& at_lo = low.alpha < high.alpha ? low : high;
      const Sample& at_hi = low.alpha < high.alpha ? high : low;
      double alpha_new =
          cubic_minimizer(at_lo.alpha, at_lo.value, at_lo.slope, at_hi.alpha, at_hi.value,
                          at_hi.slope);
      if (!inside_central_band(alpha_new, lo, hi)) alpha_new = 0.5 * (lo + hi);

      Sample s = evaluate(alpha_new);
      if (is_wolfe(s)) return finish(s, StepStatus::QuasiWolfe);
      if (omega(s) >= omega(low)) {
        high = s;
      } else if (omega_slope(s) * (high.alpha - low.alpha) < 0.0) {
        low = s;
      } else {
        high = low;
        low = s;
      }
    }
    return fail();
  }
};

}  // namespace

LineSearchOutcome wolfe(const ScalarOracle& phi, const SearchParams& params,
                        EvalCounter& counter) {
  WolfeSearch search{phi, params, counter};
  return search.run();
}

}  // namespace boxopt
