#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "boxopt/projection.hpp"
#include "boxopt/types.hpp"

namespace boxopt {

/// Step-acceptance parameters shared by the searches.
struct SearchParams {
  double eta_armijo = 1e-4;  // sufficient-decrease fraction, in (0, 1/2)
  double eta_wolfe = 0.9;    // curvature fraction, in (eta_armijo, 1)
  double expansion = 2.0;    // stage-one step growth factor, > 1
  double backtrack = 0.5;    // backtracking contraction, in (0, 1)
  double alpha_max = 1e8;
  double alpha_init = 1.0;
  int max_evals = 60;
  int max_consecutive_kinks = 3;

  static SearchParams quasi_wolfe_defaults() { return SearchParams{}; }

  static SearchParams quasi_armijo_defaults() {
    SearchParams p;
    p.eta_armijo = 0.3;
    return p;
  }
};

enum class StepStatus { QuasiWolfe, Armijo, HitAlphaMax, Failure };

/// Bitmask of the four step-acceptance conditions on a projected path:
/// C1 sufficient decrease, C2/C3 left/right curvature, C4 the kink sign
/// condition (left derivative <= 0 <= right derivative at a kink).
namespace cond {
inline constexpr unsigned C1 = 1u << 0;
inline constexpr unsigned C2 = 1u << 1;
inline constexpr unsigned C3 = 1u << 2;
inline constexpr unsigned C4 = 1u << 3;
}  // namespace cond
using CondFlags = unsigned;

inline bool is_quasi_wolfe_accepted(CondFlags flags) {
  return (flags & cond::C1) && (flags & (cond::C2 | cond::C3 | cond::C4));
}

struct LineSearchOutcome {
  double alpha = 0.0;
  PathPoint point;
  StepStatus status = StepStatus::Failure;
  CondFlags flags = 0;
  long value_evals = 0;
  long deriv_evals = 0;
};

/// Optional insight into the bracketing phase, for tests and debugging.
struct SearchDiagnostics {
  struct BracketState {
    double alpha_low;
    double alpha_high;
    int kinks_inside;
    bool trial_was_kink;
  };
  std::vector<BracketState> brackets;
  long invariant_violations = 0;  // stage-two entry conditions that failed to hold
};

/// The auxiliary function driving the bracketing logic: the path value
/// shifted by the sufficient-decrease line through the base point, together
/// with its one-sided derivatives.  Zero at the base point by construction
/// (computed from the stored base values, never re-evaluated).
struct AuxOmega {
  double value = 0.0;
  double d_plus = 0.0;
  std::optional<double> d_minus;
};
AuxOmega aux_omega(const PathPoint& point, const PathPoint& base, const SearchParams& params);

/// Evaluates which of the four acceptance conditions hold at `point`, given
/// the path's base point (alpha = 0, with a negative right derivative).
CondFlags quasi_wolfe_flags(const PathPoint& point, const PathPoint& base,
                            const SearchParams& params);

/// Backtracking search: the largest step alpha_init * backtrack^t satisfying
/// the sufficient-decrease condition along the projected path.  Trials cost
/// one objective call each; the accepted point costs one gradient call.
LineSearchOutcome quasi_armijo(const SearchPath& path, const BoxProblem& problem,
                               const SearchParams& params, EvalCounter& counter,
                               const PathPoint* base = nullptr);

/// Two-stage search for a step satisfying C1 and at least one of C2/C3/C4.
/// Stage one expands the trial step until it is acceptable, a bracket is
/// detected, or alpha_max is reached (in which case the last trial satisfies
/// C1 and is returned as HitAlphaMax).  Stage two shrinks the bracket,
/// preferring kink steps nearest the low end, with bisection after too many
/// consecutive kink trials and safeguarded cubic interpolation once the
/// bracket is kink-free.
LineSearchOutcome quasi_wolfe(const SearchPath& path, const BoxProblem& problem,
                              const SearchParams& params, EvalCounter& counter,
                              const PathPoint* base = nullptr,
                              SearchDiagnostics* diagnostics = nullptr);

/// Univariate oracle for the classical search: value and derivative at alpha.
using ScalarOracle = std::function<std::pair<double, double>(double)>;

/// Classical two-stage strong-Wolfe search on a smooth univariate function.
/// Each oracle call is tallied as one value and one derivative evaluation.
LineSearchOutcome wolfe(const ScalarOracle& phi, const SearchParams& params,
                        EvalCounter& counter);

}  // namespace boxopt
