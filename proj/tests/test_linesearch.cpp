#include <doctest.h>

#include <cmath>

#include "boxopt/linesearch.hpp"
#include "test_support.hpp"

using namespace boxopt;
using testsupport::Rng;

namespace {

BoxProblem square_1d() {
  // f(t) = t^2 / 2 on the whole line.
  return BoxProblem(
      1, [](const Vector& x) { return 0.5 * x[0] * x[0]; }, [](const Vector& x) { return x; },
      Bounds::unbounded(1), Vector::Ones(1));
}

BoxProblem shifted_square_1d() {
  // f(t) = (t + 1)^2 over t >= 0.
  Vector lo(1), hi(1);
  lo << 0.0;
  hi << kInfinity;
  return BoxProblem(
      1, [](const Vector& x) { return (x[0] + 1.0) * (x[0] + 1.0); },
      [](const Vector& x) {
        Vector g(1);
        g << 2.0 * (x[0] + 1.0);
        return g;
      },
      Bounds(lo, hi), Vector::Ones(1));
}

// 0.5 * ||x - m||^2 over a box; the workhorse for engineered path shapes.
BoxProblem target_quadratic(const Vector& m, Bounds bounds, const Vector& start) {
  return BoxProblem(
      static_cast<int>(m.size()),
      [m](const Vector& x) { return 0.5 * (x - m).squaredNorm(); },
      [m](const Vector& x) { return (x - m).eval(); }, std::move(bounds), start);
}

LineSearchOutcome run_quasi_wolfe(const BoxProblem& problem, const Vector& p,
                                  const SearchParams& params, EvalCounter& counter,
                                  SearchDiagnostics* diag = nullptr) {
  SearchPath path(problem.start(), p, problem.bounds());
  return quasi_wolfe(path, problem, params, counter, nullptr, diag);
}

}  // namespace

TEST_CASE("acceptance flags at an exact smooth minimizer") {
  const BoxProblem problem = square_1d();
  SearchPath path(problem.start(), Vector::Constant(1, -1.0), problem.bounds());
  EvalCounter counter;
  const PathPoint base = eval_path(path, 0.0, problem, counter);
  const PathPoint pt = eval_path(path, 1.0, problem, counter);
  const CondFlags flags = quasi_wolfe_flags(pt, base, SearchParams::quasi_wolfe_defaults());
  CHECK(flags == (cond::C1 | cond::C2 | cond::C3));
}

TEST_CASE("acceptance flags at a kink with a sign change") {
  const BoxProblem problem = shifted_square_1d();
  SearchPath path(problem.start(), Vector::Constant(1, -2.0), problem.bounds());
  EvalCounter counter;
  const PathPoint base = eval_path(path, 0.0, problem, counter);
  const PathPoint pt = eval_path(path, 0.5, problem, counter);
  REQUIRE(pt.is_kink);
  const CondFlags flags = quasi_wolfe_flags(pt, base, SearchParams::quasi_wolfe_defaults());
  // psi-'(0.5) = -4 and psi+'(0.5) = 0 against |psi+'(0)| = 8: every
  // curvature condition holds at this kink, including the sign test.
  CHECK(flags == (cond::C1 | cond::C2 | cond::C3 | cond::C4));
}

TEST_CASE("ascent past the minimizer loses the decrease condition") {
  const BoxProblem problem = square_1d();
  SearchPath path(problem.start(), Vector::Constant(1, -1.0), problem.bounds());
  EvalCounter counter;
  const PathPoint base = eval_path(path, 0.0, problem, counter);
  const PathPoint pt = eval_path(path, 2.5, problem, counter);
  CHECK((quasi_wolfe_flags(pt, base, SearchParams::quasi_wolfe_defaults()) & cond::C1) == 0);
}

TEST_CASE("quasi-Wolfe accepts the unit step on the simple quadratic") {
  const BoxProblem problem = square_1d();
  EvalCounter counter;
  const auto out = run_quasi_wolfe(problem, Vector::Constant(1, -1.0),
                                   SearchParams::quasi_wolfe_defaults(), counter);
  CHECK(out.status == StepStatus::QuasiWolfe);
  CHECK(out.alpha == 1.0);
  CHECK(out.flags == (cond::C1 | cond::C2 | cond::C3));
}

TEST_CASE("quasi-Wolfe accepts the first trial past the kink when curvature is loose") {
  // At alpha = 1 the path is already pinned at the bound, psi+'(1) = 0, and
  // the sufficient-decrease line is far above psi(1) = 1: the very first
  // trial is a quasi-Wolfe step, no bracketing needed.
  const BoxProblem problem = shifted_square_1d();
  EvalCounter counter;
  const auto out = run_quasi_wolfe(problem, Vector::Constant(1, -2.0),
                                   SearchParams::quasi_wolfe_defaults(), counter);
  CHECK(out.status == StepStatus::QuasiWolfe);
  CHECK(out.alpha == 1.0);
  CHECK(out.point.psi == 1.0);
  CHECK((out.flags & cond::C1) != 0);
  CHECK((out.flags & cond::C3) != 0);
}

TEST_CASE("stage two targets the kink and accepts it with the sign condition") {
  // f(x, y) = (x+1)^2 + 2 (y - 0.2)^2 with x >= 0, start (1, 1), direction
  // (-2, -2): the only kink is at 0.5, where the left slope is -2.4 and the
  // right slope +1.6.  An oversized first trial forces a bracket.
  Vector lo(2), hi(2), start(2), p(2);
  lo << 0.0, -kInfinity;
  hi << kInfinity, kInfinity;
  start << 1.0, 1.0;
  p << -2.0, -2.0;
  BoxProblem problem(
      2,
      [](const Vector& x) {
        return (x[0] + 1.0) * (x[0] + 1.0) + 2.0 * (x[1] - 0.2) * (x[1] - 0.2);
      },
      [](const Vector& x) {
        Vector g(2);
        g << 2.0 * (x[0] + 1.0), 4.0 * (x[1] - 0.2);
        return g;
      },
      Bounds(lo, hi), start);

  SearchParams params = SearchParams::quasi_wolfe_defaults();
  params.alpha_init = 4.0;
  EvalCounter counter;
  SearchDiagnostics diag;
  SearchPath path(start, p, problem.bounds());
  const auto out = quasi_wolfe(path, problem, params, counter, nullptr, &diag);
  CHECK(out.status == StepStatus::QuasiWolfe);
  CHECK(out.alpha == 0.5);
  CHECK((out.flags & cond::C4) != 0);
  CHECK(out.point.psi == doctest::Approx(1.08));
  REQUIRE(diag.brackets.size() == 1);
  CHECK(diag.brackets[0].kinks_inside == 1);
  CHECK(diag.brackets[0].trial_was_kink);
  CHECK(diag.invariant_violations == 0);
}

TEST_CASE("staircase bracket: kink proposals, bisection cap, cubic finish") {
  // Four coordinates marching toward upper bounds at 1, 2, 3 while the last
  // coordinate is free and turns the function upward; the one-dimensional
  // restriction dips between the kinks at 2 and 3 with its minimizer at 2.5.
  Vector m(4), hi(4), start(4), p(4);
  m << 10.0, 10.0, 10.0, -5.0;
  hi << 1.0, 2.0, 3.0, kInfinity;
  start.setZero();
  p.setOnes();
  BoxProblem problem = target_quadratic(m, Bounds(Vector::Constant(4, -kInfinity), hi), start);

  SearchParams params = SearchParams::quasi_wolfe_defaults();
  params.alpha_init = 8.0;
  params.eta_wolfe = 0.01;  // tight curvature keeps the kink trials alive
  params.max_consecutive_kinks = 1;
  EvalCounter counter;
  SearchDiagnostics diag;
  SearchPath path(start, p, problem.bounds());
  const auto out = quasi_wolfe(path, problem, params, counter, nullptr, &diag);

  CHECK(out.status == StepStatus::QuasiWolfe);
  CHECK(out.alpha == 2.5);  // cubic interpolation is exact on the quadratic piece
  CHECK(out.point.psi == doctest::Approx(128.75));
  CHECK(out.value_evals == 8);  // base plus trials at 8, 1, 4.5, 2, 3.25, 3, 2.5
  CHECK(diag.invariant_violations == 0);

  REQUIRE(diag.brackets.size() == 6);
  // Nested intervals of uncertainty.
  for (size_t i = 1; i < diag.brackets.size(); ++i) {
    const auto& prev = diag.brackets[i - 1];
    const auto& cur = diag.brackets[i];
    CHECK(std::min(cur.alpha_low, cur.alpha_high) >=
          std::min(prev.alpha_low, prev.alpha_high));
    CHECK(std::max(cur.alpha_low, cur.alpha_high) <=
          std::max(prev.alpha_low, prev.alpha_high));
  }
  // Kink counts never grow, and every kink trial removes at least one kink.
  for (size_t i = 1; i < diag.brackets.size(); ++i) {
    CHECK(diag.brackets[i].kinks_inside <= diag.brackets[i - 1].kinks_inside);
    if (diag.brackets[i - 1].trial_was_kink)
      CHECK(diag.brackets[i].kinks_inside < diag.brackets[i - 1].kinks_inside);
  }
  // The consecutive-kink cap (1 here) forces an interleaved bisection.
  for (size_t i = 1; i < diag.brackets.size(); ++i)
    CHECK(!(diag.brackets[i].trial_was_kink && diag.brackets[i - 1].trial_was_kink));
  CHECK(!diag.brackets[1].trial_was_kink);
  CHECK(diag.brackets[1].kinks_inside > 0);
}

TEST_CASE("a descent ray on an unbounded function runs out at alpha_max") {
  BoxProblem problem(
      1, [](const Vector& x) { return -x[0]; },
      [](const Vector&) { return Vector::Constant(1, -1.0).eval(); }, Bounds::unbounded(1),
      Vector::Zero(1));
  SearchParams params = SearchParams::quasi_wolfe_defaults();
  params.alpha_max = 64.0;
  EvalCounter counter;
  const auto out = run_quasi_wolfe(problem, Vector::Ones(1), params, counter);
  CHECK(out.status == StepStatus::HitAlphaMax);
  CHECK(out.alpha == 64.0);
  CHECK((out.flags & cond::C1) != 0);
}

TEST_CASE("search failure reports the evaluation budget point") {
  Vector m(4), hi(4);
  m << 10.0, 10.0, 10.0, -5.0;
  hi << 1.0, 2.0, 3.0, kInfinity;
  BoxProblem problem = target_quadratic(m, Bounds(Vector::Constant(4, -kInfinity), hi),
                                        Vector::Zero(4));
  SearchParams params = SearchParams::quasi_wolfe_defaults();
  params.alpha_init = 8.0;
  params.eta_wolfe = 0.01;
  params.max_evals = 3;
  EvalCounter counter;
  const auto out = run_quasi_wolfe(problem, Vector::Ones(4), params, counter);
  CHECK(out.status == StepStatus::Failure);
  CHECK(out.point.psi < 162.5);  // still returns the best point it saw
}

TEST_CASE("quasi-Armijo accepts the first trial on a well-scaled quadratic") {
  Vector start(2);
  start << 1.0, 1.0;
  BoxProblem problem(
      2, [](const Vector& x) { return 0.5 * x.squaredNorm(); },
      [](const Vector& x) { return x; }, Bounds::unbounded(2), start);
  SearchParams params = SearchParams::quasi_armijo_defaults();
  EvalCounter counter;
  SearchPath path(start, (-start).eval(), problem.bounds());
  const auto out = quasi_armijo(path, problem, params, counter);
  CHECK(out.status == StepStatus::Armijo);
  CHECK(out.alpha == 1.0);
  CHECK(out.point.psi == 0.0);
}

TEST_CASE("quasi-Armijo backtracks a fixed number of times from a long first step") {
  const BoxProblem problem = square_1d();
  SearchParams params = SearchParams::quasi_armijo_defaults();
  params.alpha_init = 16.0;
  EvalCounter counter;
  SearchPath path(problem.start(), Vector::Constant(1, -1.0), problem.bounds());
  const PathPoint base = eval_path(path, 0.0, problem, counter);
  const auto out = quasi_armijo(path, problem, params, counter, &base);
  CHECK(out.status == StepStatus::Armijo);
  CHECK(out.alpha == 1.0);  // 16 -> 8 -> 4 -> 2 -> 1
  CHECK(out.value_evals == 5);
  CHECK(counter.n_f == 6);  // base + five trials
}

TEST_CASE("quasi-Armijo accepts immediately for tiny initial steps") {
  const BoxProblem problem = square_1d();
  SearchParams params = SearchParams::quasi_armijo_defaults();
  params.alpha_init = 1e-8;
  EvalCounter counter;
  SearchPath path(problem.start(), Vector::Constant(1, -1.0), problem.bounds());
  const auto out = quasi_armijo(path, problem, params, counter);
  CHECK(out.status == StepStatus::Armijo);
  CHECK(out.alpha == 1e-8);
}

TEST_CASE("non-descent directions fail both searches up front") {
  const BoxProblem problem = square_1d();
  EvalCounter counter;
  SearchPath path(problem.start(), Vector::Ones(1), problem.bounds());  // uphill
  CHECK(quasi_armijo(path, problem, SearchParams::quasi_armijo_defaults(), counter).status ==
        StepStatus::Failure);
  CHECK(quasi_wolfe(path, problem, SearchParams::quasi_wolfe_defaults(), counter).status ==
        StepStatus::Failure);
}

TEST_CASE("classical Wolfe search on a parabola with an exact minimizer") {
  const ScalarOracle phi = [](double a) {
    return std::make_pair((a - 1.0) * (a - 1.0), 2.0 * (a - 1.0));
  };
  EvalCounter counter;
  const auto out = wolfe(phi, SearchParams::quasi_wolfe_defaults(), counter);
  CHECK(out.status == StepStatus::QuasiWolfe);
  CHECK(out.alpha == 1.0);
  CHECK(out.point.dpsi_plus == 0.0);
}

TEST_CASE("classical Wolfe search hits alpha_max on a linear decline") {
  const ScalarOracle phi = [](double a) { return std::make_pair(-a, -1.0); };
  SearchParams params = SearchParams::quasi_wolfe_defaults();
  params.alpha_max = 32.0;
  EvalCounter counter;
  const auto out = wolfe(phi, params, counter);
  CHECK(out.status == StepStatus::HitAlphaMax);
  CHECK(out.alpha == 32.0);
}

TEST_CASE("loose and tight curvature settings on the shifted parabola") {
  const ScalarOracle phi = [](double a) {
    return std::make_pair(0.5 * (a - 2.0) * (a - 2.0), a - 2.0);
  };
  EvalCounter counter;
  // Defaults accept the first trial: |phi'(1)| = 1 <= 0.9 * 2.
  auto out = wolfe(phi, SearchParams::quasi_wolfe_defaults(), counter);
  CHECK(out.status == StepStatus::QuasiWolfe);
  CHECK(out.alpha == 1.0);
  // A tight tolerance pushes stage one to the exact minimizer at 2.
  SearchParams tight = SearchParams::quasi_wolfe_defaults();
  tight.eta_wolfe = 0.1;
  out = wolfe(phi, tight, counter);
  CHECK(out.status == StepStatus::QuasiWolfe);
  CHECK(out.alpha == 2.0);
}

TEST_CASE("classical Wolfe stage two interpolates the quadratic exactly") {
  const ScalarOracle phi = [](double a) {
    return std::make_pair((0.7 - a) * (0.7 - a), -2.0 * (0.7 - a));
  };
  SearchParams params = SearchParams::quasi_wolfe_defaults();
  params.eta_wolfe = 0.1;
  EvalCounter counter;
  const auto out = wolfe(phi, params, counter);
  CHECK(out.status == StepStatus::QuasiWolfe);
  CHECK(out.alpha == 0.7);
  CHECK(out.point.psi == 0.0);
}

TEST_CASE("accepted steps survive a from-scratch condition re-check") {
  Rng rng(2024);
  const SearchParams params = SearchParams::quasi_wolfe_defaults();
  int accepted = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = testsupport::uniform_int(rng, 1, 8);
    const Bounds box = testsupport::random_box(rng, n);
    const Vector x0 = testsupport::random_feasible(rng, box);
    BoxProblem problem = trial % 2 == 0 ? testsupport::random_quadratic(rng, n, box, x0)
                                        : testsupport::random_quartic(rng, n, box, x0);
    EvalCounter counter;
    const Vector g0 = problem.gradient(x0, counter);
    Vector p = -g0;
    for (int i = 0; i < n; ++i) p[i] *= testsupport::uniform(rng, 0.25, 2.0);
    SearchPath path(x0, p, box);
    const PathPoint base = make_base_point(path, problem.value(x0, counter), g0);
    if (!(base.dpsi_plus < 0.0)) continue;
    const auto out = quasi_wolfe(path, problem, params, counter, &base);
    if (out.status != StepStatus::QuasiWolfe) continue;
    ++accepted;
    const unsigned again = testsupport::recheck_conditions(problem, x0, p, out.alpha,
                                                           params.eta_armijo, params.eta_wolfe);
    CHECK(again == out.flags);
    CHECK(is_quasi_wolfe_accepted(again));
  }
  CHECK(accepted >= 150);
}

TEST_CASE("with infinite bounds accepted steps satisfy the strong Wolfe conditions") {
  Rng rng(4096);
  const SearchParams params = SearchParams::quasi_wolfe_defaults();
  int accepted = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = testsupport::uniform_int(rng, 1, 8);
    const Bounds box = Bounds::unbounded(n);
    Vector x0(n);
    for (int i = 0; i < n; ++i) x0[i] = testsupport::uniform(rng, -2.0, 2.0);
    BoxProblem problem = trial % 2 == 0 ? testsupport::random_quadratic(rng, n, box, x0)
                                        : testsupport::random_quartic(rng, n, box, x0);
    EvalCounter counter;
    const Vector g0 = problem.gradient(x0, counter);
    Vector p = -g0;
    for (int i = 0; i < n; ++i) p[i] *= testsupport::uniform(rng, 0.25, 2.0);
    if (!(g0.dot(p) < 0.0)) continue;
    SearchPath path(x0, p, box);
    const auto out = quasi_wolfe(path, problem, params, counter);
    REQUIRE(out.status == StepStatus::QuasiWolfe);
    ++accepted;

    const double f0 = problem.value(x0, counter);
    const Vector xa = x0 + out.alpha * p;
    const double fa = problem.value(xa, counter);
    const double slope_a = problem.gradient(xa, counter).dot(p);
    CHECK(fa <= f0 + out.alpha * params.eta_armijo * g0.dot(p));
    CHECK(std::abs(slope_a) <= params.eta_wolfe * std::abs(g0.dot(p)));
  }
  CHECK(accepted >= 90);
}

TEST_CASE("outcome evaluation counts equal the counter deltas") {
  Vector m(4), hi(4);
  m << 10.0, 10.0, 10.0, -5.0;
  hi << 1.0, 2.0, 3.0, kInfinity;
  BoxProblem problem = target_quadratic(m, Bounds(Vector::Constant(4, -kInfinity), hi),
                                        Vector::Zero(4));
  SearchParams params = SearchParams::quasi_wolfe_defaults();
  params.alpha_init = 8.0;
  params.eta_wolfe = 0.01;
  EvalCounter counter;
  SearchPath path(problem.start(), Vector::Ones(4), problem.bounds());
  const auto out = quasi_wolfe(path, problem, params, counter);
  CHECK(counter.n_f == out.value_evals);
  CHECK(counter.n_g == out.deriv_evals);
}

TEST_CASE("the auxiliary function vanishes exactly at the base point") {
  const BoxProblem problem = shifted_square_1d();
  SearchPath path(problem.start(), Vector::Constant(1, -2.0), problem.bounds());
  EvalCounter counter;
  const PathPoint base = eval_path(path, 0.0, problem, counter);
  const SearchParams params = SearchParams::quasi_wolfe_defaults();
  const AuxOmega at_base = aux_omega(base, base, params);
  CHECK(at_base.value == 0.0);
  CHECK(at_base.d_plus == (1.0 - params.eta_armijo) * base.dpsi_plus);
  CHECK(!at_base.d_minus.has_value());

  const PathPoint pt = eval_path(path, 0.5, problem, counter);
  const AuxOmega at_kink = aux_omega(pt, base, params);
  CHECK(at_kink.value == pt.psi - base.psi - 0.5 * params.eta_armijo * base.dpsi_plus);
  REQUIRE(at_kink.d_minus.has_value());
  CHECK(*at_kink.d_minus == *pt.dpsi_minus - params.eta_armijo * base.dpsi_plus);
  CHECK(at_kink.d_plus == pt.dpsi_plus - params.eta_armijo * base.dpsi_plus);
}

TEST_CASE("every stage-two bracket contains a quasi-Wolfe step") {
  // Dense-grid oracle on box-constrained quadratics: each interval of
  // uncertainty the search visits must hold at least one acceptable step.
  Rng rng(31337);
  const SearchParams params = SearchParams::quasi_wolfe_defaults();
  int brackets_checked = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const int n = testsupport::uniform_int(rng, 1, 4);
    const Bounds box = testsupport::random_box(rng, n, 0.9);
    const Vector x0 = testsupport::random_feasible(rng, box);
    BoxProblem problem = testsupport::random_quadratic(rng, n, box, x0);
    EvalCounter counter;
    const Vector g0 = problem.gradient(x0, counter);
    Vector p = -g0;
    for (int i = 0; i < n; ++i) p[i] *= testsupport::uniform(rng, 0.25, 2.0);
    SearchPath path(x0, p, box);
    const PathPoint base = make_base_point(path, problem.value(x0, counter), g0);
    if (!(base.dpsi_plus < 0.0)) continue;

    SearchParams tight = params;
    tight.eta_wolfe = 0.2;     // provoke more stage-two work
    tight.alpha_init = 16.0;   // oversized first trial
    SearchDiagnostics diag;
    const auto out = quasi_wolfe(path, problem, tight, counter, &base, &diag);
    if (out.status != StepStatus::QuasiWolfe) continue;

    for (const auto& bracket : diag.brackets) {
      const double lo = std::min(bracket.alpha_low, bracket.alpha_high);
      const double hi = std::max(bracket.alpha_low, bracket.alpha_high);
      // Candidate steps: a grid, the exact kink steps inside, and the
      // per-segment stationary points of the piecewise-quadratic restriction
      // (located by linear interpolation of the slope, independently of the
      // search).
      std::vector<double> candidates;
      for (int j = 1; j < 200; ++j) candidates.push_back(lo + (hi - lo) * j / 200.0);
      std::vector<double> seams = {lo, hi};
      for (const Kink& k : path.kinks())
        if (k.step > lo && k.step < hi) {
          candidates.push_back(k.step);
          seams.push_back(k.step);
        }
      std::sort(seams.begin(), seams.end());
      const testsupport::PathOracle oracle(x0, p, box);
      EvalCounter scratch;
      for (size_t s = 1; s < seams.size(); ++s) {
        const double a = seams[s - 1], b = seams[s];
        const double t1 = a + 0.25 * (b - a), t2 = a + 0.75 * (b - a);
        const double s1 = oracle.dpsi_plus(t1, problem.gradient(oracle.point(t1), scratch));
        const double s2 = oracle.dpsi_plus(t2, problem.gradient(oracle.point(t2), scratch));
        if (s1 != s2) {
          const double root = t1 + (t2 - t1) * (0.0 - s1) / (s2 - s1);
          if (root > a && root < b) candidates.push_back(root);
        }
      }
      bool found = false;
      for (double a : candidates) {
        if (a <= 0.0) continue;
        const unsigned flags = testsupport::recheck_conditions(problem, x0, p, a,
                                                               tight.eta_armijo,
                                                               tight.eta_wolfe);
        if ((flags & 1u) && (flags & 14u)) {
          found = true;
          break;
        }
      }
      CHECK(found);
      ++brackets_checked;
    }
  }
  CHECK(brackets_checked >= 30);
}
