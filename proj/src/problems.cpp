#include "boxopt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace boxopt {

bool ProblemSpec::has_tag(const std::string& tag) const {
  return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

namespace {

Vector constant(Index n, double value) { return Vector::Constant(n, value); }

// Diagonal convex quadratic 0.5 * sum a_i (x_i - c_i)^2.
BoxProblem diagonal_quadratic(const Vector& a, const Vector& c, Bounds bounds, Vector start) {
  const Index n = a.size();
  return BoxProblem(
             n,
             [a, c](const Vector& x) { return 0.5 * (a.array() * (x - c).array().square()).sum(); },
             [a, c](const Vector& x) { return (a.array() * (x - c).array()).matrix().eval(); },
             std::move(bounds), std::move(start))
      .with_hessian([a, n](const Vector&) { return Matrix(a.asDiagonal()); });
}

ProblemSpec quad_interior() {
  ProblemSpec spec;
  spec.name = "quad-interior";
  spec.summary = "diagonal convex quadratic, strictly interior minimizer";
  spec.default_dim = 10;
  spec.scalable = true;
  spec.tags = {"smooth", "convex", "has-hessian"};
  auto data = [](int n) {
    Vector a(n), c(n);
    for (int i = 0; i < n; ++i) {
      a[i] = 1.0 + i % 3;
      c[i] = 0.5 + 0.25 * (i % 4);
    }
    return std::pair{a, c};
  };
  spec.build = [data](int n) {
    auto [a, c] = data(n);
    return diagonal_quadratic(a, c, Bounds(constant(n, -1.0), constant(n, 3.0)),
                              Vector::Zero(n));
  };
  spec.solution = [data](int n) -> std::optional<KnownSolution> {
    auto [a, c] = data(n);
    return KnownSolution{c, 0.0, {}};
  };
  return spec;
}

ProblemSpec quad_active() {
  ProblemSpec spec;
  spec.name = "quad-active";
  spec.summary = "convex quadratic with one nondegenerate active lower bound";
  spec.default_dim = 2;
  spec.scalable = false;
  spec.tags = {"smooth", "convex", "has-hessian"};
  spec.build = [](int) {
    Vector lower(2), upper(2), start(2);
    lower << 0.5, -kInfinity;
    upper << kInfinity, kInfinity;
    start << 2.0, 1.0;
    return BoxProblem(
               2, [](const Vector& x) { return 0.5 * x.squaredNorm(); },
               [](const Vector& x) { return x; }, Bounds(lower, upper), start)
        .with_hessian([](const Vector&) { return Matrix::Identity(2, 2); });
  };
  spec.solution = [](int) -> std::optional<KnownSolution> {
    Vector xs(2);
    xs << 0.5, 0.0;
    return KnownSolution{xs, 0.125, {0}};
  };
  return spec;
}

ProblemSpec degenerate() {
  ProblemSpec spec;
  spec.name = "degenerate";
  spec.summary = "scaled squared norm over the nonnegative orthant; degenerate minimizer at the corner";
  spec.default_dim = 2;
  spec.scalable = false;
  spec.tags = {"smooth", "convex", "degenerate"};
  spec.build = [](int) {
    Vector start(2);
    start << 1.0, 1.0;
    return BoxProblem(
        2, [](const Vector& x) { return 0.2 * x.squaredNorm(); },
        [](const Vector& x) { return (0.4 * x).eval(); },
        Bounds(Vector::Zero(2), constant(2, kInfinity)), start);
  };
  spec.solution = [](int) -> std::optional<KnownSolution> {
    return KnownSolution{Vector::Zero(2), 0.0, {0, 1}};
  };
  return spec;
}

ProblemSpec rosenbrock(const std::string& name, int default_dim) {
  ProblemSpec spec;
  spec.name = name;
  spec.summary = "chained Rosenbrock valley inside a [-2,2] box";
  spec.default_dim = default_dim;
  spec.scalable = true;
  spec.tags = {"smooth", "nonconvex", "has-hessian"};
  spec.build = [](int n) {
    if (n < 2 || n % 2 != 0)
      throw std::invalid_argument("rosenbrock: dimension must be even and at least 2");
    Vector start(n);
    for (int i = 0; i < n; ++i) start[i] = i % 2 == 0 ? -1.2 : 1.0;
    auto value = [n](const Vector& x) {
      double f = 0.0;
      for (int i = 0; i < n; i += 2) {
        const double a = x[i], b = x[i + 1];
        f += 100.0 * (b - a * a) * (b - a * a) + (1.0 - a) * (1.0 - a);
      }
      return f;
    };
    auto gradient = [n](const Vector& x) {
      Vector g = Vector::Zero(n);
      for (int i = 0; i < n; i += 2) {
        const double a = x[i], b = x[i + 1];
        g[i] = -400.0 * a * (b - a * a) - 2.0 * (1.0 - a);
        g[i + 1] = 200.0 * (b - a * a);
      }
      return g;
    };
    auto hessian = [n](const Vector& x) {
      Matrix h = Matrix::Zero(n, n);
      for (int i = 0; i < n; i += 2) {
        const double a = x[i], b = x[i + 1];
        h(i, i) = 1200.0 * a * a - 400.0 * b + 2.0;
        h(i, i + 1) = h(i + 1, i) = -400.0 * a;
        h(i + 1, i + 1) = 200.0;
      }
      return h;
    };
    return BoxProblem(n, value, gradient, Bounds(constant(n, -2.0), constant(n, 2.0)), start)
        .with_hessian(hessian);
  };
  spec.solution = [](int n) -> std::optional<KnownSolution> {
    return KnownSolution{Vector::Ones(n), 0.0, {}};
  };
  return spec;
}

// Correlated quadratic whose unconstrained minimizer sits across the x1 = 0
// bound, so descent paths from the interior bend at that bound before
// reaching their one-dimensional minimizer.  A cosine ripple in x1 (zero
// value, slope, and gradient contribution at x1 = 0, so the solution data is
// untouched) creates pockets of negative curvature: approximate-curvature
// pairs gathered across the bend can fail the update guard, which is the
// behavior this family exists to exercise.
ProblemSpec bent_path(int variant) {
  const double q11 = 1.0 + 0.3 * variant;
  const double q12 = 0.8 + 0.05 * variant;
  const double q22 = 2.0 + 0.2 * variant;
  const double m1 = -(0.5 + 0.1 * variant);
  const double m2 = 1.0 + 0.15 * variant;
  const double ripple = 0.20 + 0.02 * variant;
  const double freq = 3.0;

  ProblemSpec spec;
  spec.name = "bent-path-" + std::to_string(variant);
  spec.summary = "rippled quadratic with its unconstrained minimizer beyond the x1 lower bound";
  spec.default_dim = 2;
  spec.scalable = false;
  spec.tags = {"smooth", "nonconvex", "bent-path"};
  spec.build = [=](int) {
    Matrix q(2, 2);
    q << q11, q12, q12, q22;
    Vector m(2);
    m << m1, m2;
    Vector start(2);
    start << 1.5 + 0.05 * variant, 0.05;
    return BoxProblem(
        2,
        [q, m, ripple, freq](const Vector& x) {
          return 0.5 * (x - m).dot(q * (x - m)) + ripple * (1.0 - std::cos(freq * x[0]));
        },
        [q, m, ripple, freq](const Vector& x) {
          Vector g = q * (x - m);
          g[0] += ripple * freq * std::sin(freq * x[0]);
          return g;
        },
        Bounds(Vector::Zero(2), constant(2, kInfinity)), start);
  };
  spec.solution = [=](int) -> std::optional<KnownSolution> {
    Matrix q(2, 2);
    q << q11, q12, q12, q22;
    Vector m(2);
    m << m1, m2;
    Vector xs(2);
    xs << 0.0, m2 + q12 * m1 / q22;
    return KnownSolution{xs, 0.5 * (xs - m).dot(q * (xs - m)), {0}};
  };
  return spec;
}

ProblemSpec linear_box() {
  ProblemSpec spec;
  spec.name = "linear-box";
  spec.summary = "linear objective over the unit box; fully active nondegenerate vertex";
  spec.default_dim = 8;
  spec.scalable = true;
  spec.tags = {"smooth", "convex", "has-hessian"};
  spec.build = [](int n) {
    return BoxProblem(
               n, [](const Vector& x) { return x.sum(); },
               [n](const Vector&) { return Vector::Ones(n).eval(); },
               Bounds(Vector::Zero(n), Vector::Ones(n)), constant(n, 0.5))
        .with_hessian([n](const Vector&) { return Matrix::Zero(n, n); });
  };
  spec.solution = [](int n) -> std::optional<KnownSolution> {
    std::vector<int> active(n);
    for (int i = 0; i < n; ++i) active[i] = i;
    return KnownSolution{Vector::Zero(n), 0.0, active};
  };
  return spec;
}

ProblemSpec illcond_quad() {
  ProblemSpec spec;
  spec.name = "illcond-quad";
  spec.summary = "diagonal quadratic with condition number 1e6";
  spec.default_dim = 6;
  spec.scalable = true;
  spec.tags = {"smooth", "convex", "has-hessian"};
  auto data = [](int n) {
    if (n < 2) throw std::invalid_argument("illcond-quad: dimension must be at least 2");
    Vector a(n), c(n);
    for (int i = 0; i < n; ++i) {
      a[i] = std::pow(10.0, 6.0 * i / (n - 1));
      c[i] = 1.0 + 0.5 * (i % 3);
    }
    return std::pair{a, c};
  };
  spec.build = [data](int n) {
    auto [a, c] = data(n);
    return diagonal_quadratic(a, c, Bounds(constant(n, -10.0), constant(n, 10.0)),
                              constant(n, -5.0));
  };
  spec.solution = [data](int n) -> std::optional<KnownSolution> {
    auto [a, c] = data(n);
    return KnownSolution{c, 0.0, {}};
  };
  return spec;
}

ProblemSpec nonconvex_quartic() {
  ProblemSpec spec;
  spec.name = "nonconvex-quartic";
  spec.summary = "separable double-well quartic; indefinite Hessian near the start";
  spec.default_dim = 4;
  spec.scalable = true;
  spec.tags = {"smooth", "nonconvex", "has-hessian"};
  spec.build = [](int n) {
    // The box is wide so the barrier curvature at the start cannot mask the
    // negative objective curvature there.
    return BoxProblem(
               n,
               [](const Vector& x) {
                 return (0.25 * x.array().pow(4) - 0.5 * x.array().square()).sum();
               },
               [](const Vector& x) { return (x.array().cube() - x.array()).matrix().eval(); },
               Bounds(constant(n, -10.0), constant(n, 10.0)), constant(n, 0.5))
        .with_hessian([](const Vector& x) {
          return Matrix((3.0 * x.array().square() - 1.0).matrix().asDiagonal());
        });
  };
  spec.solution = [](int n) -> std::optional<KnownSolution> {
    return KnownSolution{Vector::Ones(n), -0.25 * n, {}};
  };
  return spec;
}

}  // namespace

const std::vector<ProblemSpec>& catalog() {
  static const std::vector<ProblemSpec> problems = [] {
    std::vector<ProblemSpec> list;
    list.push_back(quad_interior());
    list.push_back(quad_active());
    list.push_back(degenerate());
    list.push_back(rosenbrock("rosenbrock-box", 2));
    list.push_back(rosenbrock("rosenbrock-ext", 100));
    for (int t = 0; t < 10; ++t) list.push_back(bent_path(t));
    list.push_back(linear_box());
    list.push_back(illcond_quad());
    list.push_back(nonconvex_quartic());
    return list;
  }();
  return problems;
}

const ProblemSpec* find_problem(const std::string& name) {
  for (const ProblemSpec& spec : catalog())
    if (spec.name == name) return &spec;
  return nullptr;
}

bool is_stationary(const BoxProblem& problem, const Vector& x, double tol) {
  EvalCounter scratch;
  const Vector g = problem.gradient(x, scratch);
  const Bounds& bounds = problem.bounds();
  for (Index i = 0; i < x.size(); ++i) {
    if (bounds.is_fixed(i)) continue;
    const bool at_lower = x[i] == bounds.lower()[i];
    const bool at_upper = x[i] == bounds.upper()[i];
    if (at_lower) {
      if (g[i] < -tol) return false;
    } else if (at_upper) {
      if (g[i] > tol) return false;
    } else if (std::abs(g[i]) > tol) {
      return false;
    }
  }
  return true;
}

std::vector<int> active_set_at(const Vector& x, const Bounds& bounds) {
  std::vector<int> active;
  for (Index i = 0; i < x.size(); ++i)
    if (x[i] == bounds.lower()[i] || x[i] == bounds.upper()[i])
      active.push_back(static_cast<int>(i));
  return active;
}

}  // namespace boxopt
