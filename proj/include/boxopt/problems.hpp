#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "boxopt/types.hpp"

namespace boxopt {

/// A known stationary point of a test problem, with its objective value and
/// exact active set (0-based indices).
struct KnownSolution {
  Vector x;
  double f = 0.0;
  std::vector<int> active;
};

struct ProblemSpec {
  std::string name;
  std::string summary;
  int default_dim = 2;
  bool scalable = false;
  std::vector<std::string> tags;
  std::function<BoxProblem(int)> build;
  std::function<std::optional<KnownSolution>(int)> solution;

  BoxProblem make() const { return build(default_dim); }
  bool has_tag(const std::string& tag) const;
};

/// The native test-problem library.
const std::vector<ProblemSpec>& catalog();

const ProblemSpec* find_problem(const std::string& name);

/// First-order stationarity over the box: interior gradient components
/// vanish, components at the lower bound are nonnegative, components at the
/// upper bound are nonpositive (all to within tol).
bool is_stationary(const BoxProblem& problem, const Vector& x, double tol = 1e-10);

/// Exact active set A(x): coordinates sitting on a finite bound.
std::vector<int> active_set_at(const Vector& x, const Bounds& bounds);

}  // namespace boxopt
