#pragma once

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace boxopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kMachineEps = std::numeric_limits<double>::epsilon();

/// Lower/upper bound vectors defining the feasible box.  Entries may be
/// infinite (an infinite bound never participates in projections or kink
/// computations), and lower[i] == upper[i] pins a variable at that value.
class Bounds {
 public:
  Bounds() = default;

  Bounds(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size())
      throw std::invalid_argument("Bounds: lower/upper length mismatch");
    for (Index i = 0; i < lower_.size(); ++i) {
      if (!(lower_[i] <= upper_[i]))
        throw std::invalid_argument("Bounds: lower > upper at coordinate " + std::to_string(i));
    }
  }

  static Bounds unbounded(Index n) {
    return Bounds(Vector::Constant(n, -kInfinity), Vector::Constant(n, kInfinity));
  }

  Index dim() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  bool has_lower(Index i) const { return std::isfinite(lower_[i]); }
  bool has_upper(Index i) const { return std::isfinite(upper_[i]); }
  bool is_fixed(Index i) const { return lower_[i] == upper_[i]; }

  bool contains(const Vector& x) const {
    if (x.size() != dim()) return false;
    for (Index i = 0; i < x.size(); ++i) {
      if (x[i] < lower_[i] || x[i] > upper_[i]) return false;
    }
    return true;
  }

 private:
  Vector lower_, upper_;
};

/// Counts of oracle invocations during a solve.  Each oracle call increments
/// the matching counter exactly once; counters never decrease.
struct EvalCounter {
  long n_f = 0;
  long n_g = 0;
  long n_h = 0;
};

/// Thrown when an objective oracle returns a non-finite value at a trial
/// step; carries the step at which evaluation failed.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, double alpha_at)
      : std::runtime_error(what), alpha(alpha_at) {}
  double alpha;
};

/// A smooth objective over a feasible box: value/gradient oracles, an
/// optional Hessian oracle, and a feasible start point (the supplied start
/// is clamped into the box on construction).
class BoxProblem {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  using HessianFn = std::function<Matrix(const Vector&)>;

  BoxProblem(Index dim, ValueFn value, GradientFn gradient, Bounds bounds, Vector start)
      : dim_(dim),
        value_(std::move(value)),
        gradient_(std::move(gradient)),
        bounds_(std::move(bounds)),
        start_(std::move(start)) {
    if (dim_ <= 0) throw std::invalid_argument("BoxProblem: dimension must be positive");
    if (bounds_.dim() != dim_ || start_.size() != dim_)
      throw std::invalid_argument("BoxProblem: bounds/start dimension mismatch");
    start_ = start_.cwiseMax(bounds_.lower()).cwiseMin(bounds_.upper());
  }

  BoxProblem& with_hessian(HessianFn hessian) {
    hessian_ = std::move(hessian);
    return *this;
  }

  Index dim() const { return dim_; }
  const Bounds& bounds() const { return bounds_; }
  const Vector& start() const { return start_; }
  bool has_hessian() const { return static_cast<bool>(hessian_); }

  double value(const Vector& x, EvalCounter& counter) const {
    ++counter.n_f;
    return value_(x);
  }

  Vector gradient(const Vector& x, EvalCounter& counter) const {
    ++counter.n_g;
    return gradient_(x);
  }

  Matrix hessian(const Vector& x, EvalCounter& counter) const {
    if (!hessian_) throw std::logic_error("BoxProblem: no Hessian oracle");
    ++counter.n_h;
    return hessian_(x);
  }

 private:
  Index dim_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
  Bounds bounds_;
  Vector start_;
};

enum class SolveStatus {
  Converged,
  SmallChange,
  IterLimit,
  TimeLimit,
  LineSearchFailure,
  Unbounded,
};

const char* to_string(SolveStatus status);
std::optional<SolveStatus> solve_status_from_string(const std::string& name);

/// Outcome of a solve: final point, projected-gradient norm, iteration and
/// evaluation counts, and quasi-Newton update statistics.
struct SolverReport {
  SolveStatus status = SolveStatus::IterLimit;
  Vector x_final;
  double f_final = 0.0;
  double proj_grad_norm = 0.0;  // infinity norm of the projected steepest-descent direction
  long iterations = 0;
  EvalCounter counters;
  long updates_applied = 0;
  long updates_skipped = 0;
  long hessian_modifications = 0;  // interior solver: iterations where a shift was needed
  double wall_time_s = 0.0;
};

}  // namespace boxopt
