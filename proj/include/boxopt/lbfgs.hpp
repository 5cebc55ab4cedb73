#pragma once

#include <deque>
#include <vector>

#include "boxopt/types.hpp"

namespace boxopt {

enum class UpdateResult { Applied, Skipped };

/// Limited-memory BFGS model of the inverse Hessian, stored as (s, y) pairs
/// with a relative curvature guard.  Directions are produced on a free
/// subspace: the mask is applied to the gradient and to every stored pair
/// inside the two-loop recursion, since the working set changes from one
/// iteration to the next.
class LbfgsMemory {
 public:
  explicit LbfgsMemory(int memory = 8, double curvature_floor = 1e-8)
      : memory_(memory), curvature_floor_(curvature_floor) {}

  /// Stores the pair if its curvature s'y clears the relative floor,
  /// evicting the oldest pair beyond capacity; otherwise leaves the memory
  /// untouched.
  UpdateResult update(const Vector& s, const Vector& y);

  /// Search direction restricted to the free subspace: masked coordinates
  /// are exactly zero, and the result is guaranteed to be a descent
  /// direction whenever the masked gradient is nonzero (falling back to
  /// scaled steepest descent if the recursion output fails the descent
  /// test).  free_mask[i] != 0 marks coordinate i as free.
  Vector reduced_direction(const Vector& grad, const std::vector<char>& free_mask) const;

  int size() const { return static_cast<int>(pairs_.size()); }
  int capacity() const { return memory_; }
  double gamma_scale() const { return gamma_; }
  void clear();

 private:
  struct CurvaturePair {
    Vector s, y;
  };
  std::deque<CurvaturePair> pairs_;
  int memory_;
  double curvature_floor_;
  double gamma_ = 1.0;  // s'y / y'y of the newest pair; 1 when empty
};

}  // namespace boxopt
