#pragma once

#include <string>
#include <vector>

#include "boxopt/types.hpp"

namespace boxopt {

/// One (problem, solver) cell of a benchmark grid.
struct RunRecord {
  std::string problem;
  std::string solver;
  SolveStatus status = SolveStatus::IterLimit;
  long n_f = 0;
  long n_g = 0;
  long n_h = 0;
  long iterations = 0;
  double wall_time_s = 0.0;
  double f_final = 0.0;
  double proj_grad_norm = 0.0;
  long updates_skipped = 0;
};

struct ProfilePoint {
  double tau;
  double pi;
};

struct ProfileCurve {
  std::string solver;
  std::vector<ProfilePoint> points;
};

enum class ProfileMetric { FunctionEvals, Iterations };

struct GridLimits {
  double tol = 1e-5;
  long max_iter = 500;
  double time_limit_s = 60.0;
};

/// The solver names the harness understands.
const std::vector<std::string>& solver_names();

/// Runs one named solver on a problem with the given limits.
SolverReport run_solver(const BoxProblem& problem, const std::string& solver,
                        const GridLimits& limits);

/// Runs every (problem, solver) cell, capturing failures as records rather
/// than exceptions.  Records come back sorted by (problem, solver).
std::vector<RunRecord> run_grid(const std::vector<std::string>& problems,
                                const std::vector<std::string>& solvers,
                                const GridLimits& limits);

/// Log2-scale performance profiles over the records.  A run counts as solved
/// only when its status is Converged; failed runs are assigned twice the
/// largest solved ratio and therefore sit beyond the curve domain [0, r_max].
/// Problems no solver solved still count in the denominator.
std::vector<ProfileCurve> performance_profile(const std::vector<RunRecord>& records,
                                              ProfileMetric metric);

void write_records_csv(const std::string& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records_csv(const std::string& path);
void write_profile_csv(const std::string& path, const std::vector<ProfileCurve>& curves);

/// Command-line entry point (solve / bench / check subcommands).
int cli_main(int argc, const char* const* argv);

}  // namespace boxopt
