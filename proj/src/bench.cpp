#include "boxopt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "boxopt/active_set.hpp"
#include "boxopt/core.hpp"
#include "boxopt/interior.hpp"
#include "boxopt/problems.hpp"

namespace boxopt {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

const std::vector<std::string>& solver_names() {
  static const std::vector<std::string> names = {"as-qwolfe", "as-qarmijo", "ip-pd-wolfe",
                                                 "ip-pdproj-qwolfe"};
  return names;
}

SolverReport run_solver(const BoxProblem& problem, const std::string& solver,
                        const GridLimits& limits) {
  if (solver == "as-qwolfe" || solver == "as-qarmijo") {
    ActiveSetOptions opts = ActiveSetOptions::for_search(
        solver == "as-qwolfe" ? SearchKind::QuasiWolfe : SearchKind::QuasiArmijo);
    opts.tol = limits.tol;
    opts.max_iter = limits.max_iter;
    opts.time_limit_s = limits.time_limit_s;
    return solve_active_set(problem, opts);
  }
  if (solver == "ip-pd-wolfe" || solver == "ip-pdproj-qwolfe") {
    InteriorOptions opts;
    opts.variant =
        solver == "ip-pd-wolfe" ? InteriorVariant::PDWolfe : InteriorVariant::PDProjQWolfe;
    opts.tol = limits.tol;
    opts.max_iter = limits.max_iter;
    opts.time_limit_s = limits.time_limit_s;
    return solve_interior(problem, opts);
  }
  throw std::invalid_argument("unknown solver: " + solver);
}

std::vector<RunRecord> run_grid(const std::vector<std::string>& problems,
                                const std::vector<std::string>& solvers,
                                const GridLimits& limits) {
  std::vector<RunRecord> records;
  for (const std::string& pname : problems) {
    const ProblemSpec* spec = find_problem(pname);
    if (spec == nullptr) throw std::invalid_argument("unknown problem: " + pname);
    for (const std::string& sname : solvers) {
      RunRecord rec;
      rec.problem = pname;
      rec.solver = sname;
      try {
        const BoxProblem problem = spec->make();
        const SolverReport report = run_solver(problem, sname, limits);
        rec.status = report.status;
        rec.n_f = report.counters.n_f;
        rec.n_g = report.counters.n_g;
        rec.n_h = report.counters.n_h;
        rec.iterations = report.iterations;
        rec.wall_time_s = report.wall_time_s;
        rec.f_final = report.f_final;
        rec.proj_grad_norm = report.proj_grad_norm;
        rec.updates_skipped = report.updates_skipped;
      } catch (const std::exception&) {
        rec.status = SolveStatus::LineSearchFailure;  // solver could not run the cell
      }
      records.push_back(std::move(rec));
    }
  }
  std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.problem, a.solver) < std::tie(b.problem, b.solver);
  });
  return records;
}

std::vector<ProfileCurve> performance_profile(const std::vector<RunRecord>& records,
                                              ProfileMetric metric) {
  const auto metric_of = [metric](const RunRecord& r) {
    return static_cast<double>(metric == ProfileMetric::FunctionEvals ? r.n_f : r.iterations);
  };

  std::vector<std::string> problems, solvers;
  for (const RunRecord& r : records) {
    if (std::find(problems.begin(), problems.end(), r.problem) == problems.end())
      problems.push_back(r.problem);
    if (std::find(solvers.begin(), solvers.end(), r.solver) == solvers.end())
      solvers.push_back(r.solver);
  }
  std::sort(solvers.begin(), solvers.end());
  const double n_p = static_cast<double>(problems.size());

  // Ratios against the least solved cost per problem.  Failed runs (and runs
  // on problems nobody solved) carry no finite ratio.
  std::map<std::pair<std::string, std::string>, double> ratio;
  double max_ratio = 0.0;
  for (const std::string& p : problems) {
    double best = kInfinity;
    for (const RunRecord& r : records)
      if (r.problem == p && r.status == SolveStatus::Converged)
        best = std::min(best, std::max(metric_of(r), 1.0));
    if (!std::isfinite(best)) {
      std::cerr << "performance_profile: no solver solved '" << p
                << "'; it still counts toward the problem total\n";
      continue;
    }
    for (const RunRecord& r : records) {
      if (r.problem != p || r.status != SolveStatus::Converged) continue;
      const double rr = std::max(metric_of(r), 1.0) / best;
      ratio[{p, r.solver}] = rr;
      max_ratio = std::max(max_ratio, rr);
    }
  }
  if (ratio.empty())
    throw std::runtime_error("performance_profile: no solver solved any problem");

  // The failure ratio (twice the largest solved ratio) lies strictly beyond
  // the curve domain, so failed runs never count as solved.
  const double r_max_tau = std::log2(max_ratio);

  std::vector<ProfileCurve> curves;
  for (const std::string& s : solvers) {
    std::vector<double> taus;
    for (const std::string& p : problems) {
      auto it = ratio.find({p, s});
      if (it != ratio.end()) taus.push_back(std::log2(it->second));
    }
    std::sort(taus.begin(), taus.end());

    ProfileCurve curve;
    curve.solver = s;
    const auto count_leq = [&](double tau) {
      return static_cast<double>(std::upper_bound(taus.begin(), taus.end(), tau) - taus.begin());
    };
    std::set<double> breakpoints(taus.begin(), taus.end());
    breakpoints.insert(0.0);
    breakpoints.insert(r_max_tau);
    for (double tau : breakpoints) curve.points.push_back({tau, count_leq(tau) / n_p});
    curves.push_back(std::move(curve));
  }
  return curves;
}

void write_records_csv(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "problem,solver,status,n_f,n_g,n_h,iterations,wall_time_s,f_final,proj_grad_norm,"
         "updates_skipped\n";
  for (const RunRecord& r : records) {
    out << r.problem << ',' << r.solver << ',' << to_string(r.status) << ',' << r.n_f << ','
        << r.n_g << ',' << r.n_h << ',' << r.iterations << ',' << format_double(r.wall_time_s)
        << ',' << format_double(r.f_final) << ',' << format_double(r.proj_grad_norm) << ','
        << r.updates_skipped << '\n';
  }
}

std::vector<RunRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty records file: " + path);
  std::vector<RunRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 11) throw std::runtime_error("malformed record line: " + line);
    RunRecord r;
    r.problem = f[0];
    r.solver = f[1];
    const auto status = solve_status_from_string(f[2]);
    if (!status) throw std::runtime_error("unknown status in records: " + f[2]);
    r.status = *status;
    r.n_f = std::stol(f[3]);
    r.n_g = std::stol(f[4]);
    r.n_h = std::stol(f[5]);
    r.iterations = std::stol(f[6]);
    r.wall_time_s = std::stod(f[7]);
    r.f_final = std::stod(f[8]);
    r.proj_grad_norm = std::stod(f[9]);
    r.updates_skipped = std::stol(f[10]);
    records.push_back(std::move(r));
  }
  return records;
}

void write_profile_csv(const std::string& path, const std::vector<ProfileCurve>& curves) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "solver,tau,pi\n";
  for (const ProfileCurve& curve : curves)
    for (const ProfilePoint& pt : curve.points)
      out << curve.solver << ',' << format_double(pt.tau) << ',' << format_double(pt.pi) << '\n';
}

namespace {

std::vector<std::string> resolve_suite(const std::string& suite) {
  std::vector<std::string> names;
  if (suite == "all") {
    for (const ProblemSpec& spec : catalog()) names.push_back(spec.name);
  } else if (suite == "bent") {
    for (const ProblemSpec& spec : catalog())
      if (spec.has_tag("bent-path")) names.push_back(spec.name);
  } else {
    for (const std::string& name : split_csv(suite)) {
      if (find_problem(name) == nullptr)
        throw CLI::ValidationError("--suite", "unknown problem: " + name);
      names.push_back(name);
    }
  }
  return names;
}

BoxProblem build_problem(const std::string& name, int n) {
  const ProblemSpec* spec = find_problem(name);
  if (spec == nullptr) throw CLI::ValidationError("--problem", "unknown problem: " + name);
  if (n <= 0) return spec->make();
  if (!spec->scalable && n != spec->default_dim) {
    std::cerr << name << " is not scalable; ignoring --n " << n << "\n";
    return spec->make();
  }
  return spec->build(n);
}

void print_report(const std::string& pname, const std::string& sname,
                  const BoxProblem& problem, const SolverReport& r) {
  std::printf("problem:          %s (n=%ld)\n", pname.c_str(), static_cast<long>(problem.dim()));
  std::printf("solver:           %s\n", sname.c_str());
  std::printf("status:           %s\n", to_string(r.status));
  std::printf("iterations:       %ld\n", r.iterations);
  std::printf("f final:          %.10g\n", r.f_final);
  std::printf("proj grad norm:   %.4g\n", r.proj_grad_norm);
  std::printf("evals f/g/h:      %ld/%ld/%ld\n", r.counters.n_f, r.counters.n_g, r.counters.n_h);
  std::printf("updates:          %ld applied, %ld skipped\n", r.updates_applied,
              r.updates_skipped);
  if (r.hessian_modifications > 0)
    std::printf("hessian shifts:   %ld\n", r.hessian_modifications);
  std::printf("wall time:        %.3f s\n", r.wall_time_s);
}

void write_json_report(const std::string& path, const std::string& pname,
                       const std::string& sname, const SolverReport& r) {
  nlohmann::json j;
  j["problem"] = pname;
  j["solver"] = sname;
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["f_final"] = r.f_final;
  j["proj_grad_norm"] = r.proj_grad_norm;
  j["n_f"] = r.counters.n_f;
  j["n_g"] = r.counters.n_g;
  j["n_h"] = r.counters.n_h;
  j["updates_applied"] = r.updates_applied;
  j["updates_skipped"] = r.updates_skipped;
  j["hessian_modifications"] = r.hessian_modifications;
  j["wall_time_s"] = r.wall_time_s;
  j["x_final"] = std::vector<double>(r.x_final.data(), r.x_final.data() + r.x_final.size());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

int command_check(const std::string& pname, int n) {
  const BoxProblem problem = build_problem(pname, n);
  const Bounds& bounds = problem.bounds();
  EvalCounter scratch;

  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> points = {problem.start()};
  for (int trial = 0; trial < 10; ++trial) {
    Vector x(problem.dim());
    for (Index i = 0; i < problem.dim(); ++i) {
      const double lo = std::max(bounds.lower()[i], problem.start()[i] - 1.0);
      const double hi = std::min(bounds.upper()[i], problem.start()[i] + 1.0);
      x[i] = lo + (hi - lo) * unit(rng);
    }
    points.push_back(x);
  }

  double worst_grad = 0.0;
  for (const Vector& x : points) {
    const Vector g = problem.gradient(x, scratch);
    const Vector fd = finite_difference_gradient(problem, x);
    const double scale = 1.0 + g.lpNorm<Eigen::Infinity>();
    worst_grad = std::max(worst_grad, (g - fd).lpNorm<Eigen::Infinity>() / scale);
  }
  std::printf("gradient check:   max relative discrepancy %.3g over %zu points\n", worst_grad,
              points.size());

  double worst_hess = 0.0;
  if (problem.has_hessian()) {
    const double h = 1e-6;
    for (const Vector& x : points) {
      const Matrix hess = problem.hessian(x, scratch);
      const double scale = 1.0 + hess.cwiseAbs().maxCoeff();
      Vector probe = x;
      for (Index i = 0; i < problem.dim(); ++i) {
        const double hi = std::min(x[i] + h, bounds.upper()[i]);
        const double lo = std::max(x[i] - h, bounds.lower()[i]);
        if (hi - lo <= 0.0) continue;
        probe[i] = hi;
        const Vector gp = problem.gradient(probe, scratch);
        probe[i] = lo;
        const Vector gm = problem.gradient(probe, scratch);
        probe[i] = x[i];
        const Vector col = (gp - gm) / (hi - lo);
        worst_hess =
            std::max(worst_hess, (hess.col(i) - col).lpNorm<Eigen::Infinity>() / scale);
      }
    }
    std::printf("hessian check:    max relative discrepancy %.3g\n", worst_hess);
  } else {
    std::printf("hessian check:    no hessian oracle\n");
  }
  const bool ok = worst_grad <= 1e-5 && worst_hess <= 1e-4;
  std::printf("%s\n", ok ? "OK" : "FAILED");
  return ok ? 0 : 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"projected-search solvers for bound-constrained minimization"};
  app.require_subcommand(1);

  std::string problem_name, solver_name, json_path;
  int dim = 0;
  GridLimits limits;

  CLI::App* solve = app.add_subcommand("solve", "run one solver on one problem");
  solve->add_option("--problem", problem_name, "problem name")->required();
  solve->add_option("--n", dim, "dimension for scalable problems");
  solve->add_option("--solver", solver_name, "solver name")
      ->required()
      ->check(CLI::IsMember(solver_names()));
  solve->add_option("--tol", limits.tol, "optimality tolerance");
  solve->add_option("--max-iter", limits.max_iter, "iteration limit");
  solve->add_option("--time-limit", limits.time_limit_s, "time limit in seconds");
  solve->add_option("--json", json_path, "write the report as JSON to this path");

  std::string suite = "all", solvers_csv, metric_name = "nf";
  std::string records_path = "records.csv", profile_path = "profile.csv";
  CLI::App* bench = app.add_subcommand("bench", "run a solver/problem grid and emit profiles");
  bench->add_option("--suite", suite, "all, bent, or a comma-separated problem list");
  bench->add_option("--solvers", solvers_csv, "comma-separated solver list")->required();
  bench->add_option("--metric", metric_name, "profile metric: nf or iters")
      ->check(CLI::IsMember({"nf", "iters"}));
  bench->add_option("--out-records", records_path, "records CSV path");
  bench->add_option("--out-profile", profile_path, "profile CSV path");
  bench->add_option("--tol", limits.tol, "optimality tolerance");
  bench->add_option("--max-iter", limits.max_iter, "iteration limit");
  bench->add_option("--time-limit", limits.time_limit_s, "per-solve time limit in seconds");

  CLI::App* check = app.add_subcommand("check", "finite-difference oracle verification");
  check->add_option("--problem", problem_name, "problem name")->required();
  check->add_option("--n", dim, "dimension for scalable problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) {
      const BoxProblem problem = build_problem(problem_name, dim);
      const SolverReport report = run_solver(problem, solver_name, limits);
      print_report(problem_name, solver_name, problem, report);
      if (!json_path.empty()) write_json_report(json_path, problem_name, solver_name, report);
      return report.status == SolveStatus::Converged ? 0 : 1;
    }
    if (bench->parsed()) {
      const std::vector<std::string> problems = resolve_suite(suite);
      std::vector<std::string> solvers = split_csv(solvers_csv);
      for (const std::string& s : solvers)
        if (std::find(solver_names().begin(), solver_names().end(), s) == solver_names().end())
          throw CLI::ValidationError("--solvers", "unknown solver: " + s);
      const auto records = run_grid(problems, solvers, limits);
      write_records_csv(records_path, records);
      const auto curves = performance_profile(
          records, metric_name == "nf" ? ProfileMetric::FunctionEvals : ProfileMetric::Iterations);
      write_profile_csv(profile_path, curves);
      for (const std::string& s : solvers) {
        long solved = 0;
        for (const RunRecord& r : records)
          if (r.solver == s && r.status == SolveStatus::Converged) ++solved;
        std::printf("%-18s solved %ld/%zu\n", s.c_str(), solved, problems.size());
      }
      std::printf("wrote %s and %s\n", records_path.c_str(), profile_path.c_str());
      return 0;
    }
    if (check->parsed()) return command_check(problem_name, dim);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace boxopt
