#include "peeroc/analysis.hpp"
#include "peeroc/harness.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace peeroc;

namespace {

enum Exit { ok = 0, verification_failed = 1, solver_failed = 2, usage_error = 3 };

struct UsageError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct Globals
{
  double tol = 0.0;  // 0 selects the per-command default
  std::string out_dir = ".";
  std::string format = "csv";
  std::vector<std::string> argv;
};

const std::map<std::string, InitialGuess> kGuesses{{"constant", InitialGuess::constant},
                                                   {"sweep", InitialGuess::forward_sweep},
                                                   {"line", InitialGuess::straight_line},
                                                   {"auto", InitialGuess::automatic},
                                                   {"continuation", InitialGuess::continuation}};
const std::map<std::string, JacobianMode> kJacobians{{"analytic", JacobianMode::analytic},
                                                     {"fd", JacobianMode::finite_difference}};

std::ofstream open_output(const fs::path& path)
{
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  return out;
}

void write_manifest(const Globals& g, RunManifest m)
{
  m.argv = g.argv;
  m.outputs.push_back((fs::path(g.out_dir) / ("manifest_" + m.command + ".json")).string());
  auto out = open_output(m.outputs.back());
  write_manifest_json(out, m);
}

std::vector<std::string> names_of(const std::vector<PeerTriplet>& methods)
{
  std::vector<std::string> out;
  for (const auto& t : methods) out.push_back(t.name);
  return out;
}

std::string guess_name(InitialGuess g)
{
  for (const auto& [k, v] : kGuesses)
    if (v == g) return k;
  return "constant";
}

std::string jacobian_name(JacobianMode j) { return j == JacobianMode::analytic ? "analytic" : "fd"; }

// verify

struct VerifyArgs
{
  std::string method = "all";
  int samples = kDefaultLocusSamples;
};

int run_verify(const Globals& g, const VerifyArgs& a)
{
  const auto methods = select_methods(a.method);
  std::vector<MethodReport> reports;
  bool all_passed = true;
  const fs::path checklist_path = fs::path(g.out_dir) / "checklist.txt";
  auto checklist = open_output(checklist_path);
  for (const auto& t : methods) {
    reports.push_back(verify_triplet(t, g.tol > 0.0 ? g.tol : default_tolerance(t.name), a.samples));
    write_checklist(std::cout, reports.back());
    write_checklist(checklist, reports.back());
    all_passed = all_passed && reports.back().passed;
  }
  const fs::path report_path = fs::path(g.out_dir) / ("report." + g.format);
  {
    auto out = open_output(report_path);
    if (g.format == "json")
      write_report_json(out, reports);
    else
      write_report_csv(out, reports);
  }
  RunManifest m;
  m.command = "verify";
  m.methods = names_of(methods);
  m.tolerance = g.tol;
  m.outputs = {report_path.string(), checklist_path.string()};
  write_manifest(g, m);
  std::cout << (all_passed ? "all methods passed\n" : "verification FAILED\n");
  return all_passed ? ok : verification_failed;
}

// stability

struct StabilityArgs
{
  std::string method;
  int samples = kDefaultLocusSamples;
  std::string locus;
};

int run_stability(const Globals& g, const StabilityArgs& a)
{
  const auto methods = select_methods(a.method);
  if (!a.locus.empty() && methods.size() != 1) throw UsageError("--locus needs exactly one method");
  RunManifest m;
  m.command = "stability";
  m.methods = names_of(methods);
  for (const auto& t : methods) {
    const StabilityReport r = stability_report(t, a.samples);
    std::cout << t.name << '\n' << std::fixed << std::setprecision(1) << "  alpha = " << r.angle.alpha_deg
              << (r.angle.a_stable ? "  (A-stable)" : "") << '\n'
              << std::defaultfloat << std::setprecision(6) << "  |lambda2| = " << r.zero.lambda2 << '\n'
              << "  ||A^-1 B||_inf = " << r.zero.norm_inf << '\n'
              << "  mu0 = " << r.boundary.mu0 << '\n'
              << "  muN = " << r.boundary.muN << '\n'
              << "  rho(B A0^-1) = " << r.boundary.rho_start << '\n'
              << "  rho(AN^-1 BN) = " << r.boundary.rho_end << '\n'
              << "  rho(BN A^-1) = " << r.boundary.rho_last << '\n';
    if (!a.locus.empty()) {
      const auto co = t.coefficients<double>();
      auto out = open_output(a.locus);
      write_locus_csv(out, boundary_locus(co.A, co.B, co.K, a.samples));
      m.outputs.push_back(a.locus);
    }
  }
  write_manifest(g, m);
  return ok;
}

// solve

struct SolveArgs
{
  std::string problem;
  std::string method;
  int steps = 160;
  InitialGuess guess = InitialGuess::automatic;
  JacobianMode jacobian = JacobianMode::analytic;
  int max_iterations = 50;
  bool reference = false;
  std::string output;
};

void write_solution_json(std::ostream& os, const KktSolution& sol)
{
  nlohmann::ordered_json doc;
  auto vec = [](const VectorXd& x) { return std::vector<double>(x.data(), x.data() + x.size()); };
  doc["n_plus_one"] = sol.layout.N + 1;
  doc["stages"] = sol.layout.s;
  doc["y_end"] = vec(sol.y_end);
  doc["p_start"] = vec(sol.p_start);
  doc["p_end"] = vec(sol.p_end);
  doc["iterations"] = sol.iterations;
  doc["residual"] = sol.residual_norm;
  doc["converged"] = sol.converged;
  auto stages = nlohmann::ordered_json::array();
  for (int n = 0; n <= sol.layout.N; ++n)
    for (int j = 0; j < sol.layout.s; ++j)
      stages.push_back({{"n", n},
                        {"j", j + 1},
                        {"t", sol.t0 + (n + sol.c(j)) * sol.h},
                        {"y", vec(sol.y_stage(n, j))},
                        {"p", vec(sol.p_stage(n, j))}});
  doc["stage_values"] = stages;
  os << doc.dump(2) << '\n';
}

int run_solve(const Globals& g, const SolveArgs& a)
{
  if (a.steps < 2) throw UsageError("--steps must be at least 2");
  const BvpProblem prob = problem_by_name(a.problem);
  const auto methods = select_methods(a.method);
  if (methods.size() != 1) throw UsageError("solve takes exactly one method");
  NewtonOptions opts;
  opts.tolerance = g.tol > 0.0 ? g.tol : opts.tolerance;
  opts.initial_guess = a.guess;
  opts.jacobian = a.jacobian;
  opts.max_iterations = a.max_iterations;
  const KktSolution sol = solve_kkt(methods.front(), prob, a.steps - 1, opts);

  const fs::path path = a.output.empty() ? fs::path(g.out_dir) / ("solution_" + prob.name + "_" + methods.front().name +
                                                                  "_" + std::to_string(a.steps) + "." + g.format)
                                         : fs::path(a.output);
  {
    auto out = open_output(path);
    if (g.format == "json")
      write_solution_json(out, sol);
    else
      write_solution_csv(out, sol);
  }
  std::cout << prob.name << ' ' << methods.front().name << " N+1=" << a.steps << ": " << sol.message
            << ", iterations " << sol.iterations << ", residual " << sol.residual_norm << '\n';
  if (sol.converged && prob.running_cost && prob.terminal_cost)
    std::cout << "cost " << std::setprecision(10) << evaluate_cost(prob, discrete_trajectory(sol, prob)) << '\n';
  if (sol.converged && (a.reference || prob.has_exact_solution())) {
    const SolutionErrors e = extract_errors(sol, reference_for(prob, a.steps));
    std::cout << std::setprecision(6) << "state error " << e.state << ", adjoint error " << e.adjoint << '\n';
  }
  RunManifest m;
  m.command = "solve";
  m.methods = names_of(methods);
  m.problem = prob.name;
  m.steps = {a.steps};
  m.tolerance = opts.tolerance;
  m.initial_guess = guess_name(a.guess);
  m.jacobian = jacobian_name(a.jacobian);
  m.outputs = {path.string()};
  write_manifest(g, m);
  return sol.converged ? ok : solver_failed;
}

// converge

struct ConvergeArgs
{
  std::string problem;
  std::string method = "all";
  std::vector<int> steps{20, 40, 80, 160, 320};
  InitialGuess guess = InitialGuess::automatic;
  JacobianMode jacobian = JacobianMode::analytic;
  int max_iterations = 50;
  int threads = 0;  // 0 reads PEEROC_THREADS
};

void print_table(const ConvergenceTable& t)
{
  std::cout << t.problem << ' ' << t.method << '\n'
            << "   N+1   state error  adjoint error  order(y)  order(p)  iters\n";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    std::cout << std::setw(6) << r.n_plus_one << std::scientific << std::setprecision(3) << std::setw(14)
              << r.state_error << std::setw(15) << r.adjoint_error << std::fixed << std::setprecision(2)
              << std::setw(10) << t.state_order(i) << std::setw(10) << t.adjoint_order(i) << std::setw(7)
              << r.iterations << (r.converged ? "" : "  no convergence") << std::defaultfloat << '\n';
  }
}

int run_converge(const Globals& g, const ConvergeArgs& a)
{
  try {
    check_step_list(a.steps);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const BvpProblem prob = problem_by_name(a.problem);
  const auto methods = select_methods(a.method);
  NewtonOptions opts;
  opts.tolerance = g.tol > 0.0 ? g.tol : opts.tolerance;
  opts.initial_guess = a.guess;
  opts.jacobian = a.jacobian;
  opts.max_iterations = a.max_iterations;
  const ReferenceSource ref(prob);
  const auto tables =
      convergence_sweep(prob, methods, a.steps, opts, ref, a.threads > 0 ? a.threads : sweep_threads());
  for (const auto& t : tables) print_table(t);

  const fs::path table_path = fs::path(g.out_dir) / ("convergence_" + prob.name + "." + g.format);
  const fs::path svg_path = fs::path(g.out_dir) / ("convergence_" + prob.name + ".svg");
  {
    auto out = open_output(table_path);
    if (g.format == "json")
      write_convergence_json(out, tables);
    else
      write_convergence_csv(out, tables);
  }
  {
    auto out = open_output(svg_path);
    write_convergence_svg(out, tables, prob.name + ": max errors vs N+1");
  }
  RunManifest m;
  m.command = "converge";
  m.methods = names_of(methods);
  m.problem = prob.name;
  m.steps = a.steps;
  m.tolerance = opts.tolerance;
  m.initial_guess = guess_name(a.guess);
  m.jacobian = jacobian_name(a.jacobian);
  m.outputs = {table_path.string(), svg_path.string()};
  write_manifest(g, m);
  return ok;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Peer triplet verification, stability scans and optimal control solves"};
  app.require_subcommand(1);
  Globals g;
  g.argv.assign(argv + 1, argv + argc);
  app.add_option("--tol", g.tol, "Tolerance (conditions for verify, Newton residual for solve/converge)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "Directory for output files")->capture_default_str();
  app.add_option("--format", g.format, "Table format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Check order conditions and stability of triplets");
  verify->add_option("--method", va.method, "all, a built-in name, a comma list, or a triplet JSON file")
      ->capture_default_str();
  verify->add_option("--samples", va.samples, "Boundary locus samples")->check(CLI::Range(8, 10000000));

  StabilityArgs sa;
  auto* stability = app.add_subcommand("stability", "Print stability angle and boundary indicators");
  stability->add_option("--method", sa.method, "Method selector")->required();
  stability->add_option("--samples", sa.samples, "Boundary locus samples")->check(CLI::Range(8, 10000000));
  stability->add_option("--locus", sa.locus, "Write the boundary locus CSV here");

  SolveArgs so;
  auto* solve = app.add_subcommand("solve", "Solve one optimal control problem on one grid");
  solve->add_option("--problem", so.problem, "rayleigh, motion or wave")->required();
  solve->add_option("--method", so.method, "Method selector")->required();
  solve->add_option("--steps", so.steps, "Number of steps N+1")->capture_default_str();
  solve->add_option("--guess", so.guess, "Initial guess")->transform(CLI::CheckedTransformer(kGuesses));
  solve->add_option("--jacobian", so.jacobian, "Jacobian mode")->transform(CLI::CheckedTransformer(kJacobians));
  solve->add_option("--max-iter", so.max_iterations, "Newton iteration limit")->check(CLI::PositiveNumber);
  solve->add_flag("--reference", so.reference, "Report errors against the shooting reference too");
  solve->add_option("--output", so.output, "Solution file (default inside --out-dir)");

  ConvergeArgs ca;
  auto* converge = app.add_subcommand("converge", "Convergence study over doubling step counts");
  converge->add_option("--problem", ca.problem, "rayleigh, motion or wave")->required();
  converge->add_option("--method", ca.method, "Method selector")->capture_default_str();
  converge->add_option("--steps", ca.steps, "Step counts N+1, each doubling the previous")->delimiter(',');
  converge->add_option("--guess", ca.guess, "Initial guess")->transform(CLI::CheckedTransformer(kGuesses));
  converge->add_option("--jacobian", ca.jacobian, "Jacobian mode")->transform(CLI::CheckedTransformer(kJacobians));
  converge->add_option("--max-iter", ca.max_iterations, "Newton iteration limit")->check(CLI::PositiveNumber);
  converge->add_option("--threads", ca.threads, "Worker threads (default PEEROC_THREADS or 1)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage_error;
  }

  try {
    if (*verify) return run_verify(g, va);
    if (*stability) return run_stability(g, sa);
    if (*solve) return run_solve(g, so);
    if (*converge) return run_converge(g, ca);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const UnknownMethodError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const TripletParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const ShootingError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return solver_failed;
  } catch (const KktError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return solver_failed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return solver_failed;
  }
  return usage_error;
}
