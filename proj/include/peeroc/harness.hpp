#pragma once

#include "peeroc/kkt.hpp"
#include "peeroc/problems.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace peeroc {

/// "all", a built-in name, a comma-separated list of those, or a path to a
/// triplet JSON file. Throws UnknownMethodError or TripletParseError.
std::vector<PeerTriplet> select_methods(const std::string& selector);

struct ConvergenceRow
{
  int n_plus_one = 0;
  double state_error = 0.0;    ///< NaN when Newton failed
  double adjoint_error = 0.0;  ///< NaN when Newton failed
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double cost = 0.0;  ///< discrete cost, NaN when Newton failed or the problem has none
};

struct ConvergenceTable
{
  std::string method;
  std::string problem;
  double horizon = 1.0;  ///< T - t0
  std::vector<ConvergenceRow> rows;  ///< ascending N+1, each doubling the previous

  /// log2(err[i-1] / err[i]) for i >= 1; NaN for i = 0 or missing errors.
  double state_order(std::size_t i) const;
  double adjoint_order(std::size_t i) const;
};

/// Rejects lists that are empty, hold a value below 4, or do not double.
void check_step_list(const std::vector<int>& steps);

/// Reference data for one problem: exact solution or one shooting run
/// shared by every grid. Keeps a pointer to the problem.
class ReferenceSource
{
public:
  explicit ReferenceSource(const BvpProblem& prob, const ShootingOptions& opts = {});
  ReferenceTrajectory sample(int n_plus_one) const;
  bool exact() const { return !shot_.has_value(); }
  const std::optional<ShootingResult>& shooting() const { return shot_; }

private:
  const BvpProblem* prob_;
  std::optional<ShootingResult> shot_;
};

/// PEEROC_THREADS if set to a positive integer, else 1.
int sweep_threads();

/// One table per method, cells solved on up to `threads` workers.
/// Results do not depend on the thread count.
std::vector<ConvergenceTable> convergence_sweep(const BvpProblem& prob, const std::vector<PeerTriplet>& methods,
                                                const std::vector<int>& steps, const NewtonOptions& opts,
                                                const ReferenceSource& ref, int threads = 1);

/// Columns problem, method, n_plus_one, h, state_error, adjoint_error,
/// state_order, adjoint_order, iterations, residual, converged, cost.
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceTable>& tables);
void write_convergence_json(std::ostream& os, const std::vector<ConvergenceTable>& tables);

/// Log-log chart, x = log2(N+1), y = log10(error). Solid lines for state
/// errors, dashed for adjoint errors; NaN cells break the line.
void write_convergence_svg(std::ostream& os, const std::vector<ConvergenceTable>& tables, const std::string& title);

struct RunManifest
{
  std::vector<std::string> argv;  ///< replaying these arguments reproduces the run
  std::string command;
  std::vector<std::string> methods;
  std::string problem;
  std::vector<int> steps;
  double tolerance = 0.0;
  std::string initial_guess;
  std::string jacobian;
  std::vector<std::string> outputs;
};

/// Contains no timestamps or host data, so equal runs give equal files.
void write_manifest_json(std::ostream& os, const RunManifest& manifest);

}  // namespace peeroc
