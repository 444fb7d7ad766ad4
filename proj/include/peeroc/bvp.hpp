#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace peeroc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Optimality system y' = g(y, p), y(t0) = y0, p' = phi(y, p),
/// p(T) = r(y(T)), with the control already eliminated.
struct BvpProblem
{
  using Field = std::function<VectorXd(const VectorXd& y, const VectorXd& p)>;
  using FieldJacobian = std::function<MatrixXd(const VectorXd& y, const VectorXd& p)>;
  using Terminal = std::function<VectorXd(const VectorXd& y_end)>;
  using TerminalJacobian = std::function<MatrixXd(const VectorXd& y_end)>;
  using Trajectory = std::function<VectorXd(double t)>;

  std::string name;
  int m = 0;
  double t0 = 0.0;
  double T = 1.0;
  VectorXd y0;
  Field g;
  Field phi;
  Terminal terminal_adjoint;

  // Part of phi that does not depend on p: the y-gradient of a running cost
  // folded into the Mayer form. The discrete adjoint weights it by the
  // column sums of K_n, the quadrature weights of the cost state.
  Terminal adjoint_source;
  TerminalJacobian adjoint_source_y;

  // Optional analytic derivatives.
  FieldJacobian g_y, g_p, phi_y, phi_p;
  TerminalJacobian terminal_adjoint_y;

  // Optional state the terminal cost pulls toward; seeds a straight-line
  // initial guess in the shooting oracle.
  VectorXd target_state;

  // Optional exact solution.
  Trajectory exact_y, exact_p;

  // Cost C = terminal_cost(y(T)) + integral of running_cost(y, p).
  std::function<double(const VectorXd& y, const VectorXd& p)> running_cost;
  std::function<double(const VectorXd& y_end)> terminal_cost;

  bool has_analytic_jacobians() const { return g_y && g_p && phi_y && phi_p && terminal_adjoint_y; }
  bool has_exact_solution() const { return exact_y && exact_p; }
};

/// State and adjoint sampled at grid times t_n = t0 + n h, n = 0..N+1.
struct ReferenceTrajectory
{
  enum class Source { exact, shooting_rk4 };

  std::vector<double> times;
  MatrixXd y;  ///< row n is y(t_n)
  MatrixXd p;  ///< row n is p(t_n)
  Source source = Source::exact;
};

/// Samples the problem's exact solution on the grid with N+1 steps.
ReferenceTrajectory exact_reference(const BvpProblem& prob, int n_plus_one);

}  // namespace peeroc
