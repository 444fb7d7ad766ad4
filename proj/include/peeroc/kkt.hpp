#pragma once

#include "peeroc/bvp.hpp"
#include "peeroc/triplet.hpp"

#include <Eigen/SparseCore>

#include <iosfwd>
#include <optional>
#include <stdexcept>

namespace peeroc {

using SparseMatrixD = Eigen::SparseMatrix<double>;

enum class JacobianMode { analytic, finite_difference };
/// constant: Y = y0, P = r(y0). forward_sweep: P = r(y0), Y from the forward
/// steps. straight_line: Y from y0 to the problem's target state, P = 0.
/// automatic: straight_line when the problem has a target state, else
/// forward_sweep. continuation: constant guess on the coarsest grid of a
/// halving chain, then interpolated solutions on each finer grid.
enum class InitialGuess { constant, forward_sweep, straight_line, automatic, continuation };

struct NewtonOptions
{
  double tolerance = 1e-12;  ///< on the residual inf-norm, raised to the round-off floor if needed
  int max_iterations = 50;
  bool damping = true;  ///< Armijo backtracking, factor 1/2, at most 8 halvings
  JacobianMode jacobian = JacobianMode::analytic;
  InitialGuess initial_guess = InitialGuess::constant;
  int continuation_start = 20;  ///< coarsest N+1 of the continuation chain
};

/// Index arithmetic for the flat unknown vector (Y_0..Y_N, P_0..P_N), each
/// block step-major, then stage, then component.
struct KktLayout
{
  int N = 0;
  int s = 0;
  int m = 0;

  Eigen::Index y(int n, int j, int k = 0) const { return (static_cast<Eigen::Index>(n) * s + j) * m + k; }
  Eigen::Index p(int n, int j, int k = 0) const { return state_size() + y(n, j, k); }
  Eigen::Index state_size() const { return static_cast<Eigen::Index>(N + 1) * s * m; }
  Eigen::Index size() const { return 2 * state_size(); }
};

struct KktSolution
{
  KktLayout layout;
  double t0 = 0.0;
  double h = 0.0;
  VectorXd c;
  VectorXd w, v;
  VectorXd z;
  VectorXd y_end;     ///< y_h(T)
  VectorXd p_start;   ///< p_h(0)
  VectorXd p_end;     ///< p_h(T) = r(y_h(T))
  int iterations = 0;
  double residual_norm = 0.0;
  double tolerance = 0.0;  ///< tolerance actually applied
  bool converged = false;
  std::string message;

  std::vector<double> grid() const;  ///< t_n, n = 0..N+1
  VectorXd y_stage(int n, int j) const;
  VectorXd p_stage(int n, int j) const;
  VectorXd y_output(int n) const;  ///< approximates y(t_{n+1})
  VectorXd p_output(int n) const;  ///< approximates p(t_n)
};

class KktError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Forward blocks F_0..F_N, then adjoint blocks G_0..G_N.
VectorXd assemble_residual(const TripletCoefficients<double>& t, const BvpProblem& prob, int N, const VectorXd& z);

SparseMatrixD assemble_jacobian(const TripletCoefficients<double>& t, const BvpProblem& prob, int N,
                                const VectorXd& z, JacobianMode mode);

/// Y_nj = y0 and P_nj = r(y0).
VectorXd constant_guess(const TripletCoefficients<double>& t, const BvpProblem& prob, int N);

/// P_nj = r(y0) and Y from the forward steps with that frozen adjoint.
VectorXd forward_sweep_guess(const TripletCoefficients<double>& t, const BvpProblem& prob, int N);

/// Y_nj on the line from y0 (at t0) to the target state (at T), P_nj = 0.
/// Throws KktError when the problem has no target state.
VectorXd straight_line_guess(const TripletCoefficients<double>& t, const BvpProblem& prob, int N);

/// Guess for a non-continuation mode.
VectorXd initial_guess(const TripletCoefficients<double>& t, const BvpProblem& prob, int N, InitialGuess mode);

/// Piecewise-linear interpolation of the outputs of a coarser solution.
VectorXd interpolated_guess(const KktSolution& coarse, const BvpProblem& prob, int N);

/// A few ulps of the largest term in any residual row; Newton cannot go below it.
double roundoff_floor(const TripletCoefficients<double>& t, const VectorXd& z);

/// Never throws on non-convergence; inspect KktSolution::converged.
KktSolution solve_kkt(const TripletCoefficients<double>& t, const BvpProblem& prob, int N,
                      const NewtonOptions& opts = {}, const VectorXd* initial = nullptr);
KktSolution solve_kkt(const PeerTriplet& t, const BvpProblem& prob, int N, const NewtonOptions& opts = {});

struct SolutionErrors
{
  double state = 0.0;
  double adjoint = 0.0;
};

/// Max over n of |w^T Y_n - y(t_{n+1})|_inf and |v^T P_n - p(t_n)|_inf.
/// Throws KktError on grid mismatch.
SolutionErrors extract_errors(const KktSolution& sol, const ReferenceTrajectory& ref);

/// Grid values of a discrete solution: y_0 = y0, y_{n+1} from w^T Y_n,
/// p_n from v^T P_n and p_{N+1} = p_h(T). Feeds evaluate_cost.
ReferenceTrajectory discrete_trajectory(const KktSolution& sol, const BvpProblem& prob);

/// Columns n, j, t_nj, y_1..y_m, p_1..p_m; closing "#" summary line.
void write_solution_csv(std::ostream& os, const KktSolution& sol);

}  // namespace peeroc
