#pragma once

#include "peeroc/bvp.hpp"

#include <iosfwd>
#include <stdexcept>

namespace peeroc {

/// Tunnel-diode oscillator, cost integral of u^2 + y1^2 with u = -2 p2.
BvpProblem rayleigh();

/// Damped oscillator steered across a double-well saddle, u = -p2.
BvpProblem controlled_motion(double nu = 1.0, double alpha = 10.0, const VectorXd& y_target = VectorXd());

/// Undamped wave y1'' + (2 pi kappa)^2 y1 = u with exact solution, u = -p2.
BvpProblem wave(double kappa = 16.0);

/// Looks up "rayleigh", "motion" or "wave" with default parameters.
BvpProblem problem_by_name(const std::string& name);

class ShootingError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct ShootingOptions
{
  int n_steps = 1280;  ///< RK4 steps over the whole horizon
  double tolerance = 1e-10;
  int max_iterations = 60;
};

/// Converged shooting data: the full state (y, p) at every segment start.
struct ShootingResult
{
  std::vector<double> nodes;    ///< segment boundaries, t0 .. T
  std::vector<VectorXd> starts; ///< (y, p) at nodes[0..S-1]
  int n_steps = 0;
  int segments = 0;
  int iterations = 0;
  double terminal_residual = 0.0;
};

/// One classical RK4 step of (y, p)' = (g, phi).
VectorXd rk4_step(const BvpProblem& prob, const VectorXd& x, double dt);

/// Single shooting on p(t0) with Newton (finite-difference Jacobian);
/// falls back to damped multiple shooting over 4, 8 and 16 segments.
ShootingResult shoot(const BvpProblem& prob, const ShootingOptions& opts = {});

/// Re-integrates segment by segment so every grid time t_n = t0 + n h,
/// h = (T - t0)/(N+1), is hit exactly with steps no longer than (T - t0)/n_steps.
ReferenceTrajectory sample_reference(const BvpProblem& prob, const ShootingResult& shot, int n_plus_one);

ReferenceTrajectory shooting_reference(const BvpProblem& prob, int n_plus_one, const ShootingOptions& opts = {});

/// Exact reference when available, shooting oracle otherwise.
ReferenceTrajectory reference_for(const BvpProblem& prob, int n_plus_one, const ShootingOptions& opts = {});

/// terminal_cost(y(T)) plus composite Simpson of running_cost over the grid
/// (Simpson 3/8 on the last three intervals for an odd interval count).
double evaluate_cost(const BvpProblem& prob, const ReferenceTrajectory& ref);

/// Same columns as a solution dump with one row per grid time (j = 0).
void write_reference_csv(std::ostream& os, const ReferenceTrajectory& ref);

}  // namespace peeroc
