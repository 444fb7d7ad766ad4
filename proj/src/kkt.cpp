#include "peeroc/kkt.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace peeroc {

namespace {

struct StepCoefficients
{
  const MatrixXd* A;
  const MatrixXd* B;  ///< null for the starting step
  const MatrixXd* K;
};

StepCoefficients step_coefficients(const TripletCoefficients<double>& t, int n, int N)
{
  if (n == 0) return {&t.A0, nullptr, &t.K0};
  if (n == N) return {&t.AN, &t.BN, &t.KN};
  return {&t.A, &t.B, &t.K};
}

void check_inputs(const TripletCoefficients<double>& t, const BvpProblem& prob, int N)
{
  if (N < 1) throw KktError("need N >= 1");
  if (prob.m < 1 || prob.y0.size() != prob.m) throw KktError("dimension mismatch: y0 must have m components");
  if (!prob.g || !prob.phi || !prob.terminal_adjoint) throw KktError("problem is missing g, phi or terminal data");
  if (t.stages() < 1) throw KktError("empty triplet");
}

double step_size(const BvpProblem& prob, int N) { return (prob.T - prob.t0) / (N + 1); }

VectorXd y_end_of(const TripletCoefficients<double>& t, const KktLayout& lay, const VectorXd& z)
{
  VectorXd y = VectorXd::Zero(lay.m);
  for (int j = 0; j < lay.s; ++j) y += t.w(j) * z.segment(lay.y(lay.N, j), lay.m);
  return y;
}

VectorXd p_start_of(const TripletCoefficients<double>& t, const KktLayout& lay, const VectorXd& z)
{
  VectorXd p = VectorXd::Zero(lay.m);
  for (int j = 0; j < lay.s; ++j) p += t.v(j) * z.segment(lay.p(0, j), lay.m);
  return p;
}

/// Q_ni = sum_j K_n(j, i) P_nj, the adjoint argument of the half-one-leg form.
VectorXd one_leg_argument(const MatrixXd& k, const KktLayout& lay, const VectorXd& z, int n, int i)
{
  VectorXd q = VectorXd::Zero(lay.m);
  for (int j = 0; j < lay.s; ++j)
    if (k(j, i) != 0.0) q += k(j, i) * z.segment(lay.p(n, j), lay.m);
  return q;
}

using Entries = std::vector<Eigen::Triplet<double>>;

void add_block(Entries& e, Eigen::Index row, Eigen::Index col, const MatrixXd& block)
{
  for (Eigen::Index c = 0; c < block.cols(); ++c)
    for (Eigen::Index r = 0; r < block.rows(); ++r)
      if (block(r, c) != 0.0) e.emplace_back(row + r, col + c, block(r, c));
}

void add_identity(Entries& e, Eigen::Index row, Eigen::Index col, int m, double value)
{
  if (value == 0.0) return;
  for (int k = 0; k < m; ++k) e.emplace_back(row + k, col + k, value);
}

SparseMatrixD analytic_jacobian(const TripletCoefficients<double>& t, const BvpProblem& prob, int N,
                                const VectorXd& z)
{
  if (!prob.has_analytic_jacobians()) throw KktError("analytic Jacobian requested but callbacks are missing");
  const int s = static_cast<int>(t.stages());
  const int m = prob.m;
  const KktLayout lay{N, s, m};
  const double h = step_size(prob, N);
  Entries e;
  e.reserve(static_cast<std::size_t>(lay.size()) * static_cast<std::size_t>(3 * s * m));

  for (int n = 0; n <= N; ++n) {
    const auto co = step_coefficients(t, n, N);
    const MatrixXd& a = *co.A;
    const MatrixXd& k = *co.K;
    for (int j = 0; j < s; ++j) {
      const VectorXd yj = z.segment(lay.y(n, j), m);
      const VectorXd pj = z.segment(lay.p(n, j), m);
      const MatrixXd gy = prob.g_y(yj, pj);
      const MatrixXd gp = prob.g_p(yj, pj);
      for (int i = 0; i < s; ++i) {
        add_identity(e, lay.y(n, i), lay.y(n, j), m, a(i, j));
        if (k(i, j) != 0.0) {
          add_block(e, lay.y(n, i), lay.y(n, j), -h * k(i, j) * gy);
          add_block(e, lay.y(n, i), lay.p(n, j), -h * k(i, j) * gp);
        }
        if (co.B) add_identity(e, lay.y(n, i), lay.y(n - 1, j), m, -(*co.B)(i, j));
      }
    }
    if (n == 0) {
      const MatrixXd gp0 = prob.g_p(prob.y0, p_start_of(t, lay, z));
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j)
          if (t.b(i) != 0.0 && t.v(j) != 0.0) add_block(e, lay.y(0, i), lay.p(0, j), -h * t.b(i) * t.v(j) * gp0);
    }

    const MatrixXd* b_next = n < N ? step_coefficients(t, n + 1, N).B : nullptr;
    for (int i = 0; i < s; ++i) {
      const VectorXd yi = z.segment(lay.y(n, i), m);
      const VectorXd qi = one_leg_argument(k, lay, z, n, i);
      MatrixXd fy = prob.phi_y(yi, qi);
      if (prob.adjoint_source) {
        if (!prob.adjoint_source_y) throw KktError("analytic Jacobian requested but adjoint_source_y is missing");
        fy += (k.col(i).sum() - 1.0) * prob.adjoint_source_y(yi);
      }
      const MatrixXd fp = prob.phi_p(yi, qi);
      add_block(e, lay.p(n, i), lay.y(n, i), h * fy);
      for (int j = 0; j < s; ++j) {
        add_identity(e, lay.p(n, i), lay.p(n, j), m, a(j, i));
        if (k(j, i) != 0.0) add_block(e, lay.p(n, i), lay.p(n, j), h * k(j, i) * fp);
        if (b_next) add_identity(e, lay.p(n, i), lay.p(n + 1, j), m, -(*b_next)(j, i));
      }
    }
  }

  const MatrixXd ry = prob.terminal_adjoint_y(y_end_of(t, lay, z));
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j)
      if (t.w(i) != 0.0 && t.w(j) != 0.0) add_block(e, lay.p(N, i), lay.y(N, j), -t.w(i) * t.w(j) * ry);

  SparseMatrixD jac(lay.size(), lay.size());
  jac.setFromTriplets(e.begin(), e.end());
  return jac;
}

SparseMatrixD finite_difference_jacobian(const TripletCoefficients<double>& t, const BvpProblem& prob, int N,
                                         const VectorXd& z)
{
  const double eps = std::sqrt(std::numeric_limits<double>::epsilon());
  Entries e;
  VectorXd zp = z;
  for (Eigen::Index col = 0; col < z.size(); ++col) {
    const double step = eps * (1.0 + std::abs(z(col)));
    zp(col) = z(col) + step;
    const VectorXd fp = assemble_residual(t, prob, N, zp);
    zp(col) = z(col) - step;
    const VectorXd fm = assemble_residual(t, prob, N, zp);
    zp(col) = z(col);
    const VectorXd d = (fp - fm) / (2.0 * step);
    for (Eigen::Index row = 0; row < d.size(); ++row)
      if (d(row) != 0.0) e.emplace_back(row, col, d(row));
  }
  SparseMatrixD jac(z.size(), z.size());
  jac.setFromTriplets(e.begin(), e.end());
  return jac;
}

double inf_norm(const VectorXd& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

KktSolution make_solution(const TripletCoefficients<double>& t, const BvpProblem& prob, int N, VectorXd z)
{
  KktSolution sol;
  sol.layout = {N, static_cast<int>(t.stages()), prob.m};
  sol.t0 = prob.t0;
  sol.h = step_size(prob, N);
  sol.c = t.c;
  sol.w = t.w;
  sol.v = t.v;
  sol.z = std::move(z);
  sol.y_end = y_end_of(t, sol.layout, sol.z);
  sol.p_start = p_start_of(t, sol.layout, sol.z);
  sol.p_end = prob.terminal_adjoint(sol.y_end);
  return sol;
}

/// Linear interpolation through (times, values), extrapolating from the end segments.
VectorXd interpolate(const std::vector<double>& times, const std::vector<VectorXd>& values, double t)
{
  if (times.size() == 1) return values.front();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - times.begin());
  hi = std::clamp<std::size_t>(hi, 1, times.size() - 1);
  const std::size_t lo = hi - 1;
  const double theta = (t - times[lo]) / (times[hi] - times[lo]);
  return (1.0 - theta) * values[lo] + theta * values[hi];
}

}  // namespace

std::vector<double> KktSolution::grid() const
{
  std::vector<double> out(static_cast<std::size_t>(layout.N + 2));
  for (int n = 0; n <= layout.N + 1; ++n) out[static_cast<std::size_t>(n)] = t0 + n * h;
  return out;
}

VectorXd KktSolution::y_stage(int n, int j) const { return z.segment(layout.y(n, j), layout.m); }
VectorXd KktSolution::p_stage(int n, int j) const { return z.segment(layout.p(n, j), layout.m); }

VectorXd KktSolution::y_output(int n) const
{
  VectorXd y = VectorXd::Zero(layout.m);
  for (int j = 0; j < layout.s; ++j) y += w(j) * y_stage(n, j);
  return y;
}

VectorXd KktSolution::p_output(int n) const
{
  VectorXd p = VectorXd::Zero(layout.m);
  for (int j = 0; j < layout.s; ++j) p += v(j) * p_stage(n, j);
  return p;
}

VectorXd assemble_residual(const TripletCoefficients<double>& t, const BvpProblem& prob, int N, const VectorXd& z)
{
  check_inputs(t, prob, N);
  const int s = static_cast<int>(t.stages());
  const int m = prob.m;
  const KktLayout lay{N, s, m};
  if (z.size() != lay.size())
    throw KktError("dimension mismatch: unknown vector has " + std::to_string(z.size()) + " entries, expected " +
                   std::to_string(lay.size()));
  const double h = step_size(prob, N);
  VectorXd res = VectorXd::Zero(lay.size());

  std::vector<VectorXd> g_stage(static_cast<std::size_t>(s));
  for (int n = 0; n <= N; ++n) {
    const auto co = step_coefficients(t, n, N);
    for (int j = 0; j < s; ++j)
      g_stage[static_cast<std::size_t>(j)] = prob.g(z.segment(lay.y(n, j), m), z.segment(lay.p(n, j), m));
    for (int i = 0; i < s; ++i) {
      auto f = res.segment(lay.y(n, i), m);
      for (int j = 0; j < s; ++j) {
        f += (*co.A)(i, j) * z.segment(lay.y(n, j), m) - h * (*co.K)(i, j) * g_stage[static_cast<std::size_t>(j)];
        if (co.B) f -= (*co.B)(i, j) * z.segment(lay.y(n - 1, j), m);
      }
    }
    if (n == 0) {
      const VectorXd g0 = prob.g(prob.y0, p_start_of(t, lay, z));
      for (int i = 0; i < s; ++i) res.segment(lay.y(0, i), m) -= t.a(i) * prob.y0 + h * t.b(i) * g0;
    }

    const MatrixXd* b_next = n < N ? step_coefficients(t, n + 1, N).B : nullptr;
    for (int i = 0; i < s; ++i) {
      auto gr = res.segment(lay.p(n, i), m);
      for (int j = 0; j < s; ++j) {
        gr += (*co.A)(j, i) * z.segment(lay.p(n, j), m);
        if (b_next) gr -= (*b_next)(j, i) * z.segment(lay.p(n + 1, j), m);
      }
      gr += h * prob.phi(z.segment(lay.y(n, i), m), one_leg_argument(*co.K, lay, z, n, i));
      if (prob.adjoint_source) {
        const double weight = co.K->col(i).sum() - 1.0;
        if (weight != 0.0) gr += h * weight * prob.adjoint_source(z.segment(lay.y(n, i), m));
      }
    }
  }

  const VectorXd r_end = prob.terminal_adjoint(y_end_of(t, lay, z));
  for (int i = 0; i < s; ++i) res.segment(lay.p(N, i), m) -= t.w(i) * r_end;
  return res;
}

SparseMatrixD assemble_jacobian(const TripletCoefficients<double>& t, const BvpProblem& prob, int N,
                                const VectorXd& z, JacobianMode mode)
{
  check_inputs(t, prob, N);
  if (z.size() != KktLayout{N, static_cast<int>(t.stages()), prob.m}.size())
    throw KktError("dimension mismatch: unknown vector has wrong length");
  return mode == JacobianMode::analytic ? analytic_jacobian(t, prob, N, z) : finite_difference_jacobian(t, prob, N, z);
}

VectorXd constant_guess(const TripletCoefficients<double>& t, const BvpProblem& prob, int N)
{
  const KktLayout lay{N, static_cast<int>(t.stages()), prob.m};
  const VectorXd p0 = prob.terminal_adjoint(prob.y0);
  VectorXd z(lay.size());
  for (int n = 0; n <= N; ++n)
    for (int j = 0; j < lay.s; ++j) {
      z.segment(lay.y(n, j), lay.m) = prob.y0;
      z.segment(lay.p(n, j), lay.m) = p0;
    }
  return z;
}

VectorXd forward_sweep_guess(const TripletCoefficients<double>& t, const BvpProblem& prob, int N)
{
  check_inputs(t, prob, N);
  const int s = static_cast<int>(t.stages());
  const int m = prob.m;
  const KktLayout lay{N, s, m};
  const double h = step_size(prob, N);
  const VectorXd p0 = prob.terminal_adjoint(prob.y0);
  VectorXd z = constant_guess(t, prob, N);
  const int sm = s * m;

  // Forward blocks with the adjoint frozen at p0, solved step by step.
  for (int n = 0; n <= N; ++n) {
    const auto co = step_coefficients(t, n, N);
    VectorXd rhs = VectorXd::Zero(sm);
    for (int i = 0; i < s; ++i) {
      if (co.B)
        for (int j = 0; j < s; ++j) rhs.segment(i * m, m) += (*co.B)(i, j) * z.segment(lay.y(n - 1, j), m);
      if (n == 0) rhs.segment(i * m, m) += t.a(i) * prob.y0 + h * t.b(i) * prob.g(prob.y0, p0);
    }
    VectorXd x(sm);
    for (int j = 0; j < s; ++j) x.segment(j * m, m) = n == 0 ? prob.y0 : z.segment(lay.y(n - 1, s - 1), m);
    auto block = [&](const VectorXd& xs) {
      VectorXd f = -rhs;
      for (int j = 0; j < s; ++j) {
        const VectorXd gj = prob.g(xs.segment(j * m, m), p0);
        for (int i = 0; i < s; ++i)
          f.segment(i * m, m) += (*co.A)(i, j) * xs.segment(j * m, m) - h * (*co.K)(i, j) * gj;
      }
      return f;
    };
    VectorXd f = block(x);
    for (int it = 0; it < 30 && inf_norm(f) > 1e-13 * (1.0 + inf_norm(x)); ++it) {
      MatrixXd jac(sm, sm);
      for (int col = 0; col < sm; ++col) {
        VectorXd xp = x;
        const double step = 1e-7 * (1.0 + std::abs(x(col)));
        xp(col) += step;
        jac.col(col) = (block(xp) - f) / step;
      }
      const VectorXd dx = jac.fullPivLu().solve(-f);
      if (!dx.allFinite()) break;
      x += dx;
      f = block(x);
    }
    if (!x.allFinite()) break;
    for (int j = 0; j < s; ++j) z.segment(lay.y(n, j), m) = x.segment(j * m, m);
  }
  return z;
}

VectorXd straight_line_guess(const TripletCoefficients<double>& t, const BvpProblem& prob, int N)
{
  check_inputs(t, prob, N);
  if (prob.target_state.size() != prob.m) throw KktError("problem '" + prob.name + "' has no target state");
  const KktLayout lay{N, static_cast<int>(t.stages()), prob.m};
  const double h = step_size(prob, N);
  VectorXd z = VectorXd::Zero(lay.size());
  for (int n = 0; n <= N; ++n)
    for (int j = 0; j < lay.s; ++j) {
      const double theta = std::clamp((n + t.c(j)) * h / (prob.T - prob.t0), 0.0, 1.0);
      z.segment(lay.y(n, j), lay.m) = (1.0 - theta) * prob.y0 + theta * prob.target_state;
    }
  return z;
}

VectorXd initial_guess(const TripletCoefficients<double>& t, const BvpProblem& prob, int N, InitialGuess mode)
{
  switch (mode) {
    case InitialGuess::forward_sweep: return forward_sweep_guess(t, prob, N);
    case InitialGuess::straight_line: return straight_line_guess(t, prob, N);
    case InitialGuess::automatic:
      return prob.target_state.size() == prob.m ? straight_line_guess(t, prob, N) : forward_sweep_guess(t, prob, N);
    case InitialGuess::constant:
    case InitialGuess::continuation: break;
  }
  return constant_guess(t, prob, N);
}

VectorXd interpolated_guess(const KktSolution& coarse, const BvpProblem& prob, int N)
{
  const auto coarse_grid = coarse.grid();
  const int cn = coarse.layout.N;
  std::vector<double> ty{prob.t0}, tp;
  std::vector<VectorXd> vy{prob.y0}, vp;
  for (int n = 0; n <= cn; ++n) {
    ty.push_back(coarse_grid[static_cast<std::size_t>(n + 1)]);
    vy.push_back(coarse.y_output(n));
    tp.push_back(coarse_grid[static_cast<std::size_t>(n)]);
    vp.push_back(coarse.p_output(n));
  }
  tp.push_back(coarse_grid.back());
  vp.push_back(coarse.p_end);

  const KktLayout lay{N, coarse.layout.s, prob.m};
  const double h = step_size(prob, N);
  VectorXd z(lay.size());
  for (int n = 0; n <= N; ++n)
    for (int j = 0; j < lay.s; ++j) {
      const double tau = prob.t0 + (n + coarse.c(j)) * h;
      z.segment(lay.y(n, j), lay.m) = interpolate(ty, vy, tau);
      z.segment(lay.p(n, j), lay.m) = interpolate(tp, vp, tau);
    }
  return z;
}

double roundoff_floor(const TripletCoefficients<double>& t, const VectorXd& z)
{
  auto rows = [](const MatrixXd& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().rowwise().sum().maxCoeff(); };
  auto cols = [](const MatrixXd& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().colwise().sum().maxCoeff(); };
  double scale = rows(t.A0) + t.a.cwiseAbs().maxCoeff();
  for (const MatrixXd* x : {&t.A, &t.B, &t.AN, &t.BN}) scale = std::max({scale, rows(*x), cols(*x)});
  scale = std::max(scale, cols(t.A0));
  return 16.0 * std::numeric_limits<double>::epsilon() * scale * std::max(1.0, inf_norm(z));
}

KktSolution solve_kkt(const TripletCoefficients<double>& t, const BvpProblem& prob, int N, const NewtonOptions& opts,
                      const VectorXd* initial)
{
  check_inputs(t, prob, N);
  if (!(opts.tolerance > 0.0) || opts.max_iterations < 1) throw KktError("invalid Newton options");
  VectorXd z = initial ? *initial : initial_guess(t, prob, N, opts.initial_guess);
  if (z.size() != KktLayout{N, static_cast<int>(t.stages()), prob.m}.size())
    throw KktError("dimension mismatch: initial guess has wrong length");

  VectorXd f = assemble_residual(t, prob, N, z);
  double norm = inf_norm(f);
  double tol = std::max(opts.tolerance, roundoff_floor(t, z));
  int it = 0;
  int stalls = 0;
  std::string message;
  Eigen::SparseLU<SparseMatrixD, Eigen::COLAMDOrdering<int>> lu;
  while (norm > tol && it < opts.max_iterations && std::isfinite(norm)) {
    SparseMatrixD jac = assemble_jacobian(t, prob, N, z, opts.jacobian);
    jac.makeCompressed();
    lu.compute(jac);
    if (lu.info() != Eigen::Success) {
      message = "singular Jacobian: " + lu.lastErrorMessage();
      break;
    }
    const VectorXd dz = lu.solve(-f);
    ++it;

    double lambda = 1.0;
    VectorXd z_try = z + dz;
    VectorXd f_try = assemble_residual(t, prob, N, z_try);
    double norm_try = inf_norm(f_try);
    if (opts.damping) {
      for (int halving = 0; halving < 8 && !(norm_try <= (1.0 - 1e-4 * lambda) * norm); ++halving) {
        lambda *= 0.5;
        z_try = z + lambda * dz;
        f_try = assemble_residual(t, prob, N, z_try);
        norm_try = inf_norm(f_try);
      }
    }
    if (!std::isfinite(norm_try)) {
      message = "residual became non-finite";
      break;
    }
    if (opts.damping && norm_try >= norm) {
      // Take the shortest step anyway; give up after repeated stalls.
      if (++stalls > 10 || norm <= 1e3 * tol) {
        message = "line search made no progress";
        break;
      }
    } else {
      stalls = 0;
    }
    z = std::move(z_try);
    f = std::move(f_try);
    norm = norm_try;
    tol = std::max(opts.tolerance, roundoff_floor(t, z));
  }

  KktSolution sol = make_solution(t, prob, N, std::move(z));
  sol.iterations = it;
  sol.residual_norm = norm;
  sol.tolerance = tol;
  sol.converged = norm <= tol;
  if (sol.converged)
    sol.message = "converged";
  else if (!message.empty())
    sol.message = message;
  else if (!std::isfinite(norm))
    sol.message = "residual became non-finite";
  else
    sol.message = "maximum Newton iterations reached";
  return sol;
}

KktSolution solve_kkt(const PeerTriplet& t, const BvpProblem& prob, int N, const NewtonOptions& opts)
{
  const auto co = t.coefficients<double>();
  if (opts.initial_guess != InitialGuess::continuation || N + 1 <= opts.continuation_start)
    return solve_kkt(co, prob, N, opts);

  // Continuation: solve on a chain of grids halving down from N+1, coarsest first.
  std::vector<int> chain{N + 1};
  while (chain.back() % 2 == 0 && chain.back() / 2 >= opts.continuation_start) chain.push_back(chain.back() / 2);
  std::reverse(chain.begin(), chain.end());
  KktSolution sol = solve_kkt(co, prob, chain.front() - 1, opts);
  for (std::size_t i = 1; i < chain.size(); ++i) {
    const VectorXd guess = sol.converged ? interpolated_guess(sol, prob, chain[i] - 1) : constant_guess(co, prob, chain[i] - 1);
    sol = solve_kkt(co, prob, chain[i] - 1, opts, &guess);
  }
  return sol;
}

SolutionErrors extract_errors(const KktSolution& sol, const ReferenceTrajectory& ref)
{
  const int N = sol.layout.N;
  const auto grid = sol.grid();
  if (ref.times.size() != grid.size() || ref.y.rows() != N + 2 || ref.p.rows() != N + 2 ||
      ref.y.cols() != sol.layout.m || ref.p.cols() != sol.layout.m)
    throw KktError("grid mismatch between solution and reference");
  for (std::size_t n = 0; n < grid.size(); ++n)
    if (std::abs(ref.times[n] - grid[n]) > 1e-12 * (1.0 + std::abs(grid[n])))
      throw KktError("grid mismatch between solution and reference");
  SolutionErrors err;
  for (int n = 0; n <= N; ++n) {
    err.state = std::max(err.state, inf_norm(sol.y_output(n) - ref.y.row(n + 1).transpose()));
    err.adjoint = std::max(err.adjoint, inf_norm(sol.p_output(n) - ref.p.row(n).transpose()));
  }
  return err;
}

ReferenceTrajectory discrete_trajectory(const KktSolution& sol, const BvpProblem& prob)
{
  const int N = sol.layout.N;
  ReferenceTrajectory out;
  out.times = sol.grid();
  out.y.resize(N + 2, sol.layout.m);
  out.p.resize(N + 2, sol.layout.m);
  out.y.row(0) = prob.y0.transpose();
  for (int n = 0; n <= N; ++n) {
    out.y.row(n + 1) = sol.y_output(n).transpose();
    out.p.row(n) = sol.p_output(n).transpose();
  }
  out.p.row(N + 1) = sol.p_end.transpose();
  return out;
}

void write_solution_csv(std::ostream& os, const KktSolution& sol)
{
  const auto old_precision = os.precision(17);
  const int m = sol.layout.m;
  os << "n,j,t_nj";
  for (int k = 1; k <= m; ++k) os << ",y" << k;
  for (int k = 1; k <= m; ++k) os << ",p" << k;
  os << '\n';
  for (int n = 0; n <= sol.layout.N; ++n)
    for (int j = 0; j < sol.layout.s; ++j) {
      os << n << ',' << j + 1 << ',' << sol.t0 + (n + sol.c(j)) * sol.h;
      const VectorXd y = sol.y_stage(n, j);
      const VectorXd p = sol.p_stage(n, j);
      for (int k = 0; k < m; ++k) os << ',' << y(k);
      for (int k = 0; k < m; ++k) os << ',' << p(k);
      os << '\n';
    }
  auto vec = [&](const VectorXd& x) {
    for (Eigen::Index k = 0; k < x.size(); ++k) os << (k ? " " : "") << x(k);
  };
  os << "# y_end=";
  vec(sol.y_end);
  os << ",p_start=";
  vec(sol.p_start);
  os << ",iterations=" << sol.iterations << ",residual=" << sol.residual_norm
     << ",converged=" << (sol.converged ? 1 : 0) << '\n';
  os.precision(old_precision);
}

}  // namespace peeroc
