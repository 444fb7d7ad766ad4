#include "peeroc/problems.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace peeroc {

namespace {

VectorXd vec2(double a, double b)
{
  VectorXd v(2);
  v << a, b;
  return v;
}

MatrixXd mat2(double a, double b, double c, double d)
{
  MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

double inf_norm(const VectorXd& x)
{
  if (!x.allFinite()) return std::numeric_limits<double>::infinity();
  return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

/// RK4 over [a, b] with `steps` equal steps.
VectorXd integrate(const BvpProblem& prob, VectorXd x, double a, double b, int steps)
{
  const double dt = (b - a) / steps;
  for (int i = 0; i < steps && x.allFinite(); ++i) x = rk4_step(prob, x, dt);
  return x;
}

struct MultipleShooting
{
  const BvpProblem& prob;
  std::vector<double> nodes;
  int steps_per_segment;

  int segments() const { return static_cast<int>(nodes.size()) - 1; }
  int m() const { return prob.m; }
  Eigen::Index size() const { return m() + 2 * m() * (segments() - 1); }

  VectorXd start(const VectorXd& u, int k) const
  {
    if (k == 0) {
      VectorXd x(2 * m());
      x << prob.y0, u.head(m());
      return x;
    }
    return u.segment(m() + 2 * m() * (k - 1), 2 * m());
  }

  VectorXd residual(const VectorXd& u) const
  {
    VectorXd r(size());
    for (int k = 0; k < segments(); ++k) {
      const VectorXd end = integrate(prob, start(u, k), nodes[static_cast<std::size_t>(k)],
                                     nodes[static_cast<std::size_t>(k + 1)], steps_per_segment);
      if (k + 1 < segments())
        r.segment(2 * m() * k, 2 * m()) = end - start(u, k + 1);
      else if (end.allFinite())
        r.tail(m()) = end.tail(m()) - prob.terminal_adjoint(end.head(m()));
      else
        r.tail(m()).setConstant(std::numeric_limits<double>::infinity());
    }
    return r;
  }

  MatrixXd jacobian(const VectorXd& u) const
  {
    const double eps = std::cbrt(std::numeric_limits<double>::epsilon());
    MatrixXd jac(size(), size());
    VectorXd up = u;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double step = eps * (1.0 + std::abs(u(i)));
      up(i) = u(i) + step;
      const VectorXd fp = residual(up);
      up(i) = u(i) - step;
      const VectorXd fm = residual(up);
      up(i) = u(i);
      jac.col(i) = (fp - fm) / (2.0 * step);
    }
    return jac;
  }
};

/// Initial nodes: state on the straight line from y0 to the target, zero adjoint.
VectorXd straight_line_guess(const MultipleShooting& ms)
{
  const BvpProblem& prob = ms.prob;
  const int m = prob.m;
  VectorXd u = VectorXd::Zero(ms.size());
  for (int k = 1; k < ms.segments(); ++k) {
    const double theta = (ms.nodes[static_cast<std::size_t>(k)] - prob.t0) / (prob.T - prob.t0);
    u.segment(m + 2 * m * (k - 1), m) = (1.0 - theta) * prob.y0 + theta * prob.target_state;
  }
  return u;
}

/// Initial nodes: state integrated with the adjoint frozen at r(y0).
VectorXd multiple_shooting_guess(const MultipleShooting& ms)
{
  const BvpProblem& prob = ms.prob;
  const int m = prob.m;
  const VectorXd p_guess = prob.terminal_adjoint(prob.y0);
  VectorXd u(ms.size());
  u.head(m) = p_guess;
  VectorXd y = prob.y0;
  for (int k = 1; k < ms.segments(); ++k) {
    const double dt = (ms.nodes[static_cast<std::size_t>(k)] - ms.nodes[static_cast<std::size_t>(k - 1)]) /
                      ms.steps_per_segment;
    for (int i = 0; i < ms.steps_per_segment; ++i) {
      // Frozen-adjoint RK4 on y only.
      const VectorXd k1 = prob.g(y, p_guess);
      const VectorXd k2 = prob.g(y + 0.5 * dt * k1, p_guess);
      const VectorXd k3 = prob.g(y + 0.5 * dt * k2, p_guess);
      const VectorXd k4 = prob.g(y + dt * k3, p_guess);
      y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!y.allFinite()) y = prob.y0;
    u.segment(m + 2 * m * (k - 1), 2 * m) << y, p_guess;
  }
  return u;
}

bool newton(const MultipleShooting& ms, VectorXd& u, const ShootingOptions& opts, int& iterations, double& norm)
{
  VectorXd f = ms.residual(u);
  norm = inf_norm(f);
  for (iterations = 0; iterations < opts.max_iterations; ++iterations) {
    if (norm <= opts.tolerance) return true;
    if (!std::isfinite(norm)) return false;
    Eigen::FullPivLU<MatrixXd> lu(ms.jacobian(u));
    if (!lu.isInvertible()) return false;
    const VectorXd du = lu.solve(-f);
    double lambda = 1.0;
    VectorXd u_try = u + du;
    VectorXd f_try = ms.residual(u_try);
    double norm_try = inf_norm(f_try);
    for (int halving = 0; halving < 20 && !(norm_try <= (1.0 - 1e-4 * lambda) * norm); ++halving) {
      lambda *= 0.5;
      u_try = u + lambda * du;
      f_try = ms.residual(u_try);
      norm_try = inf_norm(f_try);
    }
    if (!(norm_try < norm)) return norm <= opts.tolerance;
    u = std::move(u_try);
    f = std::move(f_try);
    norm = norm_try;
  }
  return norm <= opts.tolerance;
}

double simpson_weight(int i, int intervals)
{
  // Composite Simpson on [0, even], then 3/8 on the last three intervals if odd.
  const int simpson_end = intervals % 2 == 0 ? intervals : intervals - 3;
  double w = 0.0;
  if (i <= simpson_end && simpson_end > 0) {
    if (i == 0 || i == simpson_end)
      w += 1.0 / 3.0;
    else
      w += (i % 2 == 1) ? 4.0 / 3.0 : 2.0 / 3.0;
  }
  if (intervals % 2 == 1 && i >= simpson_end) {
    const int local = i - simpson_end;
    w += (local == 0 || local == 3) ? 3.0 / 8.0 : 9.0 / 8.0;
  }
  return w;
}

}  // namespace

BvpProblem rayleigh()
{
  BvpProblem p;
  p.name = "rayleigh";
  p.m = 2;
  p.t0 = 0.0;
  p.T = 2.5;
  p.y0 = vec2(-5.0, -5.0);
  p.g = [](const VectorXd& y, const VectorXd& q) {
    return vec2(y(1), -y(0) + y(1) * (1.4 - 0.14 * y(1) * y(1)) - 8.0 * q(1));
  };
  p.phi = [](const VectorXd& y, const VectorXd& q) {
    return vec2(q(1) - 2.0 * y(0), -q(0) - (1.4 - 0.42 * y(1) * y(1)) * q(1));
  };
  p.terminal_adjoint = [](const VectorXd&) { return vec2(0.0, 0.0); };
  p.g_y = [](const VectorXd& y, const VectorXd&) { return mat2(0.0, 1.0, -1.0, 1.4 - 0.42 * y(1) * y(1)); };
  p.g_p = [](const VectorXd&, const VectorXd&) { return mat2(0.0, 0.0, 0.0, -8.0); };
  p.phi_y = [](const VectorXd& y, const VectorXd& q) { return mat2(-2.0, 0.0, 0.0, 0.84 * y(1) * q(1)); };
  p.phi_p = [](const VectorXd& y, const VectorXd&) { return mat2(0.0, 1.0, -1.0, -(1.4 - 0.42 * y(1) * y(1))); };
  p.terminal_adjoint_y = [](const VectorXd&) { return MatrixXd::Zero(2, 2).eval(); };
  p.adjoint_source = [](const VectorXd& y) { return vec2(-2.0 * y(0), 0.0); };
  p.adjoint_source_y = [](const VectorXd&) { return mat2(-2.0, 0.0, 0.0, 0.0); };
  // dH/du = 2u + 4 p2 = 0 gives u = -2 p2.
  p.running_cost = [](const VectorXd& y, const VectorXd& q) {
    const double u = -2.0 * q(1);
    return u * u + y(0) * y(0);
  };
  p.terminal_cost = [](const VectorXd&) { return 0.0; };
  return p;
}

BvpProblem controlled_motion(double nu, double alpha, const VectorXd& y_target)
{
  const VectorXd yf = y_target.size() == 0 ? vec2(1.0, 0.0) : y_target;
  if (yf.size() != 2) throw std::invalid_argument("controlled motion target must have 2 components");
  BvpProblem p;
  p.name = "motion";
  p.m = 2;
  p.t0 = 0.0;
  p.T = 6.0;
  p.y0 = vec2(-1.0, 0.0);
  p.g = [nu](const VectorXd& y, const VectorXd& q) {
    return vec2(y(1), y(0) - y(0) * y(0) * y(0) - nu * y(1) - q(1));
  };
  p.phi = [nu](const VectorXd& y, const VectorXd& q) {
    return vec2((3.0 * y(0) * y(0) - 1.0) * q(1), -q(0) + nu * q(1));
  };
  p.terminal_adjoint = [alpha, yf](const VectorXd& y) { return (alpha * (y - yf)).eval(); };
  p.g_y = [nu](const VectorXd& y, const VectorXd&) { return mat2(0.0, 1.0, 1.0 - 3.0 * y(0) * y(0), -nu); };
  p.g_p = [](const VectorXd&, const VectorXd&) { return mat2(0.0, 0.0, 0.0, -1.0); };
  p.phi_y = [](const VectorXd& y, const VectorXd& q) { return mat2(6.0 * y(0) * q(1), 0.0, 0.0, 0.0); };
  p.phi_p = [nu](const VectorXd& y, const VectorXd&) { return mat2(0.0, 3.0 * y(0) * y(0) - 1.0, -1.0, nu); };
  p.terminal_adjoint_y = [alpha](const VectorXd&) { return (alpha * MatrixXd::Identity(2, 2)).eval(); };
  p.running_cost = [](const VectorXd&, const VectorXd& q) { return 0.5 * q(1) * q(1); };
  p.terminal_cost = [alpha, yf](const VectorXd& y) { return 0.5 * alpha * (y - yf).squaredNorm(); };
  p.target_state = yf;
  return p;
}

BvpProblem wave(double kappa)
{
  const double om = 2.0 * std::numbers::pi * kappa;
  const double om2 = om * om;
  BvpProblem p;
  p.name = "wave";
  p.m = 2;
  p.t0 = 0.0;
  p.T = 1.0;
  p.y0 = vec2(0.0, 0.0);
  p.g = [om2](const VectorXd& y, const VectorXd& q) { return vec2(y(1), -om2 * y(0) - q(1)); };
  p.phi = [om2](const VectorXd&, const VectorXd& q) { return vec2(om2 * q(1), -q(0)); };
  p.terminal_adjoint = [](const VectorXd&) { return vec2(1.0, 0.0); };
  p.g_y = [om2](const VectorXd&, const VectorXd&) { return mat2(0.0, 1.0, -om2, 0.0); };
  p.g_p = [](const VectorXd&, const VectorXd&) { return mat2(0.0, 0.0, 0.0, -1.0); };
  p.phi_y = [](const VectorXd&, const VectorXd&) { return MatrixXd::Zero(2, 2).eval(); };
  p.phi_p = [om2](const VectorXd&, const VectorXd&) { return mat2(0.0, om2, -1.0, 0.0); };
  p.terminal_adjoint_y = [](const VectorXd&) { return MatrixXd::Zero(2, 2).eval(); };
  p.exact_y = [om](double t) {
    return vec2(std::sin(om * t) / (2.0 * om * om * om) - t * std::cos(om * t) / (2.0 * om * om),
                t * std::sin(om * t) / (2.0 * om));
  };
  // The sign of p2 is fixed by p2' = -p1 with p1 = cos(om t).
  p.exact_p = [om](double t) { return vec2(std::cos(om * t), -std::sin(om * t) / om); };
  p.running_cost = [](const VectorXd&, const VectorXd& q) { return 0.5 * q(1) * q(1); };
  p.terminal_cost = [](const VectorXd& y) { return y(0); };
  return p;
}

BvpProblem problem_by_name(const std::string& name)
{
  if (name == "rayleigh") return rayleigh();
  if (name == "motion") return controlled_motion();
  if (name == "wave") return wave();
  throw std::invalid_argument("unknown problem '" + name + "' (expected rayleigh, motion or wave)");
}

ReferenceTrajectory exact_reference(const BvpProblem& prob, int n_plus_one)
{
  if (!prob.has_exact_solution()) throw std::invalid_argument("problem '" + prob.name + "' has no exact solution");
  if (n_plus_one < 1) throw std::invalid_argument("need at least one grid interval");
  ReferenceTrajectory ref;
  ref.source = ReferenceTrajectory::Source::exact;
  ref.y.resize(n_plus_one + 1, prob.m);
  ref.p.resize(n_plus_one + 1, prob.m);
  const double h = (prob.T - prob.t0) / n_plus_one;
  for (int n = 0; n <= n_plus_one; ++n) {
    const double t = prob.t0 + n * h;
    ref.times.push_back(t);
    ref.y.row(n) = prob.exact_y(t).transpose();
    ref.p.row(n) = prob.exact_p(t).transpose();
  }
  return ref;
}

VectorXd rk4_step(const BvpProblem& prob, const VectorXd& x, double dt)
{
  const int m = prob.m;
  auto f = [&](const VectorXd& z) {
    VectorXd d(2 * m);
    d << prob.g(z.head(m), z.tail(m)), prob.phi(z.head(m), z.tail(m));
    return d;
  };
  const VectorXd k1 = f(x);
  const VectorXd k2 = f(x + 0.5 * dt * k1);
  const VectorXd k3 = f(x + 0.5 * dt * k2);
  const VectorXd k4 = f(x + dt * k3);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

ShootingResult shoot(const BvpProblem& prob, const ShootingOptions& opts)
{
  if (opts.n_steps < 1) throw std::invalid_argument("shooting needs at least one RK4 step");
  std::string last_failure;
  for (int segments : {1, 4, 8, 16}) {
    if (segments > opts.n_steps) break;
    std::vector<double> nodes;
    for (int k = 0; k <= segments; ++k) nodes.push_back(prob.t0 + (prob.T - prob.t0) * k / segments);
    const int per = (opts.n_steps + segments - 1) / segments;
    MultipleShooting ms{prob, nodes, per};
    VectorXd u = multiple_shooting_guess(ms);
    int iterations = 0;
    double norm = 0.0;
    bool ok = newton(ms, u, opts, iterations, norm);
    if (!ok && prob.target_state.size() == prob.m) {
      u = straight_line_guess(ms);
      ok = newton(ms, u, opts, iterations, norm);
    }
    if (!ok) {
      last_failure = std::to_string(segments) + " segment(s): residual " + std::to_string(norm);
      continue;
    }
    ShootingResult out;
    out.nodes = nodes;
    out.n_steps = per * segments;
    out.segments = segments;
    out.iterations = iterations;
    out.terminal_residual = norm;
    for (int k = 0; k < segments; ++k) out.starts.push_back(ms.start(u, k));
    return out;
  }
  throw ShootingError("shooting did not converge for problem '" + prob.name + "' (" + last_failure + ")");
}

ReferenceTrajectory sample_reference(const BvpProblem& prob, const ShootingResult& shot, int n_plus_one)
{
  if (n_plus_one < 1) throw std::invalid_argument("need at least one grid interval");
  const int m = prob.m;
  const double h = (prob.T - prob.t0) / n_plus_one;
  const double h_max = (prob.T - prob.t0) / shot.n_steps;
  ReferenceTrajectory ref;
  ref.source = ReferenceTrajectory::Source::shooting_rk4;
  ref.y.resize(n_plus_one + 1, m);
  ref.p.resize(n_plus_one + 1, m);
  for (int n = 0; n <= n_plus_one; ++n) ref.times.push_back(prob.t0 + n * h);

  int n = 0;
  for (int k = 0; k < shot.segments; ++k) {
    const double a = shot.nodes[static_cast<std::size_t>(k)];
    const double b = shot.nodes[static_cast<std::size_t>(k + 1)];
    VectorXd x = shot.starts[static_cast<std::size_t>(k)];
    double t = a;
    const double slack = 1e-12 * (1.0 + std::abs(b));
    // Grid points coinciding with this segment start.
    while (n <= n_plus_one && ref.times[static_cast<std::size_t>(n)] <= a + slack) {
      ref.y.row(n) = x.head(m).transpose();
      ref.p.row(n) = x.tail(m).transpose();
      ++n;
    }
    while (true) {
      const bool grid_next = n <= n_plus_one && ref.times[static_cast<std::size_t>(n)] < b - slack;
      const double target = grid_next ? ref.times[static_cast<std::size_t>(n)] : b;
      const int steps = std::max(1, static_cast<int>(std::ceil((target - t) / h_max - 1e-9)));
      x = integrate(prob, x, t, target, steps);
      t = target;
      if (!grid_next) break;
      ref.y.row(n) = x.head(m).transpose();
      ref.p.row(n) = x.tail(m).transpose();
      ++n;
    }
    if (k + 1 == shot.segments)
      while (n <= n_plus_one) {
        ref.y.row(n) = x.head(m).transpose();
        ref.p.row(n) = x.tail(m).transpose();
        ++n;
      }
  }
  ref.times.back() = prob.T;
  return ref;
}

ReferenceTrajectory shooting_reference(const BvpProblem& prob, int n_plus_one, const ShootingOptions& opts)
{
  return sample_reference(prob, shoot(prob, opts), n_plus_one);
}

ReferenceTrajectory reference_for(const BvpProblem& prob, int n_plus_one, const ShootingOptions& opts)
{
  return prob.has_exact_solution() ? exact_reference(prob, n_plus_one) : shooting_reference(prob, n_plus_one, opts);
}

double evaluate_cost(const BvpProblem& prob, const ReferenceTrajectory& ref)
{
  if (!prob.running_cost || !prob.terminal_cost) throw std::invalid_argument("problem has no cost functional");
  const int intervals = static_cast<int>(ref.times.size()) - 1;
  if (intervals < 2 || ref.y.rows() != intervals + 1 || ref.p.rows() != intervals + 1)
    throw std::invalid_argument("cost evaluation needs at least two grid intervals");
  const double h = (ref.times.back() - ref.times.front()) / intervals;
  double integral = 0.0;
  for (int i = 0; i <= intervals; ++i)
    integral += simpson_weight(i, intervals) * prob.running_cost(ref.y.row(i).transpose(), ref.p.row(i).transpose());
  return prob.terminal_cost(ref.y.row(intervals).transpose()) + h * integral;
}

void write_reference_csv(std::ostream& os, const ReferenceTrajectory& ref)
{
  const auto old_precision = os.precision(17);
  const Eigen::Index m = ref.y.cols();
  os << "n,j,t_nj";
  for (Eigen::Index k = 1; k <= m; ++k) os << ",y" << k;
  for (Eigen::Index k = 1; k <= m; ++k) os << ",p" << k;
  os << '\n';
  for (std::size_t n = 0; n < ref.times.size(); ++n) {
    os << n << ",0," << ref.times[n];
    for (Eigen::Index k = 0; k < m; ++k) os << ',' << ref.y(static_cast<Eigen::Index>(n), k);
    for (Eigen::Index k = 0; k < m; ++k) os << ',' << ref.p(static_cast<Eigen::Index>(n), k);
    os << '\n';
  }
  os << "# source=" << (ref.source == ReferenceTrajectory::Source::exact ? "exact" : "shooting-rk4") << '\n';
  os.precision(old_precision);
}

}  // namespace peeroc
