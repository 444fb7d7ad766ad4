#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "peeroc/kkt.hpp"
#include "peeroc/problems.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

using namespace peeroc;

namespace {

TripletCoefficients<double> approx(const std::string& name) { return load_triplet(name).coefficients<double>(); }

VectorXd vec2(double a, double b)
{
  VectorXd v(2);
  v << a, b;
  return v;
}

BvpProblem zero_problem()
{
  BvpProblem p;
  p.name = "zero";
  p.m = 2;
  p.y0 = VectorXd::Zero(2);
  p.g = [](const VectorXd&, const VectorXd&) { return VectorXd::Zero(2).eval(); };
  p.phi = p.g;
  p.terminal_adjoint = [](const VectorXd&) { return VectorXd::Zero(2).eval(); };
  return p;
}

// Exact solution sampled at every stage time.
VectorXd exact_unknowns(const TripletCoefficients<double>& t, const BvpProblem& prob, int N)
{
  const int s = static_cast<int>(t.c.size());
  const KktLayout L{N, s, prob.m};
  const double h = (prob.T - prob.t0) / (N + 1);
  VectorXd z(L.size());
  for (int n = 0; n <= N; ++n)
    for (int j = 0; j < s; ++j) {
      const double tj = prob.t0 + (n + t.c(j)) * h;
      z.segment(L.y(n, j), prob.m) = prob.exact_y(tj);
      z.segment(L.p(n, j), prob.m) = prob.exact_p(tj);
    }
  return z;
}

double inf_norm(const VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("zero problem has zero residual")
{
  const BvpProblem p = zero_problem();
  for (const auto& name : builtin_triplet_names()) {
    const auto t = approx(name);
    const VectorXd z = constant_guess(t, p, 7);
    CHECK(z.size() == KktLayout{7, static_cast<int>(t.c.size()), 2}.size());
    CHECK(inf_norm(assemble_residual(t, p, 7, z)) == 0.0);
  }
}

TEST_CASE("exact wave solution leaves a fourth-order forward defect")
{
  const BvpProblem prob = wave();
  const auto t = approx("AP4o43die");
  double previous = 0.0;
  for (int np1 : {80, 160, 320, 640}) {
    const int N = np1 - 1;
    const KktLayout L{N, 4, 2};
    const VectorXd r = assemble_residual(t, prob, N, exact_unknowns(t, prob, N));
    const double forward = inf_norm(r.head(L.state_size()));
    const double h = 1.0 / np1;
    CAPTURE(np1);
    // Defect constant times h^4; the scale is omega^4 |y| for the wave.
    CHECK(forward < 1e3 * std::pow(h, 4) * 1e4);
    if (previous > 0.0 && np1 >= 320) CHECK(std::log2(previous / forward) > 3.8);
    previous = forward;
  }
}

TEST_CASE("analytic Jacobian matches finite differences")
{
  for (const BvpProblem& prob : {rayleigh(), controlled_motion(), wave()}) {
    CAPTURE(prob.name);
    for (const char* name : {"AP4o43bdf", "AP4o43die", "AP3o32f"}) {
      CAPTURE(name);
      const auto t = approx(name);
      const int N = 9;
      VectorXd z = initial_guess(t, prob, N, InitialGuess::forward_sweep);
      z += 0.1 * VectorXd::LinSpaced(z.size(), -1.0, 1.0).array().sin().matrix();
      const MatrixXd ja = MatrixXd(assemble_jacobian(t, prob, N, z, JacobianMode::analytic));
      const MatrixXd jf = MatrixXd(assemble_jacobian(t, prob, N, z, JacobianMode::finite_difference));
      CHECK((ja - jf).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, ja.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("wave Jacobian does not depend on the iterate")
{
  const BvpProblem prob = wave();
  const auto t = approx("AP4o43dig");
  const int N = 15;
  const VectorXd z0 = constant_guess(t, prob, N);
  const VectorXd z1 = VectorXd::LinSpaced(z0.size(), -3.0, 5.0);
  const MatrixXd j0 = MatrixXd(assemble_jacobian(t, prob, N, z0, JacobianMode::analytic));
  const MatrixXd j1 = MatrixXd(assemble_jacobian(t, prob, N, z1, JacobianMode::analytic));
  CHECK((j0 - j1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Jacobian couples neighbouring steps only")
{
  const BvpProblem prob = rayleigh();
  const auto t = approx("AP4o43sil");
  const int N = 12;
  const KktLayout L{N, 4, 2};
  const SparseMatrixD j = assemble_jacobian(t, prob, N, constant_guess(t, prob, N), JacobianMode::analytic);
  REQUIRE(j.rows() == L.size());
  REQUIRE(j.cols() == L.size());
  const Eigen::Index block = 4 * 2;
  auto step = [&](Eigen::Index i) { return static_cast<int>((i % L.state_size()) / block); };
  int violations = 0;
  for (int k = 0; k < j.outerSize(); ++k)
    for (SparseMatrixD::InnerIterator it(j, k); it; ++it)
      if (std::abs(step(it.row()) - step(it.col())) > 1) ++violations;
  CHECK(violations == 0);
  // Bandwidth bounds the fill: at most three steps per row.
  CHECK(j.nonZeros() <= L.size() * 3 * 2 * block);
}

TEST_CASE("wave converges in at most two Newton steps")
{
  const BvpProblem prob = wave();
  for (const auto& name : builtin_triplet_names()) {
    CAPTURE(name);
    const auto t = approx(name);
    for (int np1 : {10, 40, 160}) {
      CAPTURE(np1);
      const KktSolution sol = solve_kkt(t, prob, np1 - 1);
      CHECK(sol.converged);
      CHECK(sol.iterations <= 2);
    }
  }
}

TEST_CASE("wave solution does not depend on the initial guess")
{
  const BvpProblem prob = wave();
  const auto t = approx("AP4o43dif");
  const int N = 79;
  const KktSolution a = solve_kkt(t, prob, N);
  const VectorXd other = VectorXd::LinSpaced(a.z.size(), 1.0, -2.0);
  const KktSolution b = solve_kkt(t, prob, N, NewtonOptions{}, &other);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(inf_norm(a.z - b.z) <= 1e-10 * std::max(1.0, inf_norm(a.z)));
}

TEST_CASE("wave adjoint is linear in the terminal data")
{
  const BvpProblem prob = wave();
  BvpProblem doubled = prob;
  doubled.terminal_adjoint = [](const VectorXd&) { return vec2(2.0, 0.0); };
  const auto t = approx("AP4o43die");
  const int N = 39;
  const KktLayout L{N, 4, 2};
  const Eigen::Index n = L.state_size();

  // Freeze Y, zero P, and solve the adjoint rows for P.
  VectorXd z = constant_guess(t, prob, N);
  z.tail(n).setZero();
  const SparseMatrixD j = assemble_jacobian(t, prob, N, z, JacobianMode::analytic);
  const SparseMatrixD jpp = j.bottomRightCorner(n, n);
  Eigen::SparseLU<SparseMatrixD> lu;
  lu.compute(jpp);
  REQUIRE(lu.info() == Eigen::Success);
  const VectorXd p1 = lu.solve(-assemble_residual(t, prob, N, z).tail(n));
  const VectorXd p2 = lu.solve(-assemble_residual(t, doubled, N, z).tail(n));
  CHECK(inf_norm(p1) > 0.0);
  CHECK(inf_norm(p2 - 2.0 * p1) == 0.0);
}

TEST_CASE("Rayleigh with BDF on a coarse grid")
{
  const BvpProblem prob = rayleigh();
  NewtonOptions opts;
  opts.initial_guess = InitialGuess::automatic;
  const KktSolution sol = solve_kkt(load_triplet("AP4o43bdf"), prob, 39, opts);
  REQUIRE(sol.converged);
  const SolutionErrors e = extract_errors(sol, shooting_reference(prob, 40));
  CHECK(e.state < 1e-3);
  CHECK(e.adjoint < 1e-2);
}

TEST_CASE("non-convergence is reported, not thrown")
{
  NewtonOptions opts;
  opts.initial_guess = InitialGuess::constant;
  KktSolution sol;
  CHECK_NOTHROW(sol = solve_kkt(load_triplet("AP3o32f"), controlled_motion(), 9, opts));
  CHECK_FALSE(sol.converged);
  CHECK_FALSE(sol.message.empty());

  opts.max_iterations = 1;
  const KktSolution short_run = solve_kkt(load_triplet("AP4o43bdf"), rayleigh(), 39, opts);
  CHECK_FALSE(short_run.converged);
  CHECK(short_run.iterations == 1);
}

TEST_CASE("converged iterate is a fixed point")
{
  for (const BvpProblem& prob : {rayleigh(), controlled_motion(), wave()}) {
    CAPTURE(prob.name);
    NewtonOptions opts;
    opts.initial_guess = InitialGuess::automatic;
    const auto t = approx("AP4o43dig");
    const KktSolution sol = solve_kkt(t, prob, 79, opts);
    REQUIRE(sol.converged);
    CHECK(sol.tolerance >= opts.tolerance);
    CHECK(sol.tolerance >= roundoff_floor(t, sol.z));
    CHECK(inf_norm(assemble_residual(t, prob, 79, sol.z)) <= sol.tolerance);
    CHECK(inf_norm(sol.p_end - prob.terminal_adjoint(sol.y_end)) == 0.0);
  }
}

TEST_CASE("finite-difference Newton reaches the same solution")
{
  const BvpProblem prob = controlled_motion();
  const auto t = approx("AP4o43bdf");
  NewtonOptions opts;
  opts.initial_guess = InitialGuess::automatic;
  const KktSolution a = solve_kkt(t, prob, 39, opts);
  opts.jacobian = JacobianMode::finite_difference;
  const KktSolution b = solve_kkt(t, prob, 39, opts);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(inf_norm(a.z - b.z) < 1e-8);
}

TEST_CASE("continuation reaches the fine grid")
{
  NewtonOptions opts;
  opts.initial_guess = InitialGuess::continuation;
  const KktSolution sol = solve_kkt(load_triplet("AP4o43sil"), wave(), 159, opts);
  CHECK(sol.converged);
  CHECK(sol.layout.N == 159);
}

TEST_CASE("initial guesses")
{
  const auto t = approx("AP4o43bdf");
  const BvpProblem motion = controlled_motion();
  const int N = 9;
  const KktLayout L{N, 4, 2};
  const VectorXd line = straight_line_guess(t, motion, N);
  CHECK(inf_norm(line.tail(L.state_size())) == 0.0);
  CHECK(inf_norm(line.segment(L.y(N, 3), 2) - motion.target_state) < 1e-14);
  CHECK_THROWS_AS(straight_line_guess(t, wave(), N), KktError);
  CHECK(inf_norm(initial_guess(t, motion, N, InitialGuess::automatic) - line) == 0.0);

  const BvpProblem ray = rayleigh();
  const VectorXd sweep = forward_sweep_guess(t, ray, N);
  CHECK(inf_norm(initial_guess(t, ray, N, InitialGuess::automatic) - sweep) == 0.0);
  // The forward blocks hold with the frozen adjoint.
  CHECK(inf_norm(assemble_residual(t, ray, N, sweep).head(L.state_size())) < 1e-10);
}

TEST_CASE("error extraction")
{
  const BvpProblem prob = wave();
  const auto t = approx("AP4o43die");
  const KktSolution sol = solve_kkt(t, prob, 79);
  REQUIRE(sol.converged);

  const ReferenceTrajectory own = discrete_trajectory(sol, prob);
  REQUIRE(own.times.size() == 81);
  CHECK(inf_norm(VectorXd(own.y.row(0).transpose()) - prob.y0) == 0.0);
  CHECK(inf_norm(VectorXd(own.p.row(80).transpose()) - sol.p_end) == 0.0);
  const SolutionErrors zero = extract_errors(sol, own);
  CHECK(zero.state == 0.0);
  CHECK(zero.adjoint == 0.0);

  CHECK_THROWS_AS(extract_errors(sol, exact_reference(prob, 40)), KktError);

  const SolutionErrors e80 = extract_errors(sol, exact_reference(prob, 80));
  CHECK(e80.state > 0.0);
  CHECK(e80.adjoint > 0.0);
}

TEST_CASE("fourth-order state error ratio for die")
{
  const BvpProblem prob = wave();
  const auto t = approx("AP4o43die");
  const KktSolution a = solve_kkt(t, prob, 159);
  const KktSolution b = solve_kkt(t, prob, 319);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  const double ratio = extract_errors(a, exact_reference(prob, 160)).state /
                       extract_errors(b, exact_reference(prob, 320)).state;
  CHECK(ratio >= 16.0 / 1.6);
  CHECK(ratio <= 16.0 * 1.6);
}

TEST_CASE("stage times run past the horizon for die")
{
  const auto t = approx("AP4o43die");
  CHECK(t.c.maxCoeff() > 1.0);
  const KktSolution sol = solve_kkt(t, wave(), 19);
  CHECK(sol.converged);
  CHECK(sol.t0 + (sol.layout.N + sol.c.maxCoeff()) * sol.h > 1.0);
  const auto grid = sol.grid();
  REQUIRE(grid.size() == 21);
  CHECK(grid.back() == doctest::Approx(1.0));
}

TEST_CASE("solution CSV")
{
  const auto t = approx("AP4o43dig");
  const KktSolution sol = solve_kkt(t, wave(), 159);
  std::ostringstream a, b;
  write_solution_csv(a, sol);
  write_solution_csv(b, sol);
  CHECK(a.str() == b.str());
  const std::string text = a.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 160 * 4 + 1);
  CHECK(text.rfind("n,j,t_nj,", 0) == 0);
}

TEST_CASE("invalid input")
{
  const auto t = approx("AP4o43bdf");
  BvpProblem bad = wave();
  bad.y0 = VectorXd::Zero(3);
  CHECK_THROWS_AS(solve_kkt(t, bad, 9), KktError);

  const BvpProblem prob = wave();
  const VectorXd short_z = VectorXd::Zero(5);
  CHECK_THROWS_AS(assemble_residual(t, prob, 9, short_z), KktError);
  CHECK_THROWS_AS(solve_kkt(t, prob, 9, NewtonOptions{}, &short_z), KktError);
  CHECK_THROWS_AS(solve_kkt(t, prob, 0), KktError);

  BvpProblem bare = prob;
  bare.g_y = nullptr;
  const VectorXd z = constant_guess(t, bare, 9);
  CHECK_THROWS_AS(assemble_jacobian(t, bare, 9, z, JacobianMode::analytic), KktError);
  CHECK_NOTHROW(assemble_jacobian(t, bare, 9, z, JacobianMode::finite_difference));

  NewtonOptions neg;
  neg.tolerance = -1.0;
  CHECK_THROWS_AS(solve_kkt(t, prob, 9, neg), KktError);
}
