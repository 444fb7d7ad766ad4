#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "peeroc/analysis.hpp"

using namespace peeroc;

namespace {

TripletCoefficients<Rational> exact(const char* name) { return load_triplet(name).coefficients<Rational>(); }
TripletCoefficients<double> approx(const std::string& name) { return load_triplet(name).coefficients<double>(); }

}  // namespace

TEST_CASE("forward order residuals")
{
  CHECK(is_exactly_zero(forward_order_residual(ForwardPart::standard, exact("AP4o43bdf"), 4)));
  // BDF4 has full order four, so the next condition holds too.
  CHECK(is_exactly_zero(forward_order_residual(ForwardPart::standard, exact("AP4o43bdf"), 5)));
  CHECK_FALSE(is_exactly_zero(forward_order_residual(ForwardPart::standard, exact("AP3o32f"), 4)));
  for (const auto& name : builtin_triplet_names())
    CHECK(max_abs(forward_order_residual(ForwardPart::output, approx(name), load_triplet(name).q1)) < 1e-12);
  CHECK(max_abs(forward_order_residual(ForwardPart::start, approx("AP4o43dif"), 4)) < 1e-12);
}

TEST_CASE("adjoint order residuals")
{
  CHECK(max_abs(adjoint_order_residual(AdjointPart::end, approx("AP4o43bdf"), 3)) < 1e-12);
  CHECK(is_exactly_zero(adjoint_order_residual(AdjointPart::standard, exact("AP3o32f"), 2)));
  for (const auto& name : builtin_triplet_names())
    CHECK(max_abs(adjoint_order_residual(AdjointPart::interp, approx(name), load_triplet(name).q2)) < 1e-12);
}

TEST_CASE("transposed K form equals the plain form for diagonal K")
{
  for (const auto& name : builtin_triplet_names()) {
    CAPTURE(name);
    const auto t = approx(name);
    const Eigen::Index q2 = load_triplet(name).q2;
    const MatrixX<double> v = vandermonde(t.c, q2);
    const MatrixX<double> plain = t.A.transpose() * v - t.B.transpose() * v * pascal<double>(q2) +
                                  t.K * v * nilpotent_e<double>(q2);
    CHECK(max_abs(MatrixX<double>(adjoint_order_residual(AdjointPart::standard, t, q2) - plain)) < 1e-13);
  }
}

TEST_CASE("one-leg residual")
{
  VectorX<double> c(3);
  c << 0.1, 0.5, 1.0;
  MatrixX<double> diag = MatrixX<double>::Zero(3, 3);
  diag.diagonal() << 2.0, -1.0, 0.5;
  CHECK(max_abs(one_leg_residual(diag, c)) == 0.0);

  // The orientation K(i, j) vanishes on the printed end matrices; the
  // transposed reading does not.
  for (const char* name : {"AP4o43bdf", "AP4o43dif"}) {
    CAPTURE(name);
    const auto t = approx(name);
    CHECK(max_abs(one_leg_residual(t.KN, t.c)) < 1e-12);
    CHECK(max_abs(one_leg_residual(MatrixX<double>(t.KN.transpose()), t.c)) > 1e-3);
  }
  for (const auto& name : builtin_triplet_names()) {
    CAPTURE(name);
    const auto t = approx(name);
    CHECK(max_abs(one_leg_residual(t.KN, t.c)) < 1e-8);
    CHECK(max_abs(one_leg_residual(t.K0, t.c)) < 1e-8);
  }
}

TEST_CASE("superconvergence residuals")
{
  const auto bdf = exact("AP4o43bdf");
  const auto [f, a] = superconvergence_residuals(bdf.A, bdf.B, bdf.K, bdf.c, 4);
  CHECK(f == 0);
  CHECK(a == 0);

  const auto die = approx("AP4o43die");
  const auto [fd, ad] = superconvergence_residuals(die.A, die.B, die.K, die.c, 4);
  CHECK(std::abs(fd) < 1e-12);
  CHECK(std::abs(ad) < 1e-12);

  const MatrixX<double> zero = MatrixX<double>::Zero(4, 4);
  const auto [fz, az] = superconvergence_residuals(zero, zero, zero, die.c, 4);
  CHECK(fz == 0.0);
  CHECK(az == 0.0);
}

TEST_CASE("compatibility residuals")
{
  const auto dig = approx("AP4o43dig");
  for (double r : compatibility_residuals(dig.A, dig.c)) CHECK(std::abs(r) < 1e-10);

  const auto id = compatibility_residuals(MatrixX<double>(MatrixX<double>::Identity(4, 4)), VectorX<double>(VectorX<double>::Zero(4)));
  CHECK(id[0] == 3.0);
  CHECK(id[1] == -1.0);
  CHECK(id[2] == 0.0);

  const auto ap3 = exact("AP3o32f");
  CHECK(compatibility_residuals(ap3.A, ap3.c)[0] == 0);
}

TEST_CASE("error constant")
{
  const auto bdf = exact("AP4o43bdf");
  CHECK(error_constant(bdf.A, bdf.B, bdf.K, bdf.c, 4) == 0);
  const auto dif = approx("AP4o43dif");
  CHECK(error_constant(dif.A, dif.B, dif.K, dif.c, 4) == doctest::Approx(0.0025).epsilon(0.04));
  const auto ap3 = approx("AP3o32f");
  CHECK(std::abs(error_constant(ap3.A, ap3.B, ap3.K, ap3.c, 3) - 0.0170) <= 5e-4);

  // Invariant under a common scaling of (A, B, K).
  for (const auto& name : builtin_triplet_names()) {
    const auto t = approx(name);
    const int s = static_cast<int>(t.c.size());
    const double base = error_constant(t.A, t.B, t.K, t.c, s);
    for (double alpha : {-3.0, 0.5, 7.25}) {
      const MatrixX<double> sa = alpha * t.A, sb = alpha * t.B, sk = alpha * t.K;
      CHECK(error_constant(sa, sb, sk, t.c, s) == doctest::Approx(base).epsilon(1e-12));
    }
  }
}

TEST_CASE("end solvability")
{
  const auto die = approx("AP4o43die");
  const auto r = end_solvability_residual(die.B, die.KN, die.c, 3, 4);
  CHECK(max_abs(r.residual) < 1e-10);

  for (const auto& name : builtin_triplet_names()) {
    const auto t = approx(name);
    if (t.c.size() != 4) continue;
    CAPTURE(name);
    const auto es = end_solvability_residual(t.B, t.KN, t.c, 3, 4);
    // First pairing restates 1 - 1^T B 1.
    const double direct = 1.0 - VectorX<double>::Ones(4).dot(t.B * VectorX<double>::Ones(4));
    CHECK(es.pairings[0] == doctest::Approx(direct).epsilon(1e-12));
    CHECK(std::abs(es.pairings[0]) < 1e-10);
    for (double p : es.pairings) CHECK(std::abs(p) < 1e-10);
  }

  MatrixX<double> bad = die.B;
  bad(2, 1) += 0.1;
  const auto rb = end_solvability_residual(bad, die.KN, die.c, 3, 4);
  double worst = 0.0;
  for (double p : rb.pairings) worst = std::max(worst, std::abs(p));
  CHECK(worst > 1e-3);

  CHECK_THROWS_AS(end_solvability_residual(die.B, die.KN, die.c, 2, 4), DimensionError);
}

TEST_CASE("cokernel basis annihilates the image of the L map")
{
  const auto basis = l_map_cokernel_basis<Rational>(3, 4);
  REQUIRE(basis.size() == 3);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) {
      MatrixX<Rational> unit = MatrixX<Rational>::Zero(3, 4);
      unit(i, j) = 1;
      const MatrixX<Rational> image = l_map<Rational>(unit);
      for (const auto& x : basis) CHECK((x.transpose() * image).trace() == 0);
    }
}

TEST_CASE("Hankel structure")
{
  const auto bdf = exact("AP4o43bdf");
  CHECK(hankel_defect(bdf.K, bdf.c, 3, 4) == 0);
  const MatrixX<Rational> vkv = vandermonde(bdf.c, 3).transpose() * bdf.K * vandermonde(bdf.c, 4);
  CHECK(hankel_spread<Rational>(l_map<Rational>(vkv)) == 0);

  MatrixX<Rational> k = bdf.K;
  k(0, 2) = 1;
  CHECK(hankel_defect(k, bdf.c, 3, 4) > 0);
}

TEST_CASE("Sylvester and start solvability identities")
{
  for (const auto& name : builtin_triplet_names()) {
    CAPTURE(name);
    const PeerTriplet p = load_triplet(name);
    const auto t = p.coefficients<double>();
    CHECK(max_abs(sylvester_residual(t.A, t.K, t.c, p.q1, p.q2)) < 1e-10);
    CHECK(max_abs(start_solvability_residual(t.B, t.K0, t.c, p.q2, p.s)) < 1e-8);
  }
}

TEST_CASE("verify_triplet")
{
  const MethodReport bdf = verify_triplet(load_triplet("AP4o43bdf"), 1e-10, 360);
  CHECK(bdf.passed);
  CHECK(bdf.exact);
  CHECK(bdf.error_constant_exactly_zero);
  for (const auto& c : bdf.conditions) {
    CAPTURE(c.id);
    CHECK(c.passed);
    CHECK(c.max_abs <= c.tolerance);
  }

  const MethodReport sil = verify_triplet(load_triplet("AP4o43sil"), 1e-8, 360);
  CHECK(sil.passed);
  CHECK_FALSE(sil.exact);
  CHECK(default_tolerance("AP4o43sil") == 1e-8);
  CHECK(default_tolerance("AP4o43bdf") == 1e-10);

  // Replacing w by e1 breaks the output condition.
  auto t = approx("AP4o43bdf");
  t.w = unit_vector<double>(4, 0);
  CHECK(max_abs(forward_order_residual(ForwardPart::output, t, 4)) > 0.5);
}

TEST_CASE("pass flag follows the tolerance")
{
  MatrixX<double> r(1, 2);
  r << 1e-9, -3e-9;
  CHECK(make_residual("x", r, 1e-8).passed);
  CHECK_FALSE(make_residual("x", r, 1e-9).passed);
  CHECK(make_residual("x", r, 1e-9).max_abs == 3e-9);
  CHECK_FALSE(make_residual("x", r, 1e-8).exact);
  MatrixX<Rational> zr = MatrixX<Rational>::Zero(2, 2);
  const auto ze = make_residual("z", zr, 1e-10);
  CHECK(ze.exact);
  CHECK(ze.exactly_zero);
}
