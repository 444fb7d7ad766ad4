#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "peeroc/stability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace peeroc;

namespace {

TripletCoefficients<double> approx(const std::string& name) { return load_triplet(name).coefficients<double>(); }

MatrixX<double> scalar_matrix(double x) { return MatrixX<double>::Constant(1, 1, x); }

// Largest distance from a point of one set to its nearest neighbour in the other.
double set_distance(const std::vector<Complex>& a, const std::vector<Complex>& b)
{
  double worst = 0.0;
  for (const auto& x : a) {
    double best = 1e300;
    for (const auto& y : b) best = std::min(best, std::abs(x - y));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

TEST_CASE("zero stability")
{
  const auto dif = approx("AP4o43dif");
  CHECK(std::abs(zero_stability(dif.A, dif.B).lambda2 - 0.26) <= 0.01);
  const auto dig = approx("AP4o43dig");
  CHECK(std::abs(zero_stability(dig.A, dig.B).lambda2 - 0.798) <= 0.005);

  for (const auto& name : builtin_triplet_names()) {
    CAPTURE(name);
    const auto t = approx(name);
    const ZeroStability z = zero_stability(t.A, t.B);
    REQUIRE(!z.spectrum.empty());
    CHECK(std::abs(z.spectrum.front() - Complex(1.0, 0.0)) < 1e-10);
    for (std::size_t i = 1; i < z.spectrum.size(); ++i) CHECK(std::abs(z.spectrum[i - 1]) >= std::abs(z.spectrum[i]));
    CHECK(z.lambda2 < 1.0);
  }
  CHECK_THROWS(zero_stability(MatrixX<double>::Zero(2, 2), MatrixX<double>::Identity(2, 2)));
}

TEST_CASE("boundary locus")
{
  const auto t = approx("AP4o43sil");
  const auto locus = boundary_locus(t.A, t.B, t.K, 360);
  REQUIRE(locus.size() == 360);
  CHECK(locus.front().theta == 0.0);
  double nearest = 1e300;
  for (const auto& z : locus.front().z) nearest = std::min(nearest, std::abs(z));
  CHECK(nearest < 1e-10);

  // Samples at theta and 2 pi - theta carry conjugate eigenvalue sets.
  for (std::size_t k = 1; k < locus.size(); ++k) {
    std::vector<Complex> conj;
    for (const auto& z : locus[locus.size() - k].z) conj.push_back(std::conj(z));
    REQUIRE(locus[k].z.size() == conj.size());
    double scale = 1.0;
    for (const auto& z : conj) scale = std::max(scale, std::abs(z));
    CHECK(set_distance(locus[k].z, conj) < 1e-9 * scale);
    CHECK(set_distance(conj, locus[k].z) < 1e-9 * scale);
  }

  CHECK_THROWS_AS(boundary_locus(t.A, t.B, t.K, 7), std::invalid_argument);
}

TEST_CASE("locus CSV dump")
{
  const auto t = approx("AP3o32f");
  std::ostringstream os;
  write_locus_csv(os, boundary_locus(t.A, t.B, t.K, 16));
  const std::string text = os.str();
  CHECK(text.rfind("theta,re_z,im_z\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 16 * 3);
}

TEST_CASE("stability angles")
{
  const auto bdf = approx("AP4o43bdf");
  const StabilityAngle a_bdf = stability_angle(bdf.A, bdf.B, bdf.K, 3600, kDefaultAngleMargin);
  CHECK(std::abs(a_bdf.alpha_deg - 73.35) <= 0.2);
  CHECK_FALSE(a_bdf.a_stable);

  const auto dif = approx("AP4o43dif");
  CHECK(std::abs(stability_angle(dif.A, dif.B, dif.K, 3600, kDefaultAngleMargin).alpha_deg - 84.0) <= 0.5);

  for (const char* name : {"AP4o43dig", "AP4o43sil"}) {
    CAPTURE(name);
    const auto t = approx(name);
    const StabilityAngle a = stability_angle(t.A, t.B, t.K, 3600, kDefaultAngleMargin);
    CHECK(a.a_stable);
    CHECK(a.alpha_deg == 90.0);
  }
}

TEST_CASE("angle is resolved at the default sample count")
{
  for (const auto& name : builtin_triplet_names()) {
    CAPTURE(name);
    const auto t = approx(name);
    const double a1 = stability_angle(t.A, t.B, t.K, 3600, kDefaultAngleMargin).alpha_deg;
    const double a2 = stability_angle(t.A, t.B, t.K, 7200, kDefaultAngleMargin).alpha_deg;
    CHECK(std::abs(a1 - a2) < 0.1);
    CHECK(a1 >= 0.0);
    CHECK(a1 <= 90.0);
  }
}

TEST_CASE("one-stage methods by hand")
{
  // A = K = B = 1: y_n - y_{n-1} = h f(y_n). Locus z = 1 - e^{-i theta},
  // amplification 1/|1 - z|.
  const MatrixX<double> one = scalar_matrix(1.0);
  const auto locus = boundary_locus(one, one, one, 64);
  for (const auto& s : locus) {
    REQUIRE(s.z.size() == 1);
    CHECK(std::abs(s.z[0] - (1.0 - std::exp(Complex(0.0, -s.theta)))) < 1e-12);
    CHECK(s.z[0].real() >= -1e-15);
  }
  CHECK(amplification_radius(one, one, one, Complex(-2.0, 0.0)) == doctest::Approx(1.0 / 3.0));
  CHECK(amplification_radius(one, one, one, Complex(-3.0, 0.0)) == doctest::Approx(0.25));
  const StabilityAngle implicit = stability_angle(one, one, one, 360, kDefaultAngleMargin);
  CHECK(implicit.a_stable);
  CHECK(implicit.alpha_deg == 90.0);

  // K = -1 flips the locus into the left half-plane: z = e^{-i theta} - 1,
  // amplification 1/|1 + z|, which exceeds 1 at z = -0.5.
  const MatrixX<double> minus = scalar_matrix(-1.0);
  CHECK(amplification_radius(one, one, minus, Complex(-0.5, 0.0)) == doctest::Approx(2.0));
  const StabilityAngle flipped = stability_angle(one, one, minus, 360, kDefaultAngleMargin);
  CHECK_FALSE(flipped.a_stable);
  CHECK(flipped.alpha_deg < 1.0);
}

TEST_CASE("boundary indicators")
{
  const BoundaryIndicators bdf = boundary_method_indicators(load_triplet("AP4o43bdf"));
  CHECK(std::abs(bdf.mu0 - 5.47) <= 0.01);
  CHECK(std::abs(bdf.muN - 3.81) <= 0.01);

  const BoundaryIndicators die = boundary_method_indicators(load_triplet("AP4o43die"));
  CHECK(std::abs(die.rho_end - 2.6) <= 0.05);
  CHECK(std::abs(die.rho_last - 1.98) <= 0.02);

  const BoundaryIndicators ap3 = boundary_method_indicators(load_triplet("AP3o32f"));
  CHECK(std::abs(ap3.mu0 - 1.50) <= 0.01);
  CHECK(std::abs(ap3.rho_start - 1.02) <= 0.01);

  for (const auto& name : builtin_triplet_names()) {
    CAPTURE(name);
    const BoundaryIndicators b = boundary_method_indicators(load_triplet(name));
    CHECK(b.mu0 > 0.0);
    CHECK(b.muN > 0.0);
  }
}

TEST_CASE("spectral helpers")
{
  MatrixX<double> rot(2, 2);
  rot << 0.0, -2.0, 2.0, 0.0;
  CHECK(spectral_radius(rot) == doctest::Approx(2.0));
  const auto ev = eigenvalues(rot);
  REQUIRE(ev.size() == 2);
  for (const auto& z : ev) CHECK(std::abs(std::abs(z.imag()) - 2.0) < 1e-12);
}
