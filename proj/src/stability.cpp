#include "peeroc/stability.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace peeroc {

namespace {

using MatrixXc = Eigen::MatrixXcd;

std::vector<Complex> complex_eigenvalues(const MatrixXc& m)
{
  Eigen::ComplexEigenSolver<MatrixXc> solver(m, false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigenvalue iteration did not converge");
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

MatrixXc solve_complex(const MatrixXc& lhs, const MatrixXc& rhs, const char* what)
{
  Eigen::FullPivLU<MatrixXc> lu(lhs);
  if (!lu.isInvertible()) throw SingularMatrixError(what);
  return lu.solve(rhs);
}

double degrees(double radians) { return radians * 180.0 / std::numbers::pi; }

}  // namespace

std::vector<Complex> eigenvalues(const MatrixX<double>& m)
{
  Eigen::EigenSolver<MatrixX<double>> solver(m, false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigenvalue iteration did not converge");
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double spectral_radius(const MatrixX<double>& m)
{
  double rho = 0.0;
  for (const auto& z : eigenvalues(m)) rho = std::max(rho, std::abs(z));
  return rho;
}

ZeroStability zero_stability(const MatrixX<double>& a, const MatrixX<double>& b)
{
  const MatrixX<double> m = checked_inverse<double>(a, "standard A") * b;
  ZeroStability out;
  out.spectrum = eigenvalues(m);
  std::stable_sort(out.spectrum.begin(), out.spectrum.end(),
                   [](const Complex& x, const Complex& y) { return std::abs(x) > std::abs(y); });
  out.lambda2 = out.spectrum.size() > 1 ? std::abs(out.spectrum[1]) : 0.0;
  out.norm_inf = m.cwiseAbs().rowwise().sum().maxCoeff();
  return out;
}

std::vector<LocusSample> boundary_locus(const MatrixX<double>& a, const MatrixX<double>& b, const MatrixX<double>& k,
                                        int samples)
{
  if (samples < 8) throw std::invalid_argument("boundary locus needs at least 8 samples");
  const MatrixX<double> k_inv = checked_inverse<double>(k, "standard K");
  const MatrixXc kia = (k_inv * a).cast<Complex>();
  const MatrixXc kib = (k_inv * b).cast<Complex>();
  std::vector<LocusSample> out(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / samples;
    const Complex lambda_inv = std::polar(1.0, -theta);
    out[static_cast<std::size_t>(i)] = {theta, complex_eigenvalues(kia - lambda_inv * kib)};
  }
  return out;
}

double amplification_radius(const MatrixX<double>& a, const MatrixX<double>& b, const MatrixX<double>& k, Complex z)
{
  const MatrixXc m =
      solve_complex(a.cast<Complex>() - z * k.cast<Complex>(), b.cast<Complex>(), "A - zK in amplification matrix");
  double rho = 0.0;
  for (const auto& ev : complex_eigenvalues(m)) rho = std::max(rho, std::abs(ev));
  return rho;
}

StabilityAngle stability_angle(const MatrixX<double>& a, const MatrixX<double>& b, const MatrixX<double>& k,
                               int samples, double margin)
{
  StabilityAngle out;
  out.alpha_deg = 90.0;
  bool left_points = false;
  for (const auto& sample : boundary_locus(a, b, k, samples))
    for (const auto& z : sample.z) {
      if (z.real() >= -margin * (1.0 + std::abs(z))) continue;
      left_points = true;
      out.alpha_deg = std::min(out.alpha_deg, std::abs(degrees(std::arg(-z))));
    }

  constexpr double kRays[] = {0.0, 45.0, 89.0};
  constexpr int kPerDecade = 20;
  constexpr double kLogMin = -3.0;
  constexpr double kLogMax = 6.0;
  const int count = static_cast<int>((kLogMax - kLogMin) * kPerDecade) + 1;
  for (double ray : kRays)
    for (int i = 0; i < count; ++i) {
      const double radius = std::pow(10.0, kLogMin + i / static_cast<double>(kPerDecade));
      const Complex z = -std::polar(radius, ray * std::numbers::pi / 180.0);
      double rho = std::numeric_limits<double>::infinity();  // a pole of the amplification matrix
      try {
        rho = amplification_radius(a, b, k, z);
      } catch (const SingularMatrixError&) {
      }
      out.max_ray_radius = std::max(out.max_ray_radius, rho);
    }
  out.a_stable = !left_points && out.max_ray_radius <= 1.0 + 1e-8;
  return out;
}

BoundaryIndicators boundary_method_indicators(const TripletCoefficients<double>& t)
{
  auto min_real = [](const MatrixX<double>& m) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& z : eigenvalues(m)) lo = std::min(lo, z.real());
    return lo;
  };
  BoundaryIndicators out;
  out.mu0 = min_real(checked_inverse<double>(t.K0, "start K0") * t.A0);
  out.muN = min_real(checked_inverse<double>(t.KN, "end K_N") * t.AN);
  out.rho_end = spectral_radius(checked_inverse<double>(t.AN, "end A_N") * t.BN);
  out.rho_start = spectral_radius(t.B * checked_inverse<double>(t.A0, "start A0"));
  out.rho_last = spectral_radius(t.BN * checked_inverse<double>(t.A, "standard A"));
  return out;
}

BoundaryIndicators boundary_method_indicators(const PeerTriplet& t)
{
  return boundary_method_indicators(t.coefficients<double>());
}

StabilityReport stability_report(const PeerTriplet& t, int samples)
{
  const auto co = t.coefficients<double>();
  return {zero_stability(co.A, co.B), stability_angle(co.A, co.B, co.K, samples), boundary_method_indicators(co)};
}

void write_locus_csv(std::ostream& os, const std::vector<LocusSample>& locus)
{
  const auto old_precision = os.precision(17);
  os << "theta,re_z,im_z\n";
  for (const auto& sample : locus)
    for (const auto& z : sample.z) os << sample.theta << ',' << z.real() << ',' << z.imag() << '\n';
  os.precision(old_precision);
}

}  // namespace peeroc
