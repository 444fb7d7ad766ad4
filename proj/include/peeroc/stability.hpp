#pragma once

#include "peeroc/triplet.hpp"

#include <complex>
#include <iosfwd>
#include <vector>

namespace peeroc {

using Complex = std::complex<double>;

inline constexpr int kDefaultLocusSamples = 3600;
inline constexpr double kDefaultAngleMargin = 1e-9;

struct ZeroStability
{
  std::vector<Complex> spectrum;  ///< eigenvalues of A^{-1}B, descending modulus
  double lambda2 = 0.0;           ///< second largest modulus (damping factor)
  double norm_inf = 0.0;          ///< |A^{-1}B|_inf
};

/// Throws SingularMatrixError for singular A.
ZeroStability zero_stability(const MatrixX<double>& a, const MatrixX<double>& b);

struct LocusSample
{
  double theta = 0.0;
  std::vector<Complex> z;  ///< eigenvalues of K^{-1}(A - e^{-i theta} B)
};

/// theta_k = 2 pi k / samples, k = 0..samples-1. Requires samples >= 8.
std::vector<LocusSample> boundary_locus(const MatrixX<double>& a, const MatrixX<double>& b, const MatrixX<double>& k,
                                        int samples = kDefaultLocusSamples);

struct StabilityAngle
{
  double alpha_deg = 0.0;  ///< in [0, 90]
  bool a_stable = false;   ///< numerical evidence only: locus plus ray sampling
  double max_ray_radius = 0.0;
};

/// Spectral radius of (A - zK)^{-1} B.
double amplification_radius(const MatrixX<double>& a, const MatrixX<double>& b, const MatrixX<double>& k, Complex z);

StabilityAngle stability_angle(const MatrixX<double>& a, const MatrixX<double>& b, const MatrixX<double>& k,
                               int samples = kDefaultLocusSamples, double margin = kDefaultAngleMargin);

struct BoundaryIndicators
{
  double mu0 = 0.0;        ///< min Re lambda(K0^{-1} A0)
  double muN = 0.0;        ///< min Re lambda(K_N^{-1} A_N)
  double rho_end = 0.0;    ///< rho(A_N^{-1} B_N)
  double rho_start = 0.0;  ///< rho(B A0^{-1})
  double rho_last = 0.0;   ///< rho(B_N A^{-1})
};

BoundaryIndicators boundary_method_indicators(const TripletCoefficients<double>& t);
BoundaryIndicators boundary_method_indicators(const PeerTriplet& t);

struct StabilityReport
{
  ZeroStability zero;
  StabilityAngle angle;
  BoundaryIndicators boundary;
};

StabilityReport stability_report(const PeerTriplet& t, int samples = kDefaultLocusSamples);

double spectral_radius(const MatrixX<double>& m);
std::vector<Complex> eigenvalues(const MatrixX<double>& m);

/// Columns theta, re_z, im_z; one row per eigenvalue per sample.
void write_locus_csv(std::ostream& os, const std::vector<LocusSample>& locus);

}  // namespace peeroc
