#pragma once

#include "peeroc/conditions.hpp"
#include "peeroc/stability.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace peeroc {

inline constexpr double kDefaultConditionTolerance = 1e-10;

/// 1e-8 for AP4o43sil, whose coefficients derive from a root printed to
/// finite precision; 1e-10 otherwise.
double default_tolerance(const std::string& triplet_name);

struct ConditionResidual
{
  std::string id;
  MatrixX<double> residual;
  double max_abs = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  bool exact = false;  ///< evaluated in rational arithmetic
  bool exactly_zero = false;
};

template <typename Scalar>
ConditionResidual make_residual(std::string id, const MatrixX<Scalar>& r, double tol)
{
  ConditionResidual out;
  out.id = std::move(id);
  out.residual = to_double_matrix(r);
  out.max_abs = max_abs(r);
  out.tolerance = tol;
  out.passed = out.max_abs <= tol;
  out.exact = is_exact_v<Scalar>;
  out.exactly_zero = is_exactly_zero(r);
  return out;
}

template <typename Scalar>
ConditionResidual make_residual(std::string id, const Scalar& r, double tol)
{
  MatrixX<Scalar> m(1, 1);
  m(0, 0) = r;
  return make_residual<Scalar>(std::move(id), m, tol);
}

struct MethodReport
{
  std::string name;
  int s = 0;
  int q1 = 0;
  int q2 = 0;
  double tolerance = 0.0;
  bool exact = false;
  std::vector<ConditionResidual> conditions;  ///< decide the pass flag
  std::vector<ConditionResidual> auxiliary;   ///< implied identities, reported only
  double error_constant = 0.0;
  bool error_constant_exactly_zero = false;
  StabilityReport stability;
  bool passed = false;

  const ConditionResidual* find(const std::string& id) const;
};

MethodReport verify_triplet(const PeerTriplet& t, double tol, int locus_samples = kDefaultLocusSamples);
MethodReport verify_triplet(const PeerTriplet& t);

/// One row per report, standard method properties then boundary indicators.
void write_report_csv(std::ostream& os, const std::vector<MethodReport>& reports);
void write_report_json(std::ostream& os, const std::vector<MethodReport>& reports);
/// Human-readable PASS/FAIL list of every condition.
void write_checklist(std::ostream& os, const MethodReport& report);

}  // namespace peeroc
