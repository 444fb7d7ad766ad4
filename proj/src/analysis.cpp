#include "peeroc/analysis.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace peeroc {

namespace {

template <typename Scalar>
void evaluate_conditions(const PeerTriplet& t, double tol, MethodReport& rep)
{
  const auto co = t.coefficients<Scalar>();
  const int s = t.s;
  const Eigen::Index q1 = t.q1;
  const Eigen::Index q2 = t.q2;
  auto& out = rep.conditions;

  out.push_back(make_residual("forward-start", forward_order_residual(ForwardPart::start, co, q1), tol));
  out.push_back(make_residual("adjoint-start", adjoint_order_residual(AdjointPart::start, co, q2), tol));
  out.push_back(make_residual("one-leg-start", MatrixX<Scalar>(one_leg_residual(co.K0, co.c)), tol));
  out.push_back(make_residual("forward-standard", forward_order_residual(ForwardPart::standard, co, q1), tol));
  out.push_back(make_residual("adjoint-standard", adjoint_order_residual(AdjointPart::standard, co, q2), tol));
  const auto [sc_fwd, sc_adj] = superconvergence_residuals(co.A, co.B, co.K, co.c, s);
  out.push_back(make_residual("superconvergence-forward", sc_fwd, tol));
  out.push_back(make_residual("superconvergence-adjoint", sc_adj, tol));
  const auto compat = compatibility_residuals(co.A, co.c);
  const Eigen::Index n_compat = std::min<Eigen::Index>(3, q2);
  MatrixX<Scalar> compat_m(1, n_compat);
  for (Eigen::Index i = 0; i < n_compat; ++i) compat_m(0, i) = compat[static_cast<std::size_t>(i)];
  out.push_back(make_residual("compatibility", compat_m, tol));
  out.push_back(make_residual("forward-end", forward_order_residual(ForwardPart::end, co, q1), tol));
  out.push_back(make_residual("adjoint-last-step", adjoint_order_residual(AdjointPart::last_step, co, q2), tol));
  out.push_back(make_residual("output", forward_order_residual(ForwardPart::output, co, q1), tol));
  out.push_back(make_residual("adjoint-end", adjoint_order_residual(AdjointPart::end, co, q2), tol));
  out.push_back(make_residual("one-leg-end", MatrixX<Scalar>(one_leg_residual(co.KN, co.c)), tol));
  out.push_back(make_residual("interpolant", adjoint_order_residual(AdjointPart::interp, co, q2), tol));

  auto& aux = rep.auxiliary;
  aux.push_back(make_residual("sylvester-standard", sylvester_residual(co.A, co.K, co.c, q1, q2), tol));
  aux.push_back(make_residual("start-solvability", start_solvability_residual(co.B, co.K0, co.c, q2, s), tol));
  if (q2 == s - 1) {
    const auto end = end_solvability_residual(co.B, co.KN, co.c, q2, s);
    aux.push_back(make_residual("end-solvability", end.residual, tol));
    MatrixX<Scalar> pairings(1, static_cast<Eigen::Index>(end.pairings.size()));
    for (std::size_t i = 0; i < end.pairings.size(); ++i) pairings(0, static_cast<Eigen::Index>(i)) = end.pairings[i];
    aux.push_back(make_residual("end-solvability-pairings", pairings, tol));
  }
  aux.push_back(make_residual("hankel-standard-k", hankel_defect(co.K, co.c, q2, s), tol));
  aux.push_back(make_residual("adjoint-end-untransposed", adjoint_end_untransposed_residual(co, q2), tol));

  const Scalar err = error_constant(co.A, co.B, co.K, co.c, s);
  rep.error_constant = to_double(err);
  rep.error_constant_exactly_zero = err == Scalar(0);
}

std::string format_double(double x, int precision = 6)
{
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

}  // namespace

double default_tolerance(const std::string& triplet_name)
{
  return triplet_name == "AP4o43sil" ? 1e-8 : kDefaultConditionTolerance;
}

const ConditionResidual* MethodReport::find(const std::string& id) const
{
  for (const auto* list : {&conditions, &auxiliary})
    for (const auto& c : *list)
      if (c.id == id) return &c;
  return nullptr;
}

MethodReport verify_triplet(const PeerTriplet& t, double tol, int locus_samples)
{
  MethodReport rep;
  rep.name = t.name;
  rep.s = t.s;
  rep.q1 = t.q1;
  rep.q2 = t.q2;
  rep.tolerance = tol;
  rep.exact = t.is_rational();
  if (rep.exact)
    evaluate_conditions<Rational>(t, tol, rep);
  else
    evaluate_conditions<double>(t, tol, rep);
  rep.stability = stability_report(t, locus_samples);
  rep.passed = std::all_of(rep.conditions.begin(), rep.conditions.end(), [](const auto& c) { return c.passed; });
  return rep;
}

MethodReport verify_triplet(const PeerTriplet& t) { return verify_triplet(t, default_tolerance(t.name)); }

void write_report_csv(std::ostream& os, const std::vector<MethodReport>& reports)
{
  os << "triplet,s,alpha_deg,a_stable,norm_inf,lambda2,err_s,mu0,rho_start,muN,rho_end,rho_last,"
        "max_residual,passed\n";
  for (const auto& r : reports) {
    double worst = 0.0;
    for (const auto& c : r.conditions) worst = std::max(worst, c.max_abs);
    const auto& st = r.stability;
    os << r.name << ',' << r.s << ',' << format_double(st.angle.alpha_deg) << ',' << (st.angle.a_stable ? 1 : 0)
       << ',' << format_double(st.zero.norm_inf) << ',' << format_double(st.zero.lambda2) << ','
       << (r.error_constant_exactly_zero ? std::string("0") : format_double(r.error_constant)) << ','
       << format_double(st.boundary.mu0) << ',' << format_double(st.boundary.rho_start) << ','
       << format_double(st.boundary.muN) << ',' << format_double(st.boundary.rho_end) << ','
       << format_double(st.boundary.rho_last) << ',' << format_double(worst, 3) << ',' << (r.passed ? 1 : 0)
       << '\n';
  }
}

void write_report_json(std::ostream& os, const std::vector<MethodReport>& reports)
{
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json row;
    row["triplet"] = r.name;
    row["s"] = r.s;
    row["exact"] = r.exact;
    row["tolerance"] = r.tolerance;
    row["alpha_deg"] = r.stability.angle.alpha_deg;
    row["a_stable_numerical_evidence"] = r.stability.angle.a_stable;
    row["norm_inf"] = r.stability.zero.norm_inf;
    row["lambda2"] = r.stability.zero.lambda2;
    row["err_s"] = r.error_constant;
    row["mu0"] = r.stability.boundary.mu0;
    row["rho_start"] = r.stability.boundary.rho_start;
    row["muN"] = r.stability.boundary.muN;
    row["rho_end"] = r.stability.boundary.rho_end;
    row["rho_last"] = r.stability.boundary.rho_last;
    nlohmann::ordered_json conds = nlohmann::ordered_json::array();
    auto add = [&](const ConditionResidual& c, bool counted) {
      conds.push_back({{"id", c.id},
                       {"max_abs", c.max_abs},
                       {"passed", c.passed},
                       {"exact", c.exact},
                       {"exactly_zero", c.exactly_zero},
                       {"counted", counted}});
    };
    for (const auto& c : r.conditions) add(c, true);
    for (const auto& c : r.auxiliary) add(c, false);
    row["conditions"] = std::move(conds);
    row["passed"] = r.passed;
    doc.push_back(std::move(row));
  }
  os << doc.dump(2) << '\n';
}

void write_checklist(std::ostream& os, const MethodReport& report)
{
  os << report.name << " (s=" << report.s << ", q1=" << report.q1 << ", q2=" << report.q2
     << ", tol=" << format_double(report.tolerance, 3) << (report.exact ? ", exact" : ", floating") << ")\n";
  auto line = [&](const ConditionResidual& c, const char* tag) {
    os << "  [" << (c.passed ? "PASS" : "FAIL") << "] " << std::left << std::setw(28) << c.id << std::right
       << (c.exactly_zero ? std::string("0 (exact)") : format_double(c.max_abs, 3)) << tag << '\n';
  };
  for (const auto& c : report.conditions) line(c, "");
  for (const auto& c : report.auxiliary) line(c, "  (info)");
  os << "  err_s = " << (report.error_constant_exactly_zero ? std::string("0") : format_double(report.error_constant))
     << '\n';
  os << "  overall: " << (report.passed ? "PASS" : "FAIL") << '\n';
}

}  // namespace peeroc
