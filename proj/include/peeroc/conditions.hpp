#pragma once

// Algebraic order, superconvergence and solvability conditions for Peer
// triplets, written once for any field scalar (double or Rational).

#include "peeroc/triplet.hpp"

#include <array>
#include <utility>
#include <vector>

namespace peeroc {

enum class ForwardPart { start, standard, end, output };
enum class AdjointPart { interp, start, standard, last_step, end };

/// Forward local order q1 residual of one triplet member.
///   start:    A0 V - a e1^T - b e2^T - K0 V E
///   standard: A V - B V P^{-1} - K V E
///   end:      A_N V - B_N V P^{-1} - K_N V E
///   output:   w^T V - 1^T  (returned as a 1 x q1 matrix)
template <typename Scalar>
MatrixX<Scalar> forward_order_residual(ForwardPart part, const TripletCoefficients<Scalar>& t, Eigen::Index q1)
{
  const Eigen::Index s = t.stages();
  const MatrixX<Scalar> v = vandermonde(t.c, q1);
  const MatrixX<Scalar> e = nilpotent_e<Scalar>(q1);
  switch (part) {
    case ForwardPart::start: {
      MatrixX<Scalar> r = t.A0 * v - t.K0 * v * e;
      r.col(0) -= t.a;
      if (q1 > 1) r.col(1) -= t.b;
      return r;
    }
    case ForwardPart::standard:
    case ForwardPart::end: {
      const bool end = part == ForwardPart::end;
      const MatrixX<Scalar> p_inv = checked_inverse<Scalar>(pascal<Scalar>(q1), "Pascal matrix");
      const MatrixX<Scalar>& a = end ? t.AN : t.A;
      const MatrixX<Scalar>& b = end ? t.BN : t.B;
      const MatrixX<Scalar>& k = end ? t.KN : t.K;
      return a * v - b * v * p_inv - k * v * e;
    }
    case ForwardPart::output:
      return t.w.transpose() * v - RowVectorX<Scalar>::Ones(q1);
  }
  (void)s;
  throw std::logic_error("unhandled forward part");
}

/// Adjoint local order q2 residual. Boundary matrices with full K enter
/// transposed, which coincides with the diagonal-K form when K is diagonal.
///   interp:    v^T V - e1^T
///   start:     A0^T V - B^T V P + K0^T V E
///   standard:  A^T V - B^T V P + K^T V E
///   last_step: A^T V - B_N^T V P + K^T V E
///   end:       A_N^T V + K_N^T V E - w 1^T
template <typename Scalar>
MatrixX<Scalar> adjoint_order_residual(AdjointPart part, const TripletCoefficients<Scalar>& t, Eigen::Index q2)
{
  const MatrixX<Scalar> v = vandermonde(t.c, q2);
  const MatrixX<Scalar> e = nilpotent_e<Scalar>(q2);
  const MatrixX<Scalar> p = pascal<Scalar>(q2);
  switch (part) {
    case AdjointPart::interp: {
      RowVectorX<Scalar> r = t.v.transpose() * v;
      r(0) -= Scalar(1);
      return r;
    }
    case AdjointPart::start:
      return t.A0.transpose() * v - t.B.transpose() * v * p + t.K0.transpose() * v * e;
    case AdjointPart::standard:
      return t.A.transpose() * v - t.B.transpose() * v * p + t.K.transpose() * v * e;
    case AdjointPart::last_step:
      return t.A.transpose() * v - t.BN.transpose() * v * p + t.K.transpose() * v * e;
    case AdjointPart::end:
      return t.AN.transpose() * v + t.KN.transpose() * v * e - t.w * RowVectorX<Scalar>::Ones(q2);
  }
  throw std::logic_error("unhandled adjoint part");
}

/// End adjoint condition with K_N untransposed. Differs from the
/// AdjointPart::end residual only for full K_N; kept for information.
template <typename Scalar>
MatrixX<Scalar> adjoint_end_untransposed_residual(const TripletCoefficients<Scalar>& t, Eigen::Index q2)
{
  const MatrixX<Scalar> v = vandermonde(t.c, q2);
  return t.AN.transpose() * v + t.KN * v * nilpotent_e<Scalar>(q2) - t.w * RowVectorX<Scalar>::Ones(q2);
}

/// Component j is sum_{i != j} (c_i - c_j) K(i, j). Vanishes for diagonal K.
template <typename Scalar>
VectorX<Scalar> one_leg_residual(const MatrixX<Scalar>& k_boundary, const VectorX<Scalar>& c)
{
  const Eigen::Index s = c.size();
  VectorX<Scalar> r = VectorX<Scalar>::Zero(s);
  for (Eigen::Index j = 0; j < s; ++j)
    for (Eigen::Index i = 0; i < s; ++i)
      if (i != j) r(j) += (c(i) - c(j)) * k_boundary(i, j);
  return r;
}

/// Left-eigenvector cancellation of the leading forward and adjoint local
/// errors of the standard method:
///   1^T (A c^s - B (c-1)^s - s K c^{s-1})
///   1^T (A^T c^{s-1} - B^T (c+1)^{s-1} + (s-1) K c^{s-2})
template <typename Scalar>
std::pair<Scalar, Scalar> superconvergence_residuals(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b,
                                                     const MatrixX<Scalar>& k, const VectorX<Scalar>& c, int s)
{
  const VectorX<Scalar> ones = VectorX<Scalar>::Ones(c.size());
  const VectorX<Scalar> cm = c - ones;
  const VectorX<Scalar> cp = c + ones;
  const VectorX<Scalar> fwd = a * cwise_pow(c, s) - b * cwise_pow(cm, s) - Scalar(s) * (k * cwise_pow(c, s - 1));
  VectorX<Scalar> adj = a.transpose() * cwise_pow(c, s - 1) - b.transpose() * cwise_pow(cp, s - 1);
  if (s >= 2) adj += Scalar(s - 1) * (k * cwise_pow(c, s - 2));
  return {fwd.sum(), adj.sum()};
}

/// Conditions on the standard A under which end methods of order (s, s-1)
/// can exist:
///   1^T A 1 - 1,  1^T A c - c^T A 1 - 1,  1^T A c^2 - 2 c^T A c + (c^2)^T A 1.
/// Only the first q2 entries apply; for three stages the third is vacuous.
template <typename Scalar>
std::array<Scalar, 3> compatibility_residuals(const MatrixX<Scalar>& a, const VectorX<Scalar>& c)
{
  const VectorX<Scalar> ones = VectorX<Scalar>::Ones(c.size());
  const VectorX<Scalar> c2 = cwise_pow(c, 2);
  const Scalar r1 = ones.dot(a * ones) - Scalar(1);
  const Scalar r2 = ones.dot(a * c) - c.dot(a * ones) - Scalar(1);
  const Scalar r3 = ones.dot(a * c2) - Scalar(2) * c.dot(a * c) + c2.dot(a * ones);
  return {r1, r2, r3};
}

/// Leading local error vector eta_s = c^s - A^{-1}B (c-1)^s - s A^{-1}K c^{s-1}.
template <typename Scalar>
VectorX<Scalar> leading_error_vector(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b, const MatrixX<Scalar>& k,
                                     const VectorX<Scalar>& c, int s)
{
  const MatrixX<Scalar> a_inv = checked_inverse<Scalar>(a, "standard A");
  const VectorX<Scalar> ones = VectorX<Scalar>::Ones(c.size());
  return cwise_pow(c, s) - a_inv * (b * cwise_pow(VectorX<Scalar>(c - ones), s)) -
         Scalar(s) * (a_inv * (k * cwise_pow(c, s - 1)));
}

/// err_s = |eta_s|_inf / s!.
template <typename Scalar>
Scalar error_constant(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b, const MatrixX<Scalar>& k,
                      const VectorX<Scalar>& c, int s)
{
  const VectorX<Scalar> eta = leading_error_vector(a, b, k, c, s);
  Scalar norm(0);
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    if (abs_value<Scalar>(eta(i)) > norm) norm = abs_value<Scalar>(eta(i));
  Scalar factorial(1);
  for (int i = 2; i <= s; ++i) factorial *= Scalar(i);
  return norm / factorial;
}

/// X -> E_q^T X + X E_s on q x s matrices.
template <typename Scalar>
MatrixX<Scalar> l_map(const MatrixX<Scalar>& x)
{
  return nilpotent_e<Scalar>(x.rows()).transpose() * x + x * nilpotent_e<Scalar>(x.cols());
}

/// Basis of the kernel of the adjoint map X -> E_q X + X E_s^T for q = s-1:
/// X_k = sum_{i+j=k+1} (-1)^{i-1} binom(k-1, i-1) e_i e_j^T, k = 1..q.
template <typename Scalar>
std::vector<MatrixX<Scalar>> l_map_cokernel_basis(Eigen::Index q, Eigen::Index s)
{
  if (q != s - 1 || q < 1) throw DimensionError("cokernel basis is implemented for q = s-1 only");
  const MatrixX<Scalar> binom = pascal<Scalar>(q);
  std::vector<MatrixX<Scalar>> basis;
  for (Eigen::Index k = 1; k <= q; ++k) {
    MatrixX<Scalar> x = MatrixX<Scalar>::Zero(q, s);
    for (Eigen::Index i = 1; i <= k; ++i) {
      const Scalar sign = (i % 2 == 1) ? Scalar(1) : Scalar(-1);
      x(i - 1, k - i) = sign * binom(i - 1, k - 1);
    }
    basis.push_back(std::move(x));
  }
  return basis;
}

template <typename Scalar>
struct EndSolvability
{
  MatrixX<Scalar> residual;       ///< L(V_q^T K_N V_s) - (1 1^T - V_q^T B V_s P_s^{-1})
  std::vector<Scalar> pairings;   ///< tr(X_k^T R), R = 1_q 1_s^T P_s - V_q^T B V_s
};

/// Necessary condition linking the end K_N to the standard B, plus the
/// Fredholm pairings that must vanish for any K_N to exist.
template <typename Scalar>
EndSolvability<Scalar> end_solvability_residual(const MatrixX<Scalar>& b, const MatrixX<Scalar>& k_end,
                                                const VectorX<Scalar>& c, Eigen::Index q, Eigen::Index s)
{
  if (c.size() != s || q != s - 1) throw DimensionError("end solvability: unsupported (q, s) combination");
  const MatrixX<Scalar> vq = vandermonde(c, q);
  const MatrixX<Scalar> vs = vandermonde(c, s);
  const MatrixX<Scalar> ps = pascal<Scalar>(s);
  const MatrixX<Scalar> ps_inv = checked_inverse<Scalar>(ps, "Pascal matrix");
  const MatrixX<Scalar> ones = MatrixX<Scalar>::Ones(q, s);
  const MatrixX<Scalar> vbv = vq.transpose() * b * vs;

  EndSolvability<Scalar> out;
  out.residual = l_map<Scalar>(MatrixX<Scalar>(vq.transpose() * k_end * vs)) - (ones - vbv * ps_inv);
  const MatrixX<Scalar> r = ones * ps - vbv;
  for (const auto& x : l_map_cokernel_basis<Scalar>(q, s)) out.pairings.push_back((x.transpose() * r).trace());
  return out;
}

/// (L(P_q^{-T} V_q^T K0 V_s) - V_q^T B V_s) Q, Q = I - e1 e1^T - e2 e2^T.
template <typename Scalar>
MatrixX<Scalar> start_solvability_residual(const MatrixX<Scalar>& b, const MatrixX<Scalar>& k_start,
                                           const VectorX<Scalar>& c, Eigen::Index q, Eigen::Index s)
{
  if (c.size() != s || q < 1 || q > s) throw DimensionError("start solvability: unsupported (q, s) combination");
  const MatrixX<Scalar> vq = vandermonde(c, q);
  const MatrixX<Scalar> vs = vandermonde(c, s);
  const MatrixX<Scalar> pq_inv_t =
      checked_inverse<Scalar>(pascal<Scalar>(q), "Pascal matrix").transpose();
  MatrixX<Scalar> proj = MatrixX<Scalar>::Identity(s, s);
  proj(0, 0) = Scalar(0);
  if (s > 1) proj(1, 1) = Scalar(0);
  return (l_map<Scalar>(MatrixX<Scalar>(pq_inv_t * vq.transpose() * k_start * vs)) - vq.transpose() * b * vs) * proj;
}

/// Combined forward/adjoint identity of the standard method with B eliminated:
/// (V2 P2)^T A (V1 P1) - V2^T A V1 - (V2 P2)^T K V1 P1 E1 - (V2 E2)^T K V1.
template <typename Scalar>
MatrixX<Scalar> sylvester_residual(const MatrixX<Scalar>& a, const MatrixX<Scalar>& k, const VectorX<Scalar>& c,
                                   Eigen::Index q1, Eigen::Index q2)
{
  const MatrixX<Scalar> v1 = vandermonde(c, q1);
  const MatrixX<Scalar> v2 = vandermonde(c, q2);
  const MatrixX<Scalar> v1p = v1 * pascal<Scalar>(q1);
  const MatrixX<Scalar> v2p = v2 * pascal<Scalar>(q2);
  return v2p.transpose() * a * v1p - v2.transpose() * a * v1 - v2p.transpose() * k * v1p * nilpotent_e<Scalar>(q1) -
         (v2 * nilpotent_e<Scalar>(q2)).transpose() * k * v1;
}

/// Largest spread of entries along any anti-diagonal; zero iff Hankel.
template <typename Scalar>
Scalar hankel_spread(const MatrixX<Scalar>& x)
{
  Scalar worst(0);
  for (Eigen::Index d = 0; d <= x.rows() + x.cols() - 2; ++d) {
    bool first = true;
    Scalar lo(0), hi(0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const Eigen::Index j = d - i;
      if (j < 0 || j >= x.cols()) continue;
      if (first || x(i, j) < lo) lo = x(i, j);
      if (first || x(i, j) > hi) hi = x(i, j);
      first = false;
    }
    if (hi - lo > worst) worst = hi - lo;
  }
  return worst;
}

/// Hankel defect of V_q^T K V_s. Zero whenever K is diagonal.
template <typename Scalar>
Scalar hankel_defect(const MatrixX<Scalar>& k, const VectorX<Scalar>& c, Eigen::Index q, Eigen::Index s)
{
  return hankel_spread<Scalar>(MatrixX<Scalar>(vandermonde(c, q).transpose() * k * vandermonde(c, s)));
}

}  // namespace peeroc
