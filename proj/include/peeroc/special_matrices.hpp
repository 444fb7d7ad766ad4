#pragma once

#include "peeroc/scalar.hpp"

namespace peeroc {

/// V_q = (1, c, c^2, ..., c^{q-1}), an s x q matrix.
template <typename Derived>
MatrixX<typename Derived::Scalar> vandermonde(const Eigen::MatrixBase<Derived>& c, Eigen::Index q)
{
  using Scalar = typename Derived::Scalar;
  if (q < 1) throw DimensionError("vandermonde: column count must be >= 1");
  MatrixX<Scalar> v(c.size(), q);
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    Scalar p(1);
    for (Eigen::Index j = 0; j < q; ++j) {
      v(i, j) = p;
      p *= c(i);
    }
  }
  return v;
}

/// Upper triangular Pascal matrix, entry (i, j) = binom(j, i) (0-based).
template <typename Scalar>
MatrixX<Scalar> pascal(Eigen::Index q)
{
  if (q < 1) throw DimensionError("pascal: size must be >= 1");
  MatrixX<Scalar> p = MatrixX<Scalar>::Zero(q, q);
  for (Eigen::Index j = 0; j < q; ++j) {
    p(0, j) = Scalar(1);
    for (Eigen::Index i = 1; i <= j; ++i) p(i, j) = p(i - 1, j - 1) + (i < j ? p(i, j - 1) : Scalar(0));
  }
  return p;
}

/// Nilpotent differentiation matrix, entry (i, i+1) = i+1 (0-based).
/// Satisfies pascal(q) = exp(nilpotent_e(q)).
template <typename Scalar>
MatrixX<Scalar> nilpotent_e(Eigen::Index q)
{
  if (q < 1) throw DimensionError("nilpotent_e: size must be >= 1");
  MatrixX<Scalar> e = MatrixX<Scalar>::Zero(q, q);
  for (Eigen::Index i = 0; i + 1 < q; ++i) e(i, i + 1) = Scalar(static_cast<long>(i + 1));
  return e;
}

/// Elementwise power x^k; x^0 is the ones vector.
template <typename Derived>
VectorX<typename Derived::Scalar> cwise_pow(const Eigen::MatrixBase<Derived>& x, int k)
{
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Scalar p(1);
    for (int e = 0; e < k; ++e) p *= x(i);
    out(i) = p;
  }
  return out;
}

template <typename Scalar>
VectorX<Scalar> unit_vector(Eigen::Index n, Eigen::Index i)
{
  VectorX<Scalar> e = VectorX<Scalar>::Zero(n);
  e(i) = Scalar(1);
  return e;
}

}  // namespace peeroc
