#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace peeroc {

/// Arbitrary precision rational. Expression templates are disabled so the
/// type composes cleanly with Eigen's own expression machinery.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

template <typename Scalar>
inline constexpr bool is_exact_v = std::is_same_v<Scalar, Rational>;

template <typename Scalar>
double to_double(const Scalar& x)
{
  if constexpr (is_exact_v<Scalar>)
    return x.template convert_to<double>();
  else
    return static_cast<double>(x);
}

template <typename Scalar>
Scalar abs_value(const Scalar& x)
{
  if constexpr (is_exact_v<Scalar>)
    return x < 0 ? Scalar(-x) : x;
  else
    return std::abs(x);
}

/// Largest absolute entry, as a double. Zero for empty input.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m)
{
  using Scalar = typename Derived::Scalar;
  Scalar best(0);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      Scalar a = abs_value<Scalar>(m(i, j));
      if (a > best) best = a;
    }
  return to_double(best);
}

template <typename Derived>
bool is_exactly_zero(const Eigen::MatrixBase<Derived>& m)
{
  using Scalar = typename Derived::Scalar;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != Scalar(0)) return false;
  return true;
}

template <typename Scalar>
MatrixX<double> to_double_matrix(const MatrixX<Scalar>& m)
{
  MatrixX<double> out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) out(i, j) = to_double(m(i, j));
  return out;
}

class SingularMatrixError : public std::runtime_error
{
public:
  explicit SingularMatrixError(const std::string& what)
      : std::runtime_error("singular matrix: " + what)
  {}
};

class DimensionError : public std::invalid_argument
{
public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Inverse of a square matrix. Singularity is decided exactly for rationals
/// and by full pivoting rank for floating point.
template <typename Scalar>
MatrixX<Scalar> checked_inverse(const MatrixX<Scalar>& m, const std::string& what)
{
  if (m.rows() != m.cols()) throw DimensionError(what + " is not square");
  Eigen::FullPivLU<MatrixX<Scalar>> lu(m);
  if constexpr (is_exact_v<Scalar>) {
    if (lu.determinant() == Scalar(0)) throw SingularMatrixError(what);
  } else {
    if (!lu.isInvertible()) throw SingularMatrixError(what);
  }
  return lu.inverse();
}

}  // namespace peeroc
