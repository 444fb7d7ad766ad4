#pragma once

#include "peeroc/exact_scalar.hpp"
#include "peeroc/special_matrices.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace peeroc {

/// B_n = (A_n V_s - K_n V_s E_s) P_s V_s^{-1}. The returned matrix makes the
/// forward step exact for polynomials of degree < s.
template <typename Scalar>
MatrixX<Scalar> derive_b(const MatrixX<Scalar>& a, const MatrixX<Scalar>& k, const VectorX<Scalar>& c)
{
  const Eigen::Index s = c.size();
  if (a.rows() != s || a.cols() != s || k.rows() != s || k.cols() != s)
    throw DimensionError("derive_b: coefficient matrices must be s x s");
  const MatrixX<Scalar> v = vandermonde(c, s);
  const MatrixX<Scalar> v_inv = checked_inverse<Scalar>(v, "Vandermonde matrix (duplicate nodes?)");
  return (a * v - k * v * nilpotent_e<Scalar>(s)) * pascal<Scalar>(s) * v_inv;
}

template <typename Scalar>
struct StartVectors
{
  VectorX<Scalar> a;
  VectorX<Scalar> b;
};

/// a = A0 1, b = A0 c - K0 1.
template <typename Scalar>
StartVectors<Scalar> derive_start_vectors(const MatrixX<Scalar>& a0, const MatrixX<Scalar>& k0,
                                          const VectorX<Scalar>& c)
{
  const VectorX<Scalar> ones = VectorX<Scalar>::Ones(c.size());
  return {a0 * ones, a0 * c - k0 * ones};
}

template <typename Scalar>
struct OutputVectors
{
  VectorX<Scalar> w;  ///< w^T V_s = 1^T, end-point state output
  VectorX<Scalar> v;  ///< v^T V_s = e1^T, initial adjoint interpolant
};

template <typename Scalar>
OutputVectors<Scalar> derive_output_vectors(const VectorX<Scalar>& c)
{
  const Eigen::Index s = c.size();
  const MatrixX<Scalar> vt_inv =
      checked_inverse<Scalar>(MatrixX<Scalar>(vandermonde(c, s).transpose()), "Vandermonde matrix (duplicate nodes?)");
  return {vt_inv * VectorX<Scalar>::Ones(s), vt_inv * unit_vector<Scalar>(s, 0)};
}

/// Every coefficient of a triplet, printed and derived, in one scalar type.
template <typename Scalar>
struct TripletCoefficients
{
  VectorX<Scalar> c;
  MatrixX<Scalar> A, B, K;     ///< standard method
  MatrixX<Scalar> A0, K0;      ///< starting method
  VectorX<Scalar> a, b;        ///< starting vectors
  MatrixX<Scalar> AN, BN, KN;  ///< end method
  VectorX<Scalar> w, v;        ///< output and interpolation vectors

  Eigen::Index stages() const { return c.size(); }
};

/// A Peer triplet as printed: nodes plus the (A_n, K_n) pairs of the starting,
/// standard and end methods. B, B_N, a, b, w and v are derived on demand.
struct PeerTriplet
{
  std::string name;
  int s = 0;
  int q1 = 0;  ///< claimed forward local order
  int q2 = 0;  ///< claimed adjoint local order
  ExactVector c;
  ExactMatrix A, K;
  ExactMatrix A0, K0;
  ExactMatrix AN, KN;

  /// True when every printed entry is rational, so all derived quantities can
  /// be computed exactly.
  bool is_rational() const;

  template <typename Scalar>
  TripletCoefficients<Scalar> coefficients() const
  {
    TripletCoefficients<Scalar> t;
    t.c = to_vector<Scalar>(c);
    t.A = A.as<Scalar>();
    t.K = K.as<Scalar>();
    t.A0 = A0.as<Scalar>();
    t.K0 = K0.as<Scalar>();
    t.AN = AN.as<Scalar>();
    t.KN = KN.as<Scalar>();
    t.B = derive_b(t.A, t.K, t.c);
    t.BN = derive_b(t.AN, t.KN, t.c);
    auto start = derive_start_vectors(t.A0, t.K0, t.c);
    t.a = std::move(start.a);
    t.b = std::move(start.b);
    auto out = derive_output_vectors(t.c);
    t.w = std::move(out.w);
    t.v = std::move(out.v);
    return t;
  }

  friend bool operator==(const PeerTriplet&, const PeerTriplet&) = default;
};

class UnknownMethodError : public std::invalid_argument
{
public:
  explicit UnknownMethodError(const std::string& name) : std::invalid_argument("unknown method '" + name + "'") {}
};

/// Built-in names in presentation order.
const std::vector<std::string>& builtin_triplet_names();

/// Throws UnknownMethodError for names outside builtin_triplet_names().
PeerTriplet load_triplet(std::string_view name);

class TripletParseError : public std::runtime_error
{
public:
  TripletParseError(const std::string& field, const std::string& message, int line = 0);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

private:
  std::string field_;
  int line_;
};

/// JSON document with string-valued entries ("p/q" or a decimal literal).
/// Derived fields are never written.
std::string triplet_to_text(const PeerTriplet& t);

/// Inverse of triplet_to_text. Throws TripletParseError.
PeerTriplet parse_triplet(std::string_view text);

}  // namespace peeroc
