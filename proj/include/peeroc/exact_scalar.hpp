#pragma once

#include "peeroc/scalar.hpp"

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace peeroc {

/// A printed coefficient: either an exact rational ("p/q" or an integer) or a
/// decimal literal kept verbatim. Decimals are parsed to double once and never
/// re-rounded, so serialisation reproduces the original text.
class ExactScalar
{
public:
  ExactScalar() : value_(Rational(0)) {}
  explicit ExactScalar(Rational r) : value_(std::move(r)) {}
  ExactScalar(long numerator, long denominator) : value_(Rational(numerator, denominator)) {}

  /// Throws std::invalid_argument on malformed text or a zero denominator.
  static ExactScalar parse(std::string_view text);

  bool is_rational() const { return std::holds_alternative<Rational>(value_); }
  const Rational& rational() const;

  double to_double() const;
  std::string to_string() const;

  template <typename Scalar>
  Scalar as() const
  {
    if constexpr (is_exact_v<Scalar>)
      return rational();
    else
      return static_cast<Scalar>(to_double());
  }

  friend bool operator==(const ExactScalar& a, const ExactScalar& b);

private:
  struct Decimal
  {
    std::string text;
    double value;
  };
  std::variant<Rational, Decimal> value_;
};

/// Dense row-major storage of printed coefficients.
class ExactMatrix
{
public:
  ExactMatrix() = default;
  ExactMatrix(Eigen::Index rows, Eigen::Index cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  ExactScalar& operator()(Eigen::Index i, Eigen::Index j) { return data_[i * cols_ + j]; }
  const ExactScalar& operator()(Eigen::Index i, Eigen::Index j) const { return data_[i * cols_ + j]; }

  bool is_rational() const;

  template <typename Scalar>
  MatrixX<Scalar> as() const
  {
    MatrixX<Scalar> m(rows_, cols_);
    for (Eigen::Index i = 0; i < rows_; ++i)
      for (Eigen::Index j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).template as<Scalar>();
    return m;
  }

  friend bool operator==(const ExactMatrix&, const ExactMatrix&) = default;

private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<ExactScalar> data_;
};

using ExactVector = std::vector<ExactScalar>;

template <typename Scalar>
VectorX<Scalar> to_vector(const ExactVector& v)
{
  VectorX<Scalar> out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i].template as<Scalar>();
  return out;
}

}  // namespace peeroc
