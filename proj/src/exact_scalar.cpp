#include "peeroc/exact_scalar.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>

namespace peeroc {

namespace {

bool is_integer_literal(std::string_view s)
{
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isdigit(ch); });
}

std::string trim(std::string_view s)
{
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

boost::multiprecision::mpz_int parse_integer(const std::string& s)
{
  if (s.front() == '+') return boost::multiprecision::mpz_int(s.substr(1));
  return boost::multiprecision::mpz_int(s);
}

}  // namespace

ExactScalar ExactScalar::parse(std::string_view raw)
{
  const std::string text = trim(raw);
  if (text.empty()) throw std::invalid_argument("empty coefficient");

  if (const auto slash = text.find('/'); slash != std::string::npos) {
    const std::string num = trim(std::string_view(text).substr(0, slash));
    const std::string den = trim(std::string_view(text).substr(slash + 1));
    if (!is_integer_literal(num) || !is_integer_literal(den))
      throw std::invalid_argument("malformed rational '" + text + "'");
    const auto d = parse_integer(den);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    return ExactScalar(Rational(parse_integer(num), d));
  }
  if (is_integer_literal(text)) return ExactScalar(Rational(parse_integer(text)));

  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw std::invalid_argument("malformed decimal '" + text + "'");
  ExactScalar out;
  out.value_ = Decimal{text, value};
  return out;
}

const Rational& ExactScalar::rational() const
{
  if (const auto* r = std::get_if<Rational>(&value_)) return *r;
  throw std::logic_error("coefficient '" + to_string() + "' is a decimal, not a rational");
}

double ExactScalar::to_double() const
{
  if (const auto* r = std::get_if<Rational>(&value_)) return r->convert_to<double>();
  return std::get<Decimal>(value_).value;
}

std::string ExactScalar::to_string() const
{
  if (const auto* r = std::get_if<Rational>(&value_)) {
    const auto num = boost::multiprecision::numerator(*r);
    const auto den = boost::multiprecision::denominator(*r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
  }
  return std::get<Decimal>(value_).text;
}

bool operator==(const ExactScalar& a, const ExactScalar& b)
{
  if (a.is_rational() != b.is_rational()) return false;
  if (a.is_rational()) return a.rational() == b.rational();
  return a.to_string() == b.to_string();
}

bool ExactMatrix::is_rational() const
{
  return std::all_of(data_.begin(), data_.end(), [](const ExactScalar& x) { return x.is_rational(); });
}

}  // namespace peeroc
