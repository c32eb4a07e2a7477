#pragma once

// Exact arithmetic kernel: arbitrary-precision rationals, a gcd-free
// base-m-adic representation for dynamic-programming values (all of which
// have denominator m^e), and exact decimal rendering of enclosures.

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dicetau {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

inline constexpr std::size_t kDefaultDigitBudget = 1100;

BigInt pow_int(const BigInt& base, std::uint64_t e);
BigInt pow10(std::uint64_t e);

// Exact (num/den)^e.
Rational pow_ratio(const BigInt& num, const BigInt& den, std::uint64_t e);
Rational pow_rational(const Rational& r, std::uint64_t e);

BigInt ceil_rational(const Rational& x);

// Decimal expansion truncated toward zero, exactly `digits` fractional
// digits, no binary float involved.
std::string to_decimal(const Rational& x, std::size_t digits);

// Accepts "p/q", integers, decimals, and scientific notation ("1e-80",
// "-2.5e3"); always exact.
Rational parse_rational(std::string_view text);

struct Scientific {
  std::string mantissa;     // "d.ddd...", truncated toward zero
  std::int64_t exponent10;  // value = mantissa * 10^exponent10
  std::string str() const;
};

Scientific to_scientific(const Rational& x, std::size_t significant);

// Certified lower/upper pair. Exact rationals, so no directed rounding is
// needed anywhere downstream.
struct Enclosure {
  Rational lower;
  Rational upper;

  Enclosure(Rational lo, Rational up);
  Rational width() const { return upper - lower; }
  bool contains(const Rational& x) const { return lower <= x && x <= upper; }
  bool zero_width() const { return lower == upper; }
};

struct AgreedPrefix {
  std::size_t fractional_digits = 0;
  std::string digits;  // longest common prefix of both truncated expansions
};

// The certified digit string reported to users: the longest common prefix
// of the truncated decimal expansions of lower and upper. When the
// enclosure has zero width the count is capped at the requested budget.
AgreedPrefix agreed_prefix(const Enclosure& e, std::size_t budget = kDefaultDigitBudget);

// Rational of the form mantissa / base^exponent. Every DP value has a
// denominator dividing m^depth, so arithmetic needs no gcd at all:
// normalization only strips whole factors of the base.
class BaseMAdic {
 public:
  explicit BaseMAdic(unsigned base);
  BaseMAdic(BigInt mantissa, std::uint64_t exponent, unsigned base);

  static BaseMAdic from_integer(const BigInt& v, unsigned base);
  // Throws std::domain_error when den(x) does not divide base^e.
  static BaseMAdic from_rational(const Rational& x, unsigned base);

  unsigned base() const { return base_; }
  const BigInt& mantissa() const { return mantissa_; }
  std::uint64_t exponent() const { return exponent_; }
  bool is_zero() const { return mantissa_.is_zero(); }

  Rational to_rational() const;

  // Strips factors of base from the mantissa; never runs a full gcd.
  BaseMAdic& normalize();

  // this += coeff * x, aligning exponents. The DP hot path: when the
  // alignment multiplier times coeff fits a machine word this is a single
  // fused mpz_addmul_ui.
  void add_scaled(const BaseMAdic& x, std::uint64_t coeff);

  // Raise the representation to exponent e (>= current), scaling the
  // mantissa accordingly; value unchanged.
  void raise_exponent(std::uint64_t e);

  void divide_by_base(std::uint64_t times = 1) { exponent_ += times; }

  BaseMAdic& operator+=(const BaseMAdic& rhs);
  BaseMAdic& operator-=(const BaseMAdic& rhs);
  BaseMAdic& operator*=(const BaseMAdic& rhs);

  friend BaseMAdic operator+(BaseMAdic a, const BaseMAdic& b) { return a += b; }
  friend BaseMAdic operator-(BaseMAdic a, const BaseMAdic& b) { return a -= b; }
  friend BaseMAdic operator*(BaseMAdic a, const BaseMAdic& b) { return a *= b; }

  friend bool operator==(const BaseMAdic& a, const BaseMAdic& b);

 private:
  BigInt mantissa_;
  std::uint64_t exponent_ = 0;
  unsigned base_;
};

}  // namespace dicetau
