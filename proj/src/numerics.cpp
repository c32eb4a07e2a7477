#include "dicetau/numerics.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace dicetau {

namespace {

void check_base(unsigned base) {
  if (base < 2) throw std::invalid_argument("BaseMAdic: base must be >= 2");
}

}  // namespace

BigInt pow_int(const BigInt& base, std::uint64_t e) {
  BigInt r;
  mpz_pow_ui(r.backend().data(), base.backend().data(), e);
  return r;
}

BigInt pow10(std::uint64_t e) {
  BigInt r;
  mpz_ui_pow_ui(r.backend().data(), 10u, e);
  return r;
}

Rational pow_ratio(const BigInt& num, const BigInt& den, std::uint64_t e) {
  if (den <= 0) throw std::invalid_argument("pow_ratio: denominator must be positive");
  if (e == 0) return Rational(1);
  return Rational(pow_int(num, e), pow_int(den, e));
}

Rational pow_rational(const Rational& r, std::uint64_t e) {
  return pow_ratio(numerator(r), denominator(r), e);
}

BigInt ceil_rational(const Rational& x) {
  BigInt q;
  mpz_cdiv_q(q.backend().data(), numerator(x).backend().data(), denominator(x).backend().data());
  return q;
}

std::string to_decimal(const Rational& x, std::size_t digits) {
  if (digits < 1) throw std::invalid_argument("to_decimal: digits must be >= 1");
  BigInt num = numerator(x);
  const BigInt& den = denominator(x);
  const bool negative = num < 0;
  if (negative) num = -num;

  BigInt ip, rem;
  divide_qr(num, den, ip, rem);
  BigInt frac = (rem * pow10(digits)) / den;  // floor == truncation: all nonnegative

  std::string fs = frac.str();
  std::string out;
  if (negative) out += '-';
  out += ip.str();
  out += '.';
  out.append(digits - fs.size(), '0');
  out += fs;
  return out;
}

namespace {

// A leading '0' would make the BigInt string constructor read the digits as
// octal (and reject 8 or 9); strip zeros before converting.
BigInt digits_to_int(const std::string& ds) {
  const std::size_t nz = ds.find_first_not_of('0');
  return BigInt(nz == std::string::npos ? std::string("0") : ds.substr(nz));
}

}  // namespace

Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw std::invalid_argument("parse_rational: invalid number '" + std::string(text) + "'");
  };
  std::size_t i = 0;
  auto peek = [&]() -> char { return i < text.size() ? text[i] : '\0'; };
  bool negative = false;
  if (peek() == '+' || peek() == '-') negative = text[i++] == '-';

  std::string int_digits;
  while (std::isdigit(static_cast<unsigned char>(peek()))) int_digits += text[i++];
  if (int_digits.empty()) return fail();

  if (peek() == '/') {
    ++i;
    std::string den_digits;
    while (std::isdigit(static_cast<unsigned char>(peek()))) den_digits += text[i++];
    if (den_digits.empty() || i != text.size()) return fail();
    BigInt den = digits_to_int(den_digits);
    if (den == 0) return fail();
    Rational r(digits_to_int(int_digits), den);
    return negative ? Rational(-r) : r;
  }

  std::string frac_digits;
  if (peek() == '.') {
    ++i;
    while (std::isdigit(static_cast<unsigned char>(peek()))) frac_digits += text[i++];
    if (frac_digits.empty()) return fail();
  }
  std::int64_t exp10 = 0;
  if (peek() == 'e' || peek() == 'E') {
    ++i;
    bool eneg = false;
    if (peek() == '+' || peek() == '-') eneg = text[i++] == '-';
    std::string exp_digits;
    while (std::isdigit(static_cast<unsigned char>(peek()))) exp_digits += text[i++];
    if (exp_digits.empty() || exp_digits.size() > 9) return fail();
    exp10 = std::strtoll(exp_digits.c_str(), nullptr, 10);
    if (eneg) exp10 = -exp10;
  }
  if (i != text.size()) return fail();

  BigInt mantissa = digits_to_int(int_digits + frac_digits);
  std::int64_t shift = exp10 - static_cast<std::int64_t>(frac_digits.size());
  Rational r(mantissa);
  if (shift > 0) r *= Rational(pow10(static_cast<std::uint64_t>(shift)));
  if (shift < 0) r /= Rational(pow10(static_cast<std::uint64_t>(-shift)));
  return negative ? Rational(-r) : r;
}

std::string Scientific::str() const {
  std::string out = mantissa;
  out += 'e';
  out += exponent10 < 0 ? '-' : '+';
  out += std::to_string(exponent10 < 0 ? -exponent10 : exponent10);
  return out;
}

Scientific to_scientific(const Rational& x, std::size_t significant) {
  if (significant < 1) throw std::invalid_argument("to_scientific: need >= 1 digit");
  if (x == 0) {
    std::string m = "0";
    if (significant > 1) m += "." + std::string(significant - 1, '0');
    return {m, 0};
  }
  BigInt num = numerator(x);
  const bool negative = num < 0;
  if (negative) num = -num;
  const BigInt& den = denominator(x);

  // e10 = floor(log10 |x|): estimate from digit counts, then correct.
  auto digits10 = [](const BigInt& v) {
    return static_cast<std::int64_t>(mpz_sizeinbase(v.backend().data(), 10));
  };
  std::int64_t e10 = digits10(num) - digits10(den);
  auto at_least = [&](std::int64_t e) {
    // 10^e <= num/den ?
    if (e >= 0) return num >= den * pow10(static_cast<std::uint64_t>(e));
    return num * pow10(static_cast<std::uint64_t>(-e)) >= den;
  };
  while (!at_least(e10)) --e10;
  while (at_least(e10 + 1)) ++e10;

  std::int64_t scale = static_cast<std::int64_t>(significant) - 1 - e10;
  BigInt scaled_num = num, scaled_den = den;
  if (scale > 0) scaled_num *= pow10(static_cast<std::uint64_t>(scale));
  if (scale < 0) scaled_den *= pow10(static_cast<std::uint64_t>(-scale));
  BigInt mant = scaled_num / scaled_den;  // truncation

  std::string digits = mant.str();
  std::string m;
  if (negative) m += '-';
  m += digits[0];
  if (digits.size() > 1) {
    m += '.';
    m.append(digits, 1, std::string::npos);
  }
  return {m, e10};
}

Enclosure::Enclosure(Rational lo, Rational up) : lower(std::move(lo)), upper(std::move(up)) {
  if (lower > upper) throw std::invalid_argument("Enclosure: lower > upper");
}

AgreedPrefix agreed_prefix(const Enclosure& e, std::size_t budget) {
  std::string lo = to_decimal(e.lower, budget);
  std::string up = to_decimal(e.upper, budget);
  const std::size_t lo_dot = lo.find('.');
  const std::size_t up_dot = up.find('.');
  if (lo == up) return {budget, lo};
  // Different signs or different integer-part widths certify nothing.
  if ((lo[0] == '-') != (up[0] == '-')) return {0, ""};
  if (lo_dot != up_dot) return {0, ""};

  std::size_t i = 0;
  while (i < lo.size() && lo[i] == up[i]) ++i;
  std::string prefix = lo.substr(0, i);
  if (!prefix.empty() && prefix.back() == '.') prefix.pop_back();
  std::size_t frac = i > lo_dot ? i - lo_dot - 1 : 0;
  return {frac, prefix};
}

BaseMAdic::BaseMAdic(unsigned base) : mantissa_(0), base_(base) { check_base(base); }

BaseMAdic::BaseMAdic(BigInt mantissa, std::uint64_t exponent, unsigned base)
    : mantissa_(std::move(mantissa)), exponent_(exponent), base_(base) {
  check_base(base);
}

BaseMAdic BaseMAdic::from_integer(const BigInt& v, unsigned base) {
  return BaseMAdic(v, 0, base);
}

BaseMAdic BaseMAdic::from_rational(const Rational& x, unsigned base) {
  check_base(base);
  const BigInt& den = denominator(x);
  // Smallest e with den | base^e, if one exists: factor the base and take
  // the worst per-prime quotient of multiplicities.
  std::uint64_t e = 0;
  unsigned rest = base;
  for (unsigned p = 2; p <= rest; ++p) {
    if (rest % p != 0) continue;
    unsigned a = 0;
    while (rest % p == 0) {
      rest /= p;
      ++a;
    }
    std::uint64_t vp = 0;
    BigInt d = den;
    while (mpz_divisible_ui_p(d.backend().data(), p)) {
      mpz_divexact_ui(d.backend().data(), d.backend().data(), p);
      ++vp;
    }
    e = std::max(e, (vp + a - 1) / a);
  }
  BigInt scale = pow_int(BigInt(base), e);
  if (!mpz_divisible_p(scale.backend().data(), den.backend().data()))
    throw std::domain_error("BaseMAdic: denominator is not a divisor of base^e");
  return BaseMAdic(numerator(x) * (scale / den), e, base);
}

Rational BaseMAdic::to_rational() const {
  return Rational(mantissa_, pow_int(BigInt(base_), exponent_));
}

BaseMAdic& BaseMAdic::normalize() {
  if (mantissa_.is_zero()) {
    exponent_ = 0;
    return *this;
  }
  while (exponent_ > 0 && mpz_divisible_ui_p(mantissa_.backend().data(), base_)) {
    mpz_divexact_ui(mantissa_.backend().data(), mantissa_.backend().data(), base_);
    --exponent_;
  }
  return *this;
}

void BaseMAdic::raise_exponent(std::uint64_t e) {
  if (e < exponent_) throw std::invalid_argument("raise_exponent: cannot lower exponent");
  if (e == exponent_) return;
  if (!mantissa_.is_zero()) mantissa_ *= pow_int(BigInt(base_), e - exponent_);
  exponent_ = e;
}

void BaseMAdic::add_scaled(const BaseMAdic& x, std::uint64_t coeff) {
  if (x.base_ != base_) throw std::invalid_argument("add_scaled: base mismatch");
  if (coeff == 0 || x.is_zero()) return;
  if (x.exponent_ > exponent_) raise_exponent(x.exponent_);
  const std::uint64_t delta = exponent_ - x.exponent_;

  // Fused path: alignment multiplier * coeff in one machine word.
  std::uint64_t mult = coeff;
  bool fits = true;
  for (std::uint64_t i = 0; i < delta && fits; ++i)
    fits = !__builtin_mul_overflow(mult, static_cast<std::uint64_t>(base_), &mult);
  if (fits) {
    mpz_addmul_ui(mantissa_.backend().data(), x.mantissa_.backend().data(), mult);
    return;
  }
  BigInt term = x.mantissa_ * pow_int(BigInt(base_), delta);
  mpz_addmul_ui(mantissa_.backend().data(), term.backend().data(), coeff);
}

BaseMAdic& BaseMAdic::operator+=(const BaseMAdic& rhs) {
  if (rhs.base_ != base_) throw std::invalid_argument("BaseMAdic: base mismatch");
  if (rhs.exponent_ > exponent_) raise_exponent(rhs.exponent_);
  if (rhs.exponent_ == exponent_) {
    mantissa_ += rhs.mantissa_;
  } else {
    mantissa_ += rhs.mantissa_ * pow_int(BigInt(base_), exponent_ - rhs.exponent_);
  }
  return *this;
}

BaseMAdic& BaseMAdic::operator-=(const BaseMAdic& rhs) {
  if (rhs.base_ != base_) throw std::invalid_argument("BaseMAdic: base mismatch");
  if (rhs.exponent_ > exponent_) raise_exponent(rhs.exponent_);
  if (rhs.exponent_ == exponent_) {
    mantissa_ -= rhs.mantissa_;
  } else {
    mantissa_ -= rhs.mantissa_ * pow_int(BigInt(base_), exponent_ - rhs.exponent_);
  }
  return *this;
}

BaseMAdic& BaseMAdic::operator*=(const BaseMAdic& rhs) {
  if (rhs.base_ != base_) throw std::invalid_argument("BaseMAdic: base mismatch");
  mantissa_ *= rhs.mantissa_;
  exponent_ += rhs.exponent_;
  return *this;
}

bool operator==(const BaseMAdic& a, const BaseMAdic& b) {
  if (a.base_ != b.base_) return false;
  if (a.exponent_ == b.exponent_) return a.mantissa_ == b.mantissa_;
  // Value comparison: align the smaller exponent.
  const BaseMAdic& low = a.exponent_ < b.exponent_ ? a : b;
  const BaseMAdic& high = a.exponent_ < b.exponent_ ? b : a;
  return low.mantissa_ * pow_int(BigInt(a.base_), high.exponent_ - low.exponent_) == high.mantissa_;
}

}  // namespace dicetau
