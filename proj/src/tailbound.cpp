#include "dicetau/tailbound.hpp"

#include <bit>

namespace dicetau {

namespace {

// Certified bounds on ln v for integer v >= 2:
//   ln v = a ln2 + 2 atanh(z),  z = (v - 2^a)/(v + 2^a) in [0, 1/3),
// with the atanh series cut after `terms` terms and the remainder bounded by
// z^(2T+1) / ((2T+1)(1 - z^2)). Everything stays rational.
void atanh_bounds(const Rational& z, unsigned terms, Rational& lo, Rational& hi) {
  const Rational zsq = z * z;
  Rational sum(0), power = z;
  for (unsigned t = 0; t < terms; ++t) {
    sum += power / Rational(2 * t + 1);
    power *= zsq;
  }
  lo = sum;
  hi = sum + power / (Rational(2 * terms + 1) * (1 - zsq));
}

struct LnBounds {
  Rational lb, ub;
};

struct LnCtx {
  unsigned terms;
  Rational ln2_lb, ln2_ub;

  explicit LnCtx(unsigned t) : terms(t) {
    Rational lo, hi;
    atanh_bounds(Rational(1, 3), terms, lo, hi);  // ln 2 = 2 atanh(1/3)
    ln2_lb = 2 * lo;
    ln2_ub = 2 * hi;
  }

  LnBounds ln(std::uint64_t v) const {
    if (v < 2) throw std::invalid_argument("certified ln needs v >= 2");
    const unsigned a = std::bit_width(v) - 1;
    const BigInt pw = BigInt(1) << a;
    const Rational z = Rational(BigInt(v) - pw) / Rational(BigInt(v) + pw);
    Rational lo, hi;
    atanh_bounds(z, terms, lo, hi);
    return {Rational(a) * ln2_lb + 2 * lo, Rational(a) * ln2_ub + 2 * hi};
  }
};

// Smallest t such that (t / 2^48)^8 >= (m-1)/m; the result is a rational
// upper bound on the eighth root of the miss ratio, still below one.
std::uint64_t eighth_root_numerator(unsigned m) {
  const BigInt target = BigInt(m - 1) << 384;
  std::uint64_t lo = 1, hi = 1ull << 48;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (pow_int(BigInt(mid), 8) * m >= target)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

struct MajorantCtx {
  LnCtx lnctx;
  Rational lambda_ub;  // upper bound on c * N / ln N
  std::uint64_t rho8_num;

  MajorantCtx(std::uint64_t cutoff, const TailBoundParams& params, unsigned die_faces)
      : lnctx(params.log_series_terms) {
    const LnBounds lnN = lnctx.ln(cutoff);
    lambda_ub = params.pnt_upper_constant * Rational(cutoff) / lnN.lb;
    rho8_num = eighth_root_numerator(die_faces);
    if (Rational(rho8_num, BigInt(1) << 48) >= 1)
      throw std::runtime_error("miss-ratio eighth root not below one");
  }

  // floor(8 * max(0, (j-1)/ln_ub(j-1) - lambda_ub)): a certified lower bound
  // on eight times the prime count between the cutoff and j-1.
  std::uint64_t floor8(std::uint64_t j) const {
    const LnBounds lnj = lnctx.ln(j - 1);
    const Rational g = Rational(j - 1) / lnj.ub - lambda_ub;
    if (g <= 0) return 0;
    const BigInt f = (BigInt(numerator(g)) * 8) / BigInt(denominator(g));
    return f.convert_to<std::uint64_t>();
  }
};

}  // namespace

LandingProfile landing_profile(const ProcessSpec& spec, std::uint64_t n_max) {
  const unsigned m = spec.die_faces;
  const std::uint64_t s = spec.start;
  if (n_max < s) throw std::invalid_argument("horizon below the start state");
  TargetSet target = spec.target.extended(n_max);

  LandingProfile out;
  out.start = s;
  out.horizon = n_max;
  out.lp.assign(n_max + 1, Rational(0));
  out.r.assign(n_max + 1, Rational(0));
  out.lp[s] = 1;
  out.r[s] = 1;
  for (std::uint64_t n = s + 1; n <= n_max; ++n) {
    Rational sum(0);
    for (unsigned i = 1; i <= m && i <= n; ++i) sum += out.r[n - i];
    out.lp[n] = sum / m;
    out.r[n] = target.contains(n) ? Rational(0) : out.lp[n];
  }
  return out;
}

Rational lp_upper_bound(const ProcessSpec& spec, std::uint64_t s, std::uint64_t n) {
  std::uint64_t count = 0;
  if (n >= 1 && n - 1 > s) {
    TargetSet t = spec.target.extended(n - 1);
    count = t.count_between(static_cast<std::int64_t>(s), static_cast<std::int64_t>(n - 1));
  }
  return pow_ratio(BigInt(spec.die_faces - 1), BigInt(spec.die_faces), count);
}

Rational finite_bound_sum(const ProcessSpec& spec, std::uint64_t cutoff, std::uint64_t split,
                          unsigned order) {
  if (split < cutoff) throw std::invalid_argument("split point below the cutoff");
  const unsigned m = spec.die_faces;
  TargetSet t = spec.target.extended(split);
  std::vector<std::uint64_t> el = t.elements_in_range(cutoff, split);
  // The cutoff itself contributes a zero term and is not counted by the
  // exponent, which only sees elements strictly above the cutoff.
  if (!el.empty() && el.front() == cutoff) el.erase(el.begin());
  if (el.empty()) return Rational(0);

  // Horner in (m-1)/m from the last element down keeps the sum integral:
  // result = acc / m^{T-1} with acc = sum_t (p_t - N)^k (m-1)^{t-1} m^{T-t}.
  BigInt acc = 0, mpow = 1;
  for (std::size_t idx = el.size(); idx-- > 0;) {
    acc = acc * (m - 1) + pow_int(BigInt(el[idx] - cutoff), order) * mpow;
    mpow *= m;
  }
  return Rational(acc) / Rational(mpow / m);
}

Rational tail_majorant_term(std::uint64_t cutoff, std::uint64_t j, unsigned order,
                            const TailBoundParams& params, unsigned die_faces) {
  if (j <= cutoff) throw std::invalid_argument("majorant term needs j above the cutoff");
  if (j - 1 < params.pnt_lower_validity)
    throw std::invalid_argument("majorant term below the prime-bound validity range");
  MajorantCtx ctx(cutoff, params, die_faces);
  const std::uint64_t e8 = ctx.floor8(j);
  return Rational(pow_int(BigInt(j - cutoff), order)) *
         pow_ratio(BigInt(ctx.rho8_num), BigInt(1) << 48, e8);
}

Rational tail_bound(std::uint64_t cutoff, std::uint64_t split, unsigned order,
                    const TailBoundParams& params, unsigned die_faces) {
  const std::uint64_t N = cutoff, X = split;
  const unsigned m = die_faces, k = order;
  if (m < 2) throw std::invalid_argument("need at least 2 faces");
  if (k < 1) throw std::invalid_argument("order must be at least 1");
  if (N < 2) throw std::invalid_argument("cutoff must be at least 2");
  if (X < N) throw std::invalid_argument("split point below the cutoff");
  if (X < params.pnt_lower_validity + 1)
    throw std::invalid_argument("split point too small for the prime-count bounds");
  if (params.truncation_threshold <= 0)
    throw std::invalid_argument("truncation threshold must be positive");

  MajorantCtx ctx(N, params, m);
  const BigInt t8(ctx.rho8_num);
  constexpr unsigned kShift = 48;

  // Truncated integer-sum majorant: every value is acc / 2^{48 e8}, updated
  // by shifts whenever the discretized exponent steps up, so no gcd runs in
  // the hot loop.
  std::uint64_t e8 = 0;
  BigInt cur = 1;  // t8^{e8}
  BigInt acc = 0;
  BigInt th_scaled = BigInt(numerator(params.truncation_threshold));
  const BigInt th_den(denominator(params.truncation_threshold));
  std::uint64_t last_j = 0;

  for (std::uint64_t j = X + 1;; ++j) {
    if (j - X > 10'000'000)
      throw std::runtime_error("tail terms are not contracting; increase the split point");
    const std::uint64_t e = ctx.floor8(j);
    if (e < e8)
      throw std::runtime_error("tail exponent bound decreased at " + std::to_string(j) +
                               "; increase the split point");
    if (e > e8) {
      cur *= pow_int(t8, e - e8);
      acc <<= kShift * (e - e8);
      th_scaled <<= kShift * (e - e8);
      e8 = e;
    }
    const BigInt term = cur * pow_int(BigInt(j - N), k);
    acc += term;
    if (term * th_den < th_scaled) {
      last_j = j;
      break;
    }
  }
  const Rational finite_tail = Rational(acc) / Rational(BigInt(1) << (kShift * e8));

  // Remainder over primes p > last_j, indexed by prime position: the t-th
  // such prime q_t has exactly pi(N, last_j) + t - 1 primes in (N, q_t - 1],
  // and q_t <= 2 n_t ln n_t with n_t = pi(last_j) + t, since pi(x) > x/ln x.
  // With n_t ln n_t <= n_1 ln n_1 (1+t)^2 the remainder is closed by a
  // series whose term ratios provably decrease.
  TargetSet primes = TargetSet::primes(last_j);
  const std::uint64_t r0 = primes.count_between(static_cast<std::int64_t>(N),
                                                static_cast<std::int64_t>(last_j));
  const std::uint64_t pi_j = primes.count_between(0, static_cast<std::int64_t>(last_j));
  const std::uint64_t n1 = pi_j + 1;
  if (n1 < 9) throw std::runtime_error("too few primes below the truncation point");
  const Rational ln_n1_ub = ctx.lnctx.ln(n1).ub;
  const Rational rho(m - 1, m);
  const Rational amp = pow_rational(Rational(2 * n1) * ln_n1_ub, k);

  Rational series(0);
  Rational c = pow_rational(Rational(2), 2 * k);  // (1+t)^{2k} rho^{t-1} at t = 1
  for (std::uint64_t t = 1;; ++t) {
    series += c;
    const Rational ratio = pow_ratio(BigInt(t + 2), BigInt(t + 1), 2 * k) * rho;
    const Rational next = c * ratio;
    if (ratio < 1) {
      series += next / (1 - ratio);
      break;
    }
    c = next;
    if (t > 1'000'000) throw std::runtime_error("remainder series is not contracting");
  }
  const Rational closure = pow_rational(rho, r0) * amp * series;

  return finite_tail + closure;
}

BoundaryCertificate boundary_bound(const ProcessSpec& spec, std::uint64_t cutoff, unsigned order,
                                   const TailBoundParams& params) {
  if (spec.target.kind() != TargetKind::primes)
    throw std::invalid_argument(
        "boundary certificates are derived for prime targets only; supply bounds explicitly");
  if (order < 1) throw std::invalid_argument("order must be at least 1");

  BoundaryCertificate cert;
  cert.finite_part = finite_bound_sum(spec, cutoff, params.split_point, order);
  cert.tail_part = tail_bound(cutoff, params.split_point, order, params, spec.die_faces);
  cert.value = ceil_rational(cert.finite_part + cert.tail_part);
  TargetSet t = spec.target.extended(cutoff + spec.die_faces);
  cert.boundary_block_clear =
      t.count_between(static_cast<std::int64_t>(cutoff),
                      static_cast<std::int64_t>(cutoff + spec.die_faces)) == 0;
  return cert;
}

}  // namespace dicetau
