#include "dicetau/engine.hpp"

#include <future>

namespace dicetau {

namespace {

// Pascal's triangle in machine words; C(64,32) still fits.
std::vector<std::vector<std::uint64_t>> binomial_table(unsigned k) {
  std::vector<std::vector<std::uint64_t>> c(k + 1);
  for (unsigned j = 0; j <= k; ++j) {
    c[j].assign(j + 1, 1);
    for (unsigned i = 1; i < j; ++i) c[j][i] = c[j - 1][i - 1] + c[j - 1][i];
  }
  return c;
}

Rational ratio_of(const BigInt& num, const BigInt& den) {
  return Rational(num) / Rational(den);
}

struct CaptureRange {
  std::uint64_t lo, hi;  // inclusive
};

// One backward pass over s = N+m .. start. Moment rows are scaled by
// Q = lcm of the boundary denominators, so every stored value is an integer
// mantissa over m^e; row 0 holds the (unscaled) survival probability.
// All rows of state s share the exponent e = N+m-s, which makes every
// window read in add_scaled a single-word multiplier.
DPResult dp_run(const ProcessSpec& spec, std::uint64_t cutoff,
                const std::vector<Rational>& boundaries, unsigned k,
                std::optional<CaptureRange> capture) {
  const unsigned m = spec.die_faces;
  const std::uint64_t start = spec.start;
  const std::uint64_t N = cutoff;
  if (N < 1) throw std::invalid_argument("cutoff must be positive");
  if (N < start) throw std::invalid_argument("cutoff too small: below the start state");
  if (k > 64) throw std::invalid_argument("moment order capped at 64");
  TargetSet target = spec.target.extended(N);
  const BigInt mb(m);

  std::vector<Rational> bnd(k, Rational(0));
  for (unsigned j = 0; j < k && j < boundaries.size(); ++j) bnd[j] = boundaries[j];
  for (const Rational& b : bnd)
    if (b < 0) throw std::invalid_argument("boundary values must be nonnegative");

  BigInt Q = 1;
  for (const Rational& b : bnd) Q = lcm(Q, BigInt(denominator(b)));
  std::vector<BigInt> scaled_bnd(k);
  for (unsigned j = 0; j < k; ++j)
    scaled_bnd[j] = BigInt(numerator(bnd[j])) * (Q / BigInt(denominator(bnd[j])));

  const auto binom = binomial_table(k);

  DPResult out;
  if (capture) {
    capture->hi = std::min(capture->hi, N + m);
    const std::size_t span = capture->hi - capture->lo + 1;
    out.capture_lo = capture->lo;
    out.moment_profile.assign(k, std::vector<Rational>(span, Rational(0)));
    out.survival_profile.assign(span, Rational(0));
  }

  // Ring of the last m+1 states, row index 0 = survival, 1..k = moments.
  std::vector<std::vector<BaseMAdic>> ring(m + 1, std::vector<BaseMAdic>(k + 1, BaseMAdic(m)));
  for (std::uint64_t s = N + m; s > N; --s) {
    const std::uint64_t e = N + m - s;
    const BigInt scale = pow_int(mb, e);
    auto& row = ring[s % (m + 1)];
    row[0] = BaseMAdic(scale, e, m);
    for (unsigned j = 1; j <= k; ++j) row[j] = BaseMAdic(scaled_bnd[j - 1] * scale, e, m);
    if (capture && s >= capture->lo && s <= capture->hi) {
      const std::size_t idx = s - capture->lo;
      out.survival_profile[idx] = Rational(1);
      for (unsigned j = 1; j <= k; ++j) out.moment_profile[j - 1][idx] = bnd[j - 1];
    }
  }

  BigInt sp_den = pow_int(mb, m);  // m^e at the current state
  BigInt unit = Q * sp_den;        // Q * m^e: the scaled constant term
  for (std::uint64_t s = N;; --s) {
    const std::uint64_t e = N + m - s;
    auto& row = ring[s % (m + 1)];
    if (target.contains(s)) {
      for (unsigned j = 0; j <= k; ++j) row[j] = BaseMAdic(BigInt(0), e, m);
    } else {
      // Accumulate at exponent e-1 (window state s+i sits at e-i, so the
      // alignment factor is m^{i-1}); one final exponent bump divides by m.
      BaseMAdic acc0(BigInt(0), e - 1, m);
      for (unsigned i = 1; i <= m; ++i) acc0.add_scaled(ring[(s + i) % (m + 1)][0], 1);
      acc0.divide_by_base();
      row[0] = std::move(acc0);
      for (unsigned j = 1; j <= k; ++j) {
        BaseMAdic acc(unit, e - 1, m);
        for (unsigned i = 1; i <= m; ++i) {
          const auto& prev = ring[(s + i) % (m + 1)];
          for (unsigned jp = 1; jp <= j; ++jp) acc.add_scaled(prev[jp], binom[j][jp]);
        }
        acc.divide_by_base();
        row[j] = std::move(acc);
      }
    }
    if (capture && s >= capture->lo && s <= capture->hi) {
      const std::size_t idx = s - capture->lo;
      out.survival_profile[idx] = ratio_of(row[0].mantissa(), sp_den);
      for (unsigned j = 1; j <= k; ++j)
        out.moment_profile[j - 1][idx] = ratio_of(row[j].mantissa(), unit);
    }
    if (s == start) break;
    sp_den *= m;
    unit *= m;
  }

  const auto& last = ring[start % (m + 1)];
  out.survival_at_start = ratio_of(last[0].mantissa(), sp_den);
  out.values_at_start.reserve(k);
  for (unsigned j = 1; j <= k; ++j)
    out.values_at_start.push_back(ratio_of(last[j].mantissa(), unit));
  return out;
}

}  // namespace

DPResult truncated_moments(const ProcessSpec& spec, const CutoffConfig& cfg) {
  if (cfg.max_order < 1) throw std::invalid_argument("max_order must be at least 1");
  std::optional<CaptureRange> capture;
  if (cfg.keep_full_table)
    capture = CaptureRange{spec.start, cfg.cutoff + spec.die_faces};
  return dp_run(spec, cfg.cutoff, cfg.boundary_per_order, cfg.max_order, capture);
}

Rational survival_probability(const ProcessSpec& spec, std::uint64_t cutoff) {
  if (spec.start > cutoff) return Rational(1);  // already past the cutoff
  return dp_run(spec, cutoff, {}, 0, std::nullopt).survival_at_start;
}

Rational structure_compose(const Rational& e0, const Rational& sp, const Rational& B) {
  if (sp < 0 || sp > 1) throw std::invalid_argument("survival probability outside [0,1]");
  return e0 + B * sp;
}

MomentReport enclose_moments(const ProcessSpec& spec, std::uint64_t cutoff,
                             const std::vector<std::pair<Rational, Rational>>& bounds,
                             const std::optional<Rational>& width_budget) {
  const unsigned k = static_cast<unsigned>(bounds.size());
  if (k < 1) throw std::invalid_argument("need bounds for at least order 1");
  for (const auto& [lo, up] : bounds) {
    if (lo < 0) throw std::invalid_argument("lower bounds must be nonnegative");
    if (!(lo < up)) throw std::invalid_argument("invalid bounds: require L < U per order");
  }

  std::vector<Rational> lower_vals, upper_vals;
  Rational sp;
  if (k == 1) {
    // One pass with boundary 0, then superpose: E_{N,B} = E_{N,0} + B*SP.
    CutoffConfig cfg{cutoff, {Rational(0)}, 1, false};
    DPResult base = truncated_moments(spec, cfg);
    sp = base.survival_at_start;
    lower_vals = {structure_compose(base.values_at_start[0], sp, bounds[0].first)};
    upper_vals = {structure_compose(base.values_at_start[0], sp, bounds[0].second)};
  } else {
    std::vector<Rational> lows, ups;
    for (const auto& [lo, up] : bounds) {
      lows.push_back(lo);
      ups.push_back(up);
    }
    CutoffConfig lcfg{cutoff, lows, k, false};
    CutoffConfig ucfg{cutoff, ups, k, false};
    auto lower_fut = std::async(std::launch::async,
                                [&] { return truncated_moments(spec, lcfg); });
    DPResult upper = truncated_moments(spec, ucfg);
    DPResult lower = lower_fut.get();
    sp = lower.survival_at_start;
    lower_vals = std::move(lower.values_at_start);
    upper_vals = std::move(upper.values_at_start);
  }

  MomentReport rep{k,
                   Enclosure(lower_vals[0], upper_vals[0]),
                   {},
                   {},
                   bounds,
                   sp,
                   false};
  for (unsigned j = 0; j < k; ++j) rep.raw.emplace_back(lower_vals[j], upper_vals[j]);

  // Central moments from the collapsed polynomial
  //   E[(tau-mu)^r] = sum_{t=0}^{r-2} C(r,t)(-1)^t mu^t E[tau^{r-t}]
  //                   + (-1)^{r-1}(r-1) mu^r,
  // each monomial bounded by choosing interval endpoints per its sign.
  const auto binom = binomial_table(k);
  const Rational &L1 = lower_vals[0], &U1 = upper_vals[0];
  for (unsigned r = 2; r <= k; ++r) {
    Rational lo(0), hi(0);
    for (unsigned t = 0; t + 2 <= r; ++t) {
      const Rational c(binom[r][t]);
      if (t % 2 == 0) {
        lo += c * pow_rational(L1, t) * lower_vals[r - t - 1];
        hi += c * pow_rational(U1, t) * upper_vals[r - t - 1];
      } else {
        lo -= c * pow_rational(U1, t) * upper_vals[r - t - 1];
        hi -= c * pow_rational(L1, t) * lower_vals[r - t - 1];
      }
    }
    const Rational c(r - 1);
    if (r % 2 == 1) {
      lo += c * pow_rational(L1, r);
      hi += c * pow_rational(U1, r);
    } else {
      lo -= c * pow_rational(U1, r);
      hi -= c * pow_rational(L1, r);
    }
    if (r == 2 && lo < 0) lo = 0;  // a variance is nonnegative
    rep.central.emplace_back(std::move(lo), std::move(hi));
  }

  if (width_budget)
    rep.width_warning = sp * (bounds[0].second - bounds[0].first) > *width_budget;
  return rep;
}

std::vector<std::pair<std::uint64_t, Rational>> expectation_profile(
    const ProcessSpec& spec, std::uint64_t cutoff, const Rational& boundary,
    std::uint64_t s_lo, std::uint64_t s_hi) {
  const unsigned m = spec.die_faces;
  if (s_lo > s_hi) throw std::invalid_argument("profile range is empty");
  if (s_hi > cutoff + m) throw std::invalid_argument("profile range exceeds cutoff + faces");

  std::vector<std::pair<std::uint64_t, Rational>> out;
  out.reserve(s_hi - s_lo + 1);
  if (s_lo > cutoff) {
    for (std::uint64_t s = s_lo; s <= s_hi; ++s) out.emplace_back(s, boundary);
    return out;
  }
  ProcessSpec from_lo(spec.die_faces, spec.target, s_lo);
  DPResult res = dp_run(from_lo, cutoff, {boundary}, 1, CaptureRange{s_lo, s_hi});
  for (std::uint64_t s = s_lo; s <= s_hi; ++s)
    out.emplace_back(s, res.moment_profile[0][s - s_lo]);
  return out;
}

FloatMomentResult truncated_moments_float(const ProcessSpec& spec, const CutoffConfig& cfg,
                                          unsigned precision_digits) {
  using Float = boost::multiprecision::mpf_float;
  if (precision_digits < 10) precision_digits = 10;
  Float::default_precision(precision_digits);

  const unsigned m = spec.die_faces;
  const unsigned k = cfg.max_order;
  const std::uint64_t N = cfg.cutoff;
  if (k < 1) throw std::invalid_argument("max_order must be at least 1");
  if (N < spec.start) throw std::invalid_argument("cutoff too small: below the start state");
  TargetSet target = spec.target.extended(N);

  std::vector<Float> bnd(k, Float(0));
  for (unsigned j = 0; j < k && j < cfg.boundary_per_order.size(); ++j) {
    const Rational& b = cfg.boundary_per_order[j];
    bnd[j] = Float(BigInt(numerator(b))) / Float(BigInt(denominator(b)));
  }
  const auto binom = binomial_table(k);
  const Float inv_m = Float(1) / m;

  std::vector<std::vector<Float>> ring(m + 1, std::vector<Float>(k + 1));
  for (std::uint64_t s = N + m; s > N; --s) {
    auto& row = ring[s % (m + 1)];
    row[0] = 1;
    for (unsigned j = 1; j <= k; ++j) row[j] = bnd[j - 1];
  }
  for (std::uint64_t s = N;; --s) {
    auto& row = ring[s % (m + 1)];
    if (target.contains(s)) {
      for (unsigned j = 0; j <= k; ++j) row[j] = 0;
    } else {
      Float acc0 = 0;
      for (unsigned i = 1; i <= m; ++i) acc0 += ring[(s + i) % (m + 1)][0];
      row[0] = acc0 * inv_m;
      for (unsigned j = 1; j <= k; ++j) {
        Float acc = 0;
        for (unsigned i = 1; i <= m; ++i) {
          const auto& prev = ring[(s + i) % (m + 1)];
          for (unsigned jp = 1; jp <= j; ++jp) acc += Float(binom[j][jp]) * prev[jp];
        }
        row[j] = 1 + acc * inv_m;
      }
    }
    if (s == spec.start) break;
  }

  const auto& last = ring[spec.start % (m + 1)];
  FloatMomentResult out;
  out.precision_digits = precision_digits;
  out.survival = last[0].str(precision_digits);
  for (unsigned j = 1; j <= k; ++j) out.moments.push_back(last[j].str(precision_digits));
  return out;
}

}  // namespace dicetau
