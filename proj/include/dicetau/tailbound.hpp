#pragma once

// Forward landing-probability recursion, the ((m-1)/m)^pi landing bound, and
// certified boundary constants: an exact finite sum over sieved primes plus
// a fully rational tail majorant driven by explicit prime-counting bounds.

#include "dicetau/numerics.hpp"
#include "dicetau/targets.hpp"

#include <vector>

namespace dicetau {

struct LandingProfile {
  std::uint64_t start = 0;
  std::uint64_t horizon = 0;
  std::vector<Rational> lp;  // lp[n] for 0 <= n <= horizon; zero below start
  std::vector<Rational> r;   // auxiliary: zero at targets above start
};

// Exact LP_s(n) and r_s(n) for all n <= n_max by forward recursion.
LandingProfile landing_profile(const ProcessSpec& spec, std::uint64_t n_max);

// ((m-1)/m)^{count_between(s, n-1)}, exact.
Rational lp_upper_bound(const ProcessSpec& spec, std::uint64_t s, std::uint64_t n);

// Sum over target elements p with cutoff <= p <= split of
// (p - cutoff)^order * ((m-1)/m)^{count_between(cutoff, p-1)}, exact.
Rational finite_bound_sum(const ProcessSpec& spec, std::uint64_t cutoff, std::uint64_t split,
                          unsigned order);

struct TailBoundParams {
  std::uint64_t split_point = 100003;
  Rational pnt_upper_constant = Rational(125506, 100000);  // pi(x) < c x/ln x for x > 1
  std::uint64_t pnt_lower_validity = 17;                   // pi(x) > x/ln x for x >= 17
  Rational truncation_threshold = Rational(1, pow10(80));
  unsigned log_series_terms = 16;  // atanh series length for certified ln bounds
};

// Certified upper bound on the prime-target remainder
//   sum over primes p > split of (p - cutoff)^order * ((m-1)/m)^{pi(cutoff, p-1)}.
// The prime sum is majorized by the integer sum with the exponent replaced by
// a certified rational lower bound on (x-1)/ln(x-1) - c*N/ln N, discretized
// on an eighth-integer grid; the summation is truncated once a term drops
// below the threshold and closed by a prime-indexed remainder whose series
// has provably decreasing term ratios.
Rational tail_bound(std::uint64_t cutoff, std::uint64_t split, unsigned order,
                    const TailBoundParams& params = {}, unsigned die_faces = 6);

// Single term of the integer-sum majorant used by tail_bound, exposed so the
// pointwise dominance over the exact prime summand can be checked directly.
Rational tail_majorant_term(std::uint64_t cutoff, std::uint64_t j, unsigned order,
                            const TailBoundParams& params = {}, unsigned die_faces = 6);

struct BoundaryCertificate {
  BigInt value;               // U_k: smallest integer at or above finite + tail
  Rational finite_part;
  Rational tail_part;
  bool boundary_block_clear;  // no target element in (cutoff, cutoff + m]
};

// Certified boundary constant for prime targets; refuses other sets.
BoundaryCertificate boundary_bound(const ProcessSpec& spec, std::uint64_t cutoff, unsigned order,
                                   const TailBoundParams& params = {});

}  // namespace dicetau
