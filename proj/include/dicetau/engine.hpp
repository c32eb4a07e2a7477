#pragma once

// Backward dynamic programming for truncated hitting-time moments and
// survival probabilities, structure-theorem composition, certified raw and
// central moment enclosures, and expectation profiles.

#include "dicetau/numerics.hpp"
#include "dicetau/targets.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace dicetau {

struct CutoffConfig {
  std::uint64_t cutoff = 0;                  // N: states above it take the boundary value
  std::vector<Rational> boundary_per_order;  // B_1..B_k; missing entries default to 0
  unsigned max_order = 1;                    // k
  bool keep_full_table = false;              // capture profiles over s = start..N+m
};

struct DPResult {
  std::vector<Rational> values_at_start;  // orders 1..k at s = spec.start
  Rational survival_at_start;
  // Populated when keep_full_table is set: state s lives at index s - capture_lo.
  std::uint64_t capture_lo = 0;
  std::vector<std::vector<Rational>> moment_profile;  // [order-1][s - capture_lo]
  std::vector<Rational> survival_profile;
};

// Single backward pass from s = N+m down to spec.start computing the coupled
// values of all orders 1..k and the survival probability. Boundary order j
// uses B_j above the cutoff; targets at or below the cutoff give 0.
DPResult truncated_moments(const ProcessSpec& spec, const CutoffConfig& cfg);

// Survival probability at spec.start for the given cutoff, exact.
Rational survival_probability(const ProcessSpec& spec, std::uint64_t cutoff);

// First-order superposition: e0 + B * sp.
Rational structure_compose(const Rational& e0, const Rational& sp, const Rational& B);

struct MomentReport {
  unsigned max_order = 1;
  Enclosure mean;                                      // order 1
  std::vector<Enclosure> raw;                          // orders 1..k
  std::vector<Enclosure> central;                      // orders 2..k; [0] is the variance
  std::vector<std::pair<Rational, Rational>> bounds;   // (L_j, U_j) as used
  Rational survival;                                   // SP_N(start)
  bool width_warning = false;                          // survival*(U_1-L_1) exceeded the budget
};

// Runs the lower- and upper-boundary passes (one pass plus superposition when
// only order 1 is requested) and evaluates central moments by sign-aware
// interval arithmetic on the collapsed polynomial in mu = E[tau].
MomentReport enclose_moments(const ProcessSpec& spec, std::uint64_t cutoff,
                             const std::vector<std::pair<Rational, Rational>>& bounds,
                             const std::optional<Rational>& width_budget = std::nullopt);

// E_{N,B}[tau_s] for s in [s_lo, s_hi], s_hi <= N+m.
std::vector<std::pair<std::uint64_t, Rational>> expectation_profile(
    const ProcessSpec& spec, std::uint64_t cutoff, const Rational& boundary,
    std::uint64_t s_lo, std::uint64_t s_hi);

// Floating-point estimate of the same backward pass. Fast, but carries no
// rounding-error analysis: results are not certified.
struct FloatMomentResult {
  unsigned precision_digits;
  std::vector<std::string> moments;  // orders 1..k
  std::string survival;
  bool certified = false;
};

FloatMomentResult truncated_moments_float(const ProcessSpec& spec, const CutoffConfig& cfg,
                                          unsigned precision_digits);

}  // namespace dicetau
