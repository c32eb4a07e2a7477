#pragma once

// Independent ground truth: an exact solver for absorbing-complete sets,
// exhaustive path enumeration for landing probabilities, and a reproducible
// Monte Carlo simulation. Deliberately shares no recursion code with the
// engine or the landing-profile implementation.

#include "dicetau/numerics.hpp"
#include "dicetau/targets.hpp"

#include <vector>

namespace dicetau {

struct ExactSolution {
  std::uint64_t block_start;  // first state of the absorbing run of m targets
  std::uint64_t base_state;   // = spec.start; moments[s - base_state] is state s
  std::vector<std::vector<Rational>> moments;  // [s - base_state][order-1]

  const std::vector<Rational>& at(std::uint64_t s) const { return moments.at(s - base_state); }
};

// Exact moments for every state from spec.start up to the absorbing block,
// valid because a run of m consecutive targets cannot be jumped over, so the
// hitting time is bounded and no cutoff error exists. Throws when no such
// block lies within the horizon.
ExactSolution exact_small_solver(const ProcessSpec& spec, std::uint64_t horizon,
                                 unsigned max_order = 4);

// Landing probability by exhaustive enumeration of compositions of
// n - start into parts 1..m whose intermediate partial sums avoid the
// target set. Exponential in n - start; capped at 25.
Rational enumerate_paths(const ProcessSpec& spec, std::uint64_t n);

// Same, for every endpoint start..n_max in one traversal.
std::vector<Rational> enumerate_paths_table(const ProcessSpec& spec, std::uint64_t n_max);

struct SimStats {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::uint64_t max_rolls = 0;
  std::uint64_t absorbed = 0;  // walks that hit the target within max_rolls
  double mean = 0;             // sample raw moments over absorbed walks
  double raw2 = 0;
  double raw3 = 0;
  double raw4 = 0;
  double hit_fraction = 0;     // absorbed / trials

  double variance() const { return raw2 - mean * mean; }
};

// Deterministic given (seed, trial index) regardless of thread count.
SimStats monte_carlo(const ProcessSpec& spec, std::uint64_t trials, std::uint64_t seed,
                     std::uint64_t max_rolls = 10000);

}  // namespace dicetau
