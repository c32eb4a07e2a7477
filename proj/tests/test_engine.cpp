#include "dicetau/engine.hpp"

#include <doctest.h>

#include <map>
#include <random>
#include <vector>

using namespace dicetau;

namespace {

CutoffConfig cfg_of(std::uint64_t N, std::vector<Rational> bounds, unsigned k,
                    bool full = false) {
  CutoffConfig cfg;
  cfg.cutoff = N;
  cfg.boundary_per_order = std::move(bounds);
  cfg.max_order = k;
  cfg.keep_full_table = full;
  return cfg;
}

// Plain-rational windowed DP written directly from the explicit low-order
// recursions: E1 = 1 + (1/m) sum E1, E2 = 1 + (1/m) sum (E2 + 2 E1),
// E3 = 1 + (1/m) sum (E3 + 3 E2 + 3 E1), E4 = 1 + (1/m) sum (E4 + 4 E3 +
// 6 E2 + 4 E1). Used to pin the general binomial path to these forms.
std::vector<Rational> explicit_low_order_dp(const ProcessSpec& spec, std::uint64_t N,
                                            const std::vector<Rational>& B, unsigned k) {
  const unsigned m = spec.die_faces;
  TargetSet target = spec.target.extended(N + m);
  std::map<std::uint64_t, std::vector<Rational>> table;
  for (std::uint64_t s = N + m; s + 1 > spec.start; --s) {
    std::vector<Rational> row(k);
    if (s > N) {
      for (unsigned j = 0; j < k; ++j) row[j] = j < B.size() ? B[j] : Rational(0);
    } else if (target.contains(s)) {
      // all zeros
    } else {
      static const int coef[4][4] = {{1, 0, 0, 0}, {2, 1, 0, 0}, {3, 3, 1, 0}, {4, 6, 4, 1}};
      for (unsigned j = 1; j <= k; ++j) {
        Rational acc(0);
        for (unsigned i = 1; i <= m; ++i) {
          const std::vector<Rational>& next = table.at(s + i);
          for (unsigned t = 1; t <= j; ++t) acc += Rational(coef[j - 1][t - 1]) * next[t - 1];
        }
        row[j - 1] = 1 + acc / m;
      }
    }
    table[s] = std::move(row);
    if (s == 0) break;
  }
  return table.at(spec.start);
}

}  // namespace

TEST_CASE("small prime cutoff has the known exact values") {
  const ProcessSpec spec(6, TargetSet::primes(20), 0);
  const DPResult r = truncated_moments(spec, cfg_of(4, {Rational(0)}, 1));
  CHECK(r.values_at_start[0] == Rational(49, 36));
  CHECK(r.survival_at_start == Rational(11, 18));
  CHECK(survival_probability(spec, 4) == Rational(11, 18));
}

TEST_CASE("absorbing start gives all-zero moments") {
  const ProcessSpec spec(6, TargetSet::primes(40), 2);
  const DPResult r = truncated_moments(spec, cfg_of(20, {Rational(0), Rational(0)}, 2));
  CHECK(r.values_at_start[0] == 0);
  CHECK(r.values_at_start[1] == 0);
  CHECK(r.survival_at_start == 0);
}

TEST_CASE("start above the cutoff is rejected") {
  const ProcessSpec spec(6, TargetSet::primes(40), 30);
  CHECK_THROWS_AS(truncated_moments(spec, cfg_of(20, {Rational(0)}, 1)),
                  std::invalid_argument);
}

TEST_CASE("survival at a start beyond the cutoff is one") {
  const ProcessSpec spec(6, TargetSet::primes(40), 25);
  CHECK(survival_probability(spec, 20) == 1);
}

TEST_CASE("structure theorem composes boundary values exactly") {
  const ProcessSpec spec(6, TargetSet::primes(20), 0);
  const DPResult with_b = truncated_moments(spec, cfg_of(4, {Rational(6)}, 1));
  CHECK(structure_compose(Rational(49, 36), Rational(11, 18), Rational(6)) == Rational(181, 36));
  CHECK(with_b.values_at_start[0] == Rational(181, 36));
  CHECK(structure_compose(Rational(49, 36), Rational(11, 18), Rational(0)) == Rational(49, 36));
  CHECK(structure_compose(Rational(5), Rational(0), Rational(99)) == Rational(5));
  CHECK_THROWS_AS(structure_compose(Rational(1), Rational(2), Rational(1)),
                  std::invalid_argument);
}

TEST_CASE("structure theorem holds for random cutoffs, boundaries and starts") {
  std::mt19937_64 rng(515151);
  const TargetSet primes = TargetSet::primes(300);
  for (int iter = 0; iter < 50; ++iter) {
    const std::uint64_t N = 2 + rng() % 199;
    const std::uint64_t start = rng() % (N / 2 + 1);
    const Rational B(1 + rng() % 40, 1 + rng() % 9);
    const ProcessSpec spec(6, primes, start);
    const DPResult base = truncated_moments(spec, cfg_of(N, {Rational(0)}, 1));
    const DPResult shifted = truncated_moments(spec, cfg_of(N, {B}, 1));
    CHECK(shifted.values_at_start[0] ==
          structure_compose(base.values_at_start[0], base.survival_at_start, B));
  }
}

TEST_CASE("structure theorem holds pointwise over the full table") {
  const ProcessSpec spec(6, TargetSet::primes(80), 0);
  const Rational B(7, 3);
  const DPResult base = truncated_moments(spec, cfg_of(60, {Rational(0)}, 1, true));
  const DPResult shifted = truncated_moments(spec, cfg_of(60, {B}, 1, true));
  REQUIRE(base.moment_profile.size() == 1);
  REQUIRE(base.moment_profile[0].size() == shifted.moment_profile[0].size());
  for (std::size_t i = 0; i < base.moment_profile[0].size(); ++i) {
    CHECK(shifted.moment_profile[0][i] ==
          base.moment_profile[0][i] + B * base.survival_profile[i]);
  }
}

TEST_CASE("general binomial recursion equals the explicit low-order forms") {
  std::mt19937_64 rng(77);
  const TargetSet primes = TargetSet::primes(200);
  for (int iter = 0; iter < 10; ++iter) {
    const std::uint64_t N = 5 + rng() % 96;
    const unsigned m = 2 + rng() % 5;
    std::vector<Rational> B;
    for (int j = 0; j < 4; ++j) B.emplace_back(rng() % 20, 1 + rng() % 6);
    const ProcessSpec spec(m, primes, 0);
    const DPResult got = truncated_moments(spec, cfg_of(N, B, 4));
    const std::vector<Rational> want = explicit_low_order_dp(spec, N, B, 4);
    for (unsigned j = 0; j < 4; ++j) CHECK(got.values_at_start[j] == want[j]);
  }
}

TEST_CASE("monotonicity in the cutoff") {
  const TargetSet primes = TargetSet::primes(300);
  const ProcessSpec spec(6, primes, 0);
  Rational prev_e(-1), prev_sp(2);
  for (std::uint64_t N = 10; N <= 200; ++N) {
    const DPResult r = truncated_moments(spec, cfg_of(N, {Rational(0)}, 1));
    CHECK(r.values_at_start[0] >= prev_e);
    CHECK(r.survival_at_start <= prev_sp);
    prev_e = r.values_at_start[0];
    prev_sp = r.survival_at_start;
  }
}

TEST_CASE("strict ordering of boundary passes when survival is positive") {
  const ProcessSpec spec(6, TargetSet::primes(60), 0);
  const std::vector<std::pair<Rational, Rational>> bounds = {
      {Rational(0), Rational(5)}, {Rational(0), Rational(50)}};
  const MomentReport rep = enclose_moments(spec, 30, bounds);
  CHECK(rep.survival > 0);
  for (const Enclosure& e : rep.raw) CHECK(e.lower < e.upper);
}

TEST_CASE("enclose_moments rejects invalid bounds") {
  const ProcessSpec spec(6, TargetSet::primes(60), 0);
  CHECK_THROWS_AS(enclose_moments(spec, 30, {{Rational(2), Rational(2)}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(enclose_moments(spec, 30, {{Rational(-1), Rational(2)}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(enclose_moments(spec, 30, {}), std::invalid_argument);
}

TEST_CASE("absorbing-complete sets give zero-width enclosures") {
  const TargetSet block = TargetSet::explicit_set({7, 8, 9, 10, 11, 12});
  const ProcessSpec spec(6, block, 0);
  const std::vector<std::pair<Rational, Rational>> bounds = {
      {Rational(0), Rational(5)},
      {Rational(0), Rational(60)},
      {Rational(0), Rational(700)},
      {Rational(0), Rational(8000)}};
  const MomentReport rep = enclose_moments(spec, 20, bounds);
  CHECK(rep.survival == 0);
  for (const Enclosure& e : rep.raw) CHECK(e.zero_width());
  for (const Enclosure& e : rep.central) CHECK(e.zero_width());
  // Jensen on the certified interval: E[tau^2] >= E[tau]^2.
  CHECK(rep.raw[1].lower >= rep.mean.lower * rep.mean.lower);
  // Variance enclosure stays nonnegative.
  CHECK(rep.central[0].lower >= 0);
}

TEST_CASE("empty target set survives with probability one") {
  const TargetSet empty = TargetSet::explicit_set({});
  const ProcessSpec spec(2, empty, 0);
  const DPResult r = truncated_moments(spec, cfg_of(2, {Rational(0)}, 1));
  CHECK(r.survival_at_start == 1);
  // First-passage time beyond N=2 with a 2-sided die, boundary 0.
  CHECK(r.values_at_start[0] == Rational(9, 4));
}

TEST_CASE("width warning fires when survival is large") {
  const ProcessSpec spec(6, TargetSet::fibonacci(200), 0);
  const std::vector<std::pair<Rational, Rational>> bounds = {{Rational(0), Rational(10)}};
  const MomentReport quiet = enclose_moments(spec, 100, bounds);
  CHECK(!quiet.width_warning);
  const MomentReport warned =
      enclose_moments(spec, 100, bounds, Rational(1, 1000000));
  CHECK(warned.width_warning);
  CHECK(warned.survival * Rational(10) > Rational(1, 1000000));
}

TEST_CASE("central moment enclosures contain the exact values on small cases") {
  // Absorbing block: exact tau distribution is computable, so central
  // moments from two antithetic passes must enclose the true values (here
  // zero-width, so exact equality of both endpoints).
  const TargetSet block = TargetSet::explicit_set({4, 5, 6});
  const ProcessSpec spec(3, block, 0);
  const std::vector<std::pair<Rational, Rational>> bounds = {
      {Rational(0), Rational(9)}, {Rational(0), Rational(99)}, {Rational(0), Rational(999)},
      {Rational(0), Rational(9999)}};
  const MomentReport rep = enclose_moments(spec, 10, bounds);
  const Rational mu = rep.mean.lower;
  const Rational m2 = rep.raw[1].lower, m3 = rep.raw[2].lower, m4 = rep.raw[3].lower;
  CHECK(rep.central[0].lower == m2 - mu * mu);
  CHECK(rep.central[1].lower == m3 - 3 * mu * m2 + 2 * mu * mu * mu);
  CHECK(rep.central[2].lower == m4 - 4 * mu * m3 + 6 * mu * mu * m2 - 3 * mu * mu * mu * mu);
}

TEST_CASE("expectation_profile") {
  const ProcessSpec spec(6, TargetSet::primes(400), 0);
  SUBCASE("states above the cutoff carry the boundary value") {
    const auto prof = expectation_profile(spec, 300, Rational(5), 298, 306);
    for (const auto& [s, v] : prof) {
      if (s > 300) CHECK(v == 5);
    }
    CHECK(prof.size() == 9);
    CHECK(prof.front().first == 298);
    CHECK(prof.back().first == 306);
  }
  SUBCASE("prime states are zero") {
    const auto prof = expectation_profile(spec, 300, Rational(0), 280, 300);
    for (const auto& [s, v] : prof) {
      if (s == 281 || s == 283 || s == 293) CHECK(v == 0);
    }
  }
  SUBCASE("larger boundary dominates pointwise") {
    const auto low = expectation_profile(spec, 300, Rational(0), 250, 306);
    const auto high = expectation_profile(spec, 300, Rational(20), 250, 306);
    REQUIRE(low.size() == high.size());
    for (std::size_t i = 0; i < low.size(); ++i) CHECK(high[i].second >= low[i].second);
  }
  SUBCASE("full-table DP matches the profile") {
    const DPResult full = truncated_moments(spec, cfg_of(100, {Rational(0)}, 1, true));
    const auto prof = expectation_profile(spec, 100, Rational(0), 0, 106);
    for (const auto& [s, v] : prof)
      CHECK(v == full.moment_profile[0][s - full.capture_lo]);
  }
  SUBCASE("empty range is rejected") {
    CHECK_THROWS_AS(expectation_profile(spec, 300, Rational(0), 10, 5),
                    std::invalid_argument);
  }
}

TEST_CASE("expectation decreases between consecutive primes on a wide window") {
  // Between two primes p1 < p2, the states p1+1 .. p2-m step closer to the
  // next absorption opportunity, so the expectation decreases.
  const ProcessSpec spec(6, TargetSet::primes(1200), 0);
  const auto prof = expectation_profile(spec, 1000, Rational(0), 700, 760);
  const TargetSet primes = TargetSet::primes(1200);
  for (std::size_t i = 1; i < prof.size(); ++i) {
    const std::uint64_t s = prof[i].first;
    bool inside_gap = !primes.contains(s) && s >= 701;
    for (std::uint64_t ahead = 1; ahead <= 6; ++ahead)
      if (primes.contains(s + ahead)) inside_gap = false;
    if (inside_gap && !primes.contains(s - 1))
      CHECK(prof[i].second < prof[i - 1].second);
  }
}

TEST_CASE("float mode tracks the exact values without certification") {
  const ProcessSpec spec(6, TargetSet::primes(1100), 0);
  CutoffConfig cfg = cfg_of(1000, {Rational(0), Rational(0)}, 2);
  const DPResult exact = truncated_moments(spec, cfg);
  const FloatMomentResult fl = truncated_moments_float(spec, cfg, 50);
  CHECK(!fl.certified);
  CHECK(fl.precision_digits == 50);
  REQUIRE(fl.moments.size() == 2);
  for (unsigned j = 0; j < 2; ++j) {
    const std::string want = to_decimal(exact.values_at_start[j], 20);
    // Same leading 15 characters: float mode is an estimate, not certified.
    CHECK(fl.moments[j].substr(0, 15) == want.substr(0, 15));
  }
}
