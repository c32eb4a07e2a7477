#include "dicetau/oracle.hpp"

#include <algorithm>
#include <thread>

namespace dicetau {

namespace {

std::vector<std::vector<std::uint64_t>> binomial_table(unsigned k) {
  std::vector<std::vector<std::uint64_t>> c(k + 1);
  for (unsigned j = 0; j <= k; ++j) {
    c[j].assign(j + 1, 1);
    for (unsigned i = 1; i < j; ++i) c[j][i] = c[j - 1][i - 1] + c[j - 1][i];
  }
  return c;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// splitmix64 stream; the counter start is an avalanche of (seed, trial).
struct SplitMix {
  std::uint64_t state;
  SplitMix(std::uint64_t seed, std::uint64_t trial)
      : state(mix64(seed + 0x9E3779B97F4A7C15ull * (trial + 1))) {}
  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    return mix64(state);
  }
};

}  // namespace

ExactSolution exact_small_solver(const ProcessSpec& spec, std::uint64_t horizon,
                                 unsigned max_order) {
  const unsigned m = spec.die_faces;
  if (max_order < 1) throw std::invalid_argument("max_order must be at least 1");
  if (horizon < spec.start + m) throw std::invalid_argument("horizon too small");
  TargetSet target = spec.target.extended(horizon);

  std::uint64_t block = 0;
  bool found = false;
  for (std::uint64_t a = spec.start; a + m - 1 <= horizon; ++a) {
    unsigned run = 0;
    while (run < m && target.contains(a + run)) ++run;
    if (run == m) {
      block = a;
      found = true;
      break;
    }
  }
  if (!found)
    throw std::runtime_error("no absorbing block: the set holds no " + std::to_string(m) +
                             " consecutive targets within the horizon");

  const auto binom = binomial_table(max_order);
  const std::uint64_t hi = block + m - 1;
  ExactSolution sol;
  sol.block_start = block;
  sol.base_state = spec.start;
  sol.moments.assign(hi - spec.start + 1, std::vector<Rational>(max_order, Rational(0)));

  for (std::uint64_t s = hi + 1; s-- > spec.start;) {
    if (target.contains(s)) continue;  // zero moments
    auto& row = sol.moments[s - spec.start];
    for (unsigned j = 1; j <= max_order; ++j) {
      Rational acc(0);
      for (unsigned i = 1; i <= m; ++i) {
        const auto& prev = sol.moments[s + i - spec.start];
        for (unsigned jp = 1; jp <= j; ++jp) acc += Rational(binom[j][jp]) * prev[jp - 1];
      }
      row[j - 1] = 1 + acc / m;
    }
  }
  return sol;
}

std::vector<Rational> enumerate_paths_table(const ProcessSpec& spec, std::uint64_t n_max) {
  const unsigned m = spec.die_faces;
  const std::uint64_t start = spec.start;
  if (n_max < start) throw std::invalid_argument("horizon below the start state");
  if (n_max - start > 25) throw std::invalid_argument("horizon too large for enumeration");
  TargetSet target = spec.target.extended(n_max);

  // counts[n - start][len]: number of compositions of n - start into parts
  // 1..m whose intermediate sums avoid the target set.
  const std::size_t span = n_max - start + 1;
  std::vector<std::vector<std::uint64_t>> counts(span,
                                                 std::vector<std::uint64_t>(span, 0));
  // Iterative DFS over the path tree; every node is an endpoint, and a node
  // spawns children only when its sum is not a target (the start always does).
  std::vector<std::pair<std::uint64_t, unsigned>> stack{{start, 0u}};
  while (!stack.empty()) {
    auto [sum, len] = stack.back();
    stack.pop_back();
    ++counts[sum - start][len];
    if (sum != start && target.contains(sum)) continue;
    for (unsigned i = 1; i <= m; ++i)
      if (sum + i <= n_max) stack.emplace_back(sum + i, len + 1);
  }

  std::vector<Rational> lp(span, Rational(0));
  for (std::size_t d = 0; d < span; ++d) {
    Rational acc(0);
    Rational weight(1);
    for (std::size_t len = 0; len < span; ++len) {
      if (counts[d][len]) acc += Rational(counts[d][len]) * weight;
      weight /= m;
    }
    lp[d] = acc;
  }
  return lp;
}

Rational enumerate_paths(const ProcessSpec& spec, std::uint64_t n) {
  return enumerate_paths_table(spec, n).back();
}

SimStats monte_carlo(const ProcessSpec& spec, std::uint64_t trials, std::uint64_t seed,
                     std::uint64_t max_rolls) {
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  const unsigned m = spec.die_faces;
  TargetSet target = spec.target.extended(spec.start + max_rolls * m + m);
  const std::uint64_t reject_limit = ~0ull - ~0ull % m;

  struct Acc {
    std::uint64_t absorbed = 0;
    unsigned __int128 s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  };
  auto run_range = [&](std::uint64_t lo, std::uint64_t hi, Acc& acc) {
    for (std::uint64_t t = lo; t < hi; ++t) {
      SplitMix rng(seed, t);
      std::uint64_t sum = spec.start;
      std::uint64_t tau = 0;
      bool hit = false;
      for (std::uint64_t roll = 1; roll <= max_rolls; ++roll) {
        std::uint64_t u;
        do {
          u = rng.next();
        } while (u >= reject_limit);
        sum += u % m + 1;
        if (target.contains(sum)) {
          tau = roll;
          hit = true;
          break;
        }
      }
      if (hit) {
        ++acc.absorbed;
        const unsigned __int128 t1 = tau, t2 = t1 * t1;
        acc.s1 += t1;
        acc.s2 += t2;
        acc.s3 += t2 * t1;
        acc.s4 += t2 * t2;
      }
    }
  };

  unsigned workers = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  if (trials < 4096) workers = 1;
  std::vector<Acc> parts(workers);
  std::vector<std::thread> pool;
  const std::uint64_t chunk = trials / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t lo = w * chunk;
    const std::uint64_t hi = w + 1 == workers ? trials : lo + chunk;
    pool.emplace_back(run_range, lo, hi, std::ref(parts[w]));
  }
  for (auto& th : pool) th.join();

  Acc total;
  for (const Acc& p : parts) {
    total.absorbed += p.absorbed;
    total.s1 += p.s1;
    total.s2 += p.s2;
    total.s3 += p.s3;
    total.s4 += p.s4;
  }

  SimStats stats;
  stats.trials = trials;
  stats.seed = seed;
  stats.max_rolls = max_rolls;
  stats.absorbed = total.absorbed;
  stats.hit_fraction = static_cast<double>(total.absorbed) / static_cast<double>(trials);
  if (total.absorbed > 0) {
    const double n = static_cast<double>(total.absorbed);
    stats.mean = static_cast<double>(total.s1) / n;
    stats.raw2 = static_cast<double>(total.s2) / n;
    stats.raw3 = static_cast<double>(total.s3) / n;
    stats.raw4 = static_cast<double>(total.s4) / n;
  }
  return stats;
}

}  // namespace dicetau
