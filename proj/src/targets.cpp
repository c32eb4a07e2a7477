#include "dicetau/targets.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

namespace dicetau {

struct TargetSet::Data {
  TargetKind kind;
  std::uint64_t limit;
  std::vector<std::uint64_t> words;    // primes: bit n of words[n/64]
  std::vector<std::uint64_t> cum;      // primes: count of set bits below word w
  std::vector<std::uint64_t> elements; // squares / fibonacci / explicit
};

namespace {

std::shared_ptr<TargetSet::Data> sieve_primes(std::uint64_t limit) {
  auto d = std::make_shared<TargetSet::Data>();
  d->kind = TargetKind::primes;
  d->limit = limit;
  const std::uint64_t nwords = limit / 64 + 1;
  d->words.assign(nwords, ~0ull);
  auto clear = [&](std::uint64_t n) { d->words[n / 64] &= ~(1ull << (n % 64)); };
  clear(0);
  if (limit >= 1) clear(1);
  // Mask bits above the limit so popcounts stay exact.
  for (std::uint64_t b = limit % 64 + 1; b < 64; ++b)
    d->words[nwords - 1] &= ~(1ull << b);
  for (std::uint64_t p = 2; p * p <= limit; ++p) {
    if (!(d->words[p / 64] >> (p % 64) & 1)) continue;
    for (std::uint64_t q = p * p; q <= limit; q += p) clear(q);
  }
  d->cum.resize(nwords);
  std::uint64_t running = 0;
  for (std::uint64_t w = 0; w < nwords; ++w) {
    d->cum[w] = running;
    running += std::popcount(d->words[w]);
  }
  return d;
}

std::shared_ptr<TargetSet::Data> gen_squares(std::uint64_t limit) {
  auto d = std::make_shared<TargetSet::Data>();
  d->kind = TargetKind::squares;
  d->limit = limit;
  for (std::uint64_t k = 1; k * k <= limit; ++k) d->elements.push_back(k * k);
  return d;
}

std::shared_ptr<TargetSet::Data> gen_fibonacci(std::uint64_t limit) {
  auto d = std::make_shared<TargetSet::Data>();
  d->kind = TargetKind::fibonacci;
  d->limit = limit;
  std::uint64_t a = 1, b = 2;
  while (a <= limit) {
    d->elements.push_back(a);
    std::uint64_t c = a + b;
    a = b;
    b = c;
  }
  return d;
}

// Count of primes <= n in a sieved Data (n <= limit assumed).
std::uint64_t prime_pi(const TargetSet::Data& d, std::uint64_t n) {
  const std::uint64_t w = n / 64, b = n % 64;
  const std::uint64_t mask = b == 63 ? ~0ull : (1ull << (b + 1)) - 1;
  return d.cum[w] + std::popcount(d.words[w] & mask);
}

}  // namespace

TargetSet::TargetSet(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

TargetSet TargetSet::primes(std::uint64_t limit) { return TargetSet(sieve_primes(limit)); }

TargetSet TargetSet::squares(std::uint64_t limit) { return TargetSet(gen_squares(limit)); }

TargetSet TargetSet::fibonacci(std::uint64_t limit) { return TargetSet(gen_fibonacci(limit)); }

TargetSet TargetSet::explicit_set(std::vector<std::uint64_t> elements) {
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (elements[i] == 0)
      throw SetParseError("explicit set: elements must be positive");
    if (i > 0 && elements[i] == elements[i - 1])
      throw SetParseError("explicit set: duplicate element " + std::to_string(elements[i]));
    if (i > 0 && elements[i] < elements[i - 1])
      throw SetParseError("explicit set: elements must be strictly ascending");
  }
  auto d = std::make_shared<Data>();
  d->kind = TargetKind::explicit_set;
  d->limit = ~0ull;  // fully known, every query answerable
  d->elements = std::move(elements);
  return TargetSet(std::move(d));
}

TargetSet TargetSet::load_explicit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SetParseError(path + ": cannot open file");
  std::vector<std::uint64_t> elements;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fail = [&](const std::string& msg) {
      throw SetParseError(path + ":" + std::to_string(lineno) + ": " + msg);
    };
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::size_t e = line.find_last_not_of(" \t\r");
    std::string tok = line.substr(b, e - b + 1);
    std::uint64_t value = 0;
    for (char c : tok) {
      if (c < '0' || c > '9') fail("expected a base-10 integer, got '" + tok + "'");
      if (value > (~0ull - (c - '0')) / 10) fail("value out of range: '" + tok + "'");
      value = value * 10 + (c - '0');
    }
    if (value == 0) fail("elements must be positive");
    if (!elements.empty() && value == elements.back()) fail("duplicate element " + tok);
    if (!elements.empty() && value < elements.back())
      fail("elements must be strictly ascending ('" + tok + "' after " +
           std::to_string(elements.back()) + ")");
    elements.push_back(value);
  }
  auto d = std::make_shared<Data>();
  d->kind = TargetKind::explicit_set;
  d->limit = ~0ull;
  d->elements = std::move(elements);
  return TargetSet(std::move(d));
}

TargetSet TargetSet::from_selector(std::string_view selector, std::uint64_t limit) {
  if (selector == "primes") return primes(limit);
  if (selector == "squares") return squares(limit);
  if (selector == "fibonacci") return fibonacci(limit);
  if (selector.substr(0, 5) == "file:") return load_explicit(std::string(selector.substr(5)));
  throw std::invalid_argument("unknown target selector '" + std::string(selector) +
                              "' (expected primes|squares|fibonacci|file:<path>)");
}

TargetKind TargetSet::kind() const { return data_->kind; }

std::string TargetSet::name() const {
  switch (data_->kind) {
    case TargetKind::primes: return "primes";
    case TargetKind::squares: return "squares";
    case TargetKind::fibonacci: return "fibonacci";
    case TargetKind::explicit_set: return "explicit";
  }
  return "unknown";
}

std::uint64_t TargetSet::sieve_limit() const { return data_->limit; }

bool TargetSet::contains(std::uint64_t n) const {
  if (n > data_->limit)
    throw QueryBeyondLimit("membership query " + std::to_string(n) + " beyond limit " +
                           std::to_string(data_->limit));
  if (data_->kind == TargetKind::primes)
    return data_->words[n / 64] >> (n % 64) & 1;
  return std::binary_search(data_->elements.begin(), data_->elements.end(), n);
}

std::uint64_t TargetSet::count_between(std::int64_t s, std::int64_t n) const {
  if (n <= s || n < 1) return 0;
  const std::uint64_t hi = static_cast<std::uint64_t>(n);
  if (hi > data_->limit)
    throw QueryBeyondLimit("count query " + std::to_string(hi) + " beyond limit " +
                           std::to_string(data_->limit));
  const std::uint64_t lo = s < 0 ? 0 : static_cast<std::uint64_t>(s);
  if (data_->kind == TargetKind::primes)
    return prime_pi(*data_, hi) - prime_pi(*data_, lo);
  const auto& el = data_->elements;
  return std::upper_bound(el.begin(), el.end(), hi) - std::upper_bound(el.begin(), el.end(), lo);
}

std::vector<std::uint64_t> TargetSet::elements_in_range(std::uint64_t lo, std::uint64_t hi) const {
  if (hi > data_->limit)
    throw QueryBeyondLimit("range query " + std::to_string(hi) + " beyond limit " +
                           std::to_string(data_->limit));
  std::vector<std::uint64_t> out;
  if (hi < lo) return out;
  if (data_->kind == TargetKind::primes) {
    for (std::uint64_t n = std::max<std::uint64_t>(lo, 2); n <= hi; ++n)
      if (data_->words[n / 64] >> (n % 64) & 1) out.push_back(n);
    return out;
  }
  const auto& el = data_->elements;
  auto it = std::lower_bound(el.begin(), el.end(), lo);
  for (; it != el.end() && *it <= hi; ++it) out.push_back(*it);
  return out;
}

TargetSet TargetSet::extended(std::uint64_t new_limit) const {
  if (new_limit <= data_->limit) return *this;
  switch (data_->kind) {
    case TargetKind::primes: return primes(new_limit);
    case TargetKind::squares: return squares(new_limit);
    case TargetKind::fibonacci: return fibonacci(new_limit);
    case TargetKind::explicit_set: return *this;
  }
  return *this;
}

ProcessSpec::ProcessSpec(unsigned m, TargetSet t, std::uint64_t s)
    : die_faces(m), target(std::move(t)), start(s) {
  if (m < 2) throw std::invalid_argument("ProcessSpec: die must have at least 2 faces");
}

FibonacciRatio fibonacci_ratio(unsigned die_faces) {
  if (die_faces < 2) throw std::invalid_argument("fibonacci_ratio: need at least 2 faces");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const double value = (die_faces - 1.0) / (die_faces + 1.0) * phi;
  return {value, value > 1.0};
}

}  // namespace dicetau
