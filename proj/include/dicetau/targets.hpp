#pragma once

// Target-set oracle: membership, range counting, element iteration, and
// ingestion of user-supplied sets. Primes are answered by a bit-packed
// sieve with a per-word cumulative count table, so range counts are O(1).

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dicetau {

// Raised when a membership or count query exceeds the guaranteed limit.
struct QueryBeyondLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by load_explicit on malformed input; message carries the line number.
struct SetParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TargetKind { primes, squares, fibonacci, explicit_set };

class TargetSet {
 public:
  static TargetSet primes(std::uint64_t limit);
  static TargetSet squares(std::uint64_t limit);
  static TargetSet fibonacci(std::uint64_t limit);
  static TargetSet explicit_set(std::vector<std::uint64_t> elements);

  // One base-10 integer per line, '#' starts a comment, values strictly
  // ascending. An empty file yields the empty set.
  static TargetSet load_explicit(const std::string& path);

  // CLI selector: "primes" | "squares" | "fibonacci" | "file:<path>".
  static TargetSet from_selector(std::string_view selector, std::uint64_t limit);

  TargetKind kind() const;
  std::string name() const;

  // Largest n for which queries are guaranteed answerable. Explicit sets
  // are fully known, so their limit is unbounded.
  std::uint64_t sieve_limit() const;

  bool contains(std::uint64_t n) const;

  // Number of elements e with s < e <= n; zero whenever n <= s.
  std::uint64_t count_between(std::int64_t s, std::int64_t n) const;

  // All elements e with lo <= e <= hi, ascending.
  std::vector<std::uint64_t> elements_in_range(std::uint64_t lo, std::uint64_t hi) const;

  // Value with sieve_limit >= new_limit; cheap no-op when already large
  // enough. TargetSet is immutable, growth produces a new value.
  TargetSet extended(std::uint64_t new_limit) const;

  struct Data;

 private:
  explicit TargetSet(std::shared_ptr<const Data> data);
  std::shared_ptr<const Data> data_;
};

struct ProcessSpec {
  unsigned die_faces;  // m, fair die with faces 1..m
  TargetSet target;
  std::uint64_t start = 0;

  ProcessSpec(unsigned m, TargetSet t, std::uint64_t s = 0);
};

struct FibonacciRatio {
  double value;    // ((m-1)/(m+1)) * golden ratio
  bool divergent;  // value > 1: conjecturally infinite expectation
};

FibonacciRatio fibonacci_ratio(unsigned die_faces);

}  // namespace dicetau
