#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace pardpp {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Key of a random stream reached from `seed` through a path of counters
// (sample index, round, proposal, ...). Streams for distinct paths are
// independent for practical purposes and do not depend on evaluation order.
inline std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t key = splitmix64(seed);
  for (std::uint64_t p : path) key = splitmix64(key ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return key;
}

// Counter-based generator: the i-th output is a fixed function of (key, i).
// Distributions are implemented here rather than with <random> so that
// results are identical across standard libraries.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next() { return splitmix64(key_ ^ splitmix64(counter_++)); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
  }

  // Index drawn proportionally to nonnegative weights given by their prefix
  // sums. Returns -1 when the total weight is zero.
  int draw_cumulative(std::span<const double> cumulative);

  // Same, from raw weights.
  int draw(std::span<const double> weights);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline int CounterRng::draw_cumulative(std::span<const double> cumulative) {
  if (cumulative.empty() || !(cumulative.back() > 0.0)) return -1;
  const double u = uniform() * cumulative.back();
  std::size_t lo = 0;
  std::size_t hi = cumulative.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (cumulative[mid] > u) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return static_cast<int>(lo);
}

inline int CounterRng::draw(std::span<const double> weights) {
  std::vector<double> cumulative(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i] > 0.0 ? weights[i] : 0.0;
    cumulative[i] = acc;
  }
  return draw_cumulative(cumulative);
}

}  // namespace pardpp
