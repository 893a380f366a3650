#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pardpp {

// A subset of the ground set {0, ..., n-1}, kept sorted and duplicate free.
using ElementSet = std::vector<int>;

// Sorts and removes duplicates in place.
inline ElementSet normalized(ElementSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

inline bool contains(std::span<const int> sorted_set, int element) {
  return std::binary_search(sorted_set.begin(), sorted_set.end(), element);
}

inline ElementSet set_union(std::span<const int> a, std::span<const int> b) {
  ElementSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Elements of {0..n-1} not in `sorted_set`, ascending.
inline std::vector<int> complement(std::span<const int> sorted_set, int n) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n) - sorted_set.size());
  std::size_t j = 0;
  for (int i = 0; i < n; ++i) {
    if (j < sorted_set.size() && sorted_set[j] == i) {
      ++j;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

// Set with bit i of `mask` mapped to element i.
inline ElementSet from_mask(std::uint64_t mask) {
  ElementSet s;
  for (int i = 0; mask != 0; ++i, mask >>= 1) {
    if (mask & 1U) s.push_back(i);
  }
  return s;
}

inline std::uint64_t to_mask(std::span<const int> s) {
  std::uint64_t m = 0;
  for (int i : s) m |= std::uint64_t{1} << i;
  return m;
}

inline std::string to_string(std::span<const int> s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i]);
  }
  return out + "}";
}

struct ElementSetHash {
  std::size_t operator()(const ElementSet& s) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (int v : s) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace pardpp
