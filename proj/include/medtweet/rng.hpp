#pragma once

#include <cstdint>
#include <vector>

#include "medtweet/errors.hpp"

namespace medtweet {

// splitmix64: tiny, fully-specified generator so seeded runs reproduce
// bit-for-bit across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n) via rejection sampling; unbiased for all n >= 1.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw invalid_input("Rng::below(0)");
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

  // k distinct indices drawn uniformly from [0, n), in random order
  // (partial Fisher-Yates over the index array).
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
    if (k > n) throw invalid_input("sample size exceeds population");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }

 private:
  std::uint64_t state_;
};

}  // namespace medtweet
