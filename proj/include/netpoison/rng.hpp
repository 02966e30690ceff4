// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace netpoison {

// mt19937_64 with hand-rolled draws. std::uniform_int_distribution is allowed
// to differ between standard library implementations, so bounded draws are
// done with rejection sampling to keep results byte-identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform in [0, n). Unbiased via rejection.
  std::uint64_t bounded(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = eng_();
    while (x >= limit) x = eng_();
    return x % n;
  }

  // Uniform double in [0, 1) with 53 bits.
  double unit() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (deterministic, stateless pairing).
  double gaussian() {
    double u1 = unit();
    while (u1 == 0.0) u1 = unit();
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  // Fisher-Yates. Deterministic given the seed, unlike std::shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t k = v.size(); k > 1; --k) {
      const std::size_t r = static_cast<std::size_t>(bounded(k));
      std::swap(v[k - 1], v[r]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace netpoison
