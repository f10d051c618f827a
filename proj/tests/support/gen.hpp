// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// Seeded generators for property tests.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ladderkit::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : state_(seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  // [lo, hi]
  int range(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double uniform() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool coin(double p = 0.5) { return uniform() < p; }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[next() % v.size()];
  }

  std::string word(int min_len = 2, int max_len = 8) {
    std::string w;
    const int n = range(min_len, max_len);
    for (int i = 0; i < n; ++i) w.push_back(static_cast<char>('a' + range(0, 25)));
    return w;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[next() % i]);
  }

 private:
  std::uint64_t state_;
};

}  // namespace ladderkit::testing
