#pragma once

#include <cstdint>
#include <random>

namespace fnmt {

// Draws built directly on mt19937_64 output so sequences are identical
// across standard libraries (the std distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform in [0, n); n > 0.
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) std::swap(first[i - 1], first[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fnmt
